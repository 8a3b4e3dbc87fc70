#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "dpgmg/io.hpp"
#include "dpgmg/shape.hpp"

namespace dpgmg {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_vtk(std::ostream& out, const Assembled& a, const Vec& xhat) {
  const std::vector<Vec> fields = recover_fields(a, xhat);
  const std::vector<double> eta2 = error_indicators(a, xhat);
  const int ne = static_cast<int>(a.active.size());

  // 3x3 point lattice and 2x2 cells per element; points are not shared
  // across elements (fields are element-discontinuous).
  std::vector<shape::Pt> ref;
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) ref.push_back({i - 1.0, j - 1.0});

  out << "# vtk DataFile Version 3.0\n";
  out << "dpgmg pressure snapshot\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";

  out << "POINTS " << 9 * ne << " double\n";
  for (int k = 0; k < ne; ++k) {
    const Rect r = a.mesh.rect(a.active[k]);
    for (const auto& q : ref)
      out << fmt(r.x0 + r.hx * (q.x + 1) / 2) << ' ' << fmt(r.y0 + r.hy * (q.y + 1) / 2)
          << " 0\n";
  }

  out << "CELLS " << 4 * ne << ' ' << 20 * ne << "\n";
  for (int k = 0; k < ne; ++k) {
    const int base = 9 * k;
    for (int cj = 0; cj < 2; ++cj)
      for (int ci = 0; ci < 2; ++ci) {
        const int p00 = base + 3 * cj + ci;
        out << "4 " << p00 << ' ' << p00 + 1 << ' ' << p00 + 4 << ' ' << p00 + 3 << "\n";
      }
  }
  out << "CELL_TYPES " << 4 * ne << "\n";
  for (int k = 0; k < 4 * ne; ++k) out << "9\n";

  // Pressure block is the last (p+1)^2 coefficients of the recovered fields.
  std::vector<Vec> pvals(ne);
  for (int k = 0; k < ne; ++k) {
    const int p = a.ctx[k].p;
    const int nf1 = (p + 1) * (p + 1);
    const Eigen::MatrixXd basis = shape::eval_l2(p, ref);
    pvals[k] = basis.transpose().cast<Cplx>() * fields[k].segment(2 * nf1, nf1);
  }

  out << "POINT_DATA " << 9 * ne << "\n";
  const auto scalars = [&](const char* name, auto&& get) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (int k = 0; k < ne; ++k)
      for (int q = 0; q < 9; ++q) out << fmt(get(pvals[k][q])) << "\n";
  };
  scalars("p_re", [](Cplx v) { return v.real(); });
  scalars("p_im", [](Cplx v) { return v.imag(); });
  scalars("p_abs", [](Cplx v) { return std::abs(v); });

  out << "CELL_DATA " << 4 * ne << "\n";
  out << "SCALARS eta double 1\nLOOKUP_TABLE default\n";
  for (int k = 0; k < ne; ++k)
    for (int c = 0; c < 4; ++c) out << fmt(std::sqrt(eta2[k])) << "\n";
  out << "SCALARS order double 1\nLOOKUP_TABLE default\n";
  for (int k = 0; k < ne; ++k)
    for (int c = 0; c < 4; ++c) out << a.mesh.elems[a.active[k]].order << "\n";
}

namespace {

struct Scanner {
  std::istream& in;
  std::string next() {
    std::string t;
    if (!(in >> t)) throw ParseError(0, "unexpected end of VTK stream");
    return t;
  }
  int next_int() {
    try {
      return std::stoi(next());
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ParseError(0, "expected integer in VTK stream");
    }
  }
  double next_double() {
    try {
      return std::stod(next());
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ParseError(0, "expected number in VTK stream");
    }
  }
};

}  // namespace

VtkSummary parse_vtk(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# vtk DataFile", 0) != 0)
    throw ParseError(1, "missing VTK header");
  if (!std::getline(in, line)) throw ParseError(2, "missing title line");
  if (!std::getline(in, line) || line != "ASCII") throw ParseError(3, "expected ASCII");
  if (!std::getline(in, line) || line != "DATASET UNSTRUCTURED_GRID")
    throw ParseError(4, "expected DATASET UNSTRUCTURED_GRID");

  VtkSummary s;
  Scanner sc{in};
  int section = 0;  // 0 none, 1 point data, 2 cell data
  int section_n = 0;
  std::string tok;
  while (in >> tok) {
    if (tok == "POINTS") {
      s.n_points = sc.next_int();
      sc.next();  // value type
      for (int i = 0; i < 3 * s.n_points; ++i) sc.next_double();
    } else if (tok == "CELLS") {
      s.n_cells = sc.next_int();
      const int size = sc.next_int();
      for (int i = 0; i < size; ++i) {
        const int v = sc.next_int();
        if (v < 0 || v >= std::max(s.n_points, 5))
          throw ParseError(0, "cell index out of range");
      }
    } else if (tok == "CELL_TYPES") {
      const int n = sc.next_int();
      if (n != s.n_cells) throw ParseError(0, "CELL_TYPES count mismatch");
      for (int i = 0; i < n; ++i) sc.next_int();
    } else if (tok == "POINT_DATA") {
      section = 1;
      section_n = sc.next_int();
      if (section_n != s.n_points) throw ParseError(0, "POINT_DATA count mismatch");
    } else if (tok == "CELL_DATA") {
      section = 2;
      section_n = sc.next_int();
      if (section_n != s.n_cells) throw ParseError(0, "CELL_DATA count mismatch");
    } else if (tok == "SCALARS") {
      if (section == 0) throw ParseError(0, "SCALARS outside a data section");
      const std::string name = sc.next();
      sc.next();  // value type
      int comp = 1;
      std::string t = sc.next();
      if (t != "LOOKUP_TABLE") {
        comp = std::stoi(t);
        if (sc.next() != "LOOKUP_TABLE") throw ParseError(0, "expected LOOKUP_TABLE");
      }
      sc.next();  // table name
      for (int i = 0; i < section_n * comp; ++i) sc.next_double();
      auto& dst = section == 1 ? s.point_fields : s.cell_fields;
      dst.emplace_back(name, section_n * comp);
    } else {
      throw ParseError(0, "unexpected VTK keyword: " + tok);
    }
  }
  if (s.n_points <= 0 || s.n_cells <= 0) throw ParseError(0, "VTK stream has no grid");
  return s;
}

}  // namespace dpgmg
