#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdlib>

#include "dpgmg/hierarchy.hpp"
#include "dpgmg/study.hpp"
#include "util.hpp"

using namespace dpgmg;
using testing::rel_err;

namespace {

ProblemConfig plane_cfg(double omega, double dx = 0.6, double dy = 0.8) {
  ProblemConfig pc;
  pc.omega = omega;
  pc.boundary_load = plane_wave_load({omega, 1.0, dx, dy}, pc.impedance);
  return pc;
}

Mesh uniform_mesh(int refinements, int p0 = 2) {
  Mesh m = Mesh::initial(p0);
  for (int r = 0; r < refinements; ++r) {
    std::vector<Mark> marks;
    for (int e : m.active_elems()) marks.push_back({e, MarkKind::H});
    m = refine(m, marks);
  }
  return m;
}

Vec dense_solve(const Assembled& a) {
  return cholesky_solve(hermitian_cholesky(Mat(a.A.mat())), a.rhs);
}

}  // namespace

TEST_CASE("trace dof counts on small uniform meshes") {
  const ProblemConfig pc = plane_cfg(2.0 * M_PI);

  // one order-2 element: 4 corner values + 1 bubble per edge; boundary edges
  // carry no independent flux
  const Assembled a1 = assemble_global(uniform_mesh(0), pc);
  CHECK(a1.dm.ndof == 8);
  CHECK(a1.A.n() == 8);
  CHECK(a1.dm.ndof_reported == 8);

  // 2x2: 9 vertices + 12 edge bubbles + 4 interior edges x 3 flux modes
  const Assembled a4 = assemble_global(uniform_mesh(1), pc);
  CHECK(a4.dm.ndof == 9 + 12 + 12);
  CHECK(a4.dm.ndof_reported == a4.dm.ndof);
}

TEST_CASE("hanging meshes report eliminated constraints once") {
  Mesh m = uniform_mesh(1);
  m = refine(m, {{m.active_elems()[0], MarkKind::H}});
  const Assembled a = assemble_global(m, plane_cfg(2.0 * M_PI));
  CHECK(a.dm.ndof_reported > a.dm.ndof);
  // constrained rows expand through the regular carrier
  bool saw_expansion = false;
  for (const auto& rows : a.conn)
    for (const auto& row : rows)
      if (row.size() > 1) saw_expansion = true;
  CHECK(saw_expansion);
}

TEST_CASE("regular meshes scatter through identity rows") {
  const Assembled a = assemble_global(uniform_mesh(1), plane_cfg(2.0 * M_PI));
  for (const auto& rows : a.conn)
    for (const auto& row : rows) {
      REQUIRE(row.size() == 1);
      CHECK(row[0].second == 1.0);
    }
  // local_trace is then a plain gather
  const Vec x = testing::seeded_vec(a.dm.ndof, 501);
  const Vec t = local_trace(a.conn[2], a.sys[2].layout.n, x);
  for (int i = 0; i < t.size(); ++i) CHECK(t[i] == x[a.conn[2][i][0].first]);
}

TEST_CASE("assembly is deterministic and thread-count independent") {
  const ProblemConfig pc = plane_cfg(4.0 * M_PI);
  const Mesh m = uniform_mesh(2);
  setenv("DPGMG_THREADS", "1", 1);
  const Assembled a1 = assemble_global(m, pc);
  setenv("DPGMG_THREADS", "3", 1);
  const Assembled a2 = assemble_global(m, pc);
  unsetenv("DPGMG_THREADS");
  CHECK((a1.rhs - a2.rhs).cwiseAbs().maxCoeff() == 0.0);
  CHECK(rel_err(Mat(a1.A.mat()), Mat(a2.A.mat())) == 0.0);
}

TEST_CASE("assembled systems are hermitian positive definite") {
  const Assembled a = assemble_global(uniform_mesh(1), plane_cfg(2.0 * M_PI));
  CHECK(a.A.verify(1e-12));
  Eigen::SelfAdjointEigenSolver<Mat> eig(Mat(a.A.mat()));
  CHECK(eig.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("indicator identity at the discrete solution") {
  const Assembled a = assemble_global(uniform_mesh(2), plane_cfg(4.0 * M_PI));
  const Vec x = dense_solve(a);
  const auto eta2 = error_indicators(a, x);
  REQUIRE(eta2.size() == a.active.size());
  double sum = 0.0;
  for (double v : eta2) {
    CHECK(v >= 0.0);
    sum += v;
  }
  const double global = global_eta2(a, x);
  CHECK(std::abs(sum - global) < 1e-12 * global);

  // quadratic-form route agrees to roundoff of its own larger terms
  double scale = std::abs(std::real(x.dot(a.A.apply(x)))) + 2.0 * std::abs(std::real(x.dot(a.rhs)));
  for (const auto& es : a.sys) scale += es.eta0_sq;
  const double quad = global_eta2_quadratic(a, x);
  CHECK(std::abs(quad - sum) < 1e-8 * scale);
}

TEST_CASE("zero load means zero right-hand side and zero residual at zero") {
  ProblemConfig pc;
  pc.omega = 2.0 * M_PI;
  pc.boundary_load = zero_load();
  const Assembled a = assemble_global(uniform_mesh(1), pc);
  CHECK(a.rhs.cwiseAbs().maxCoeff() == 0.0);
  const Vec zero = Vec::Zero(a.dm.ndof);
  CHECK(global_eta2(a, zero) == 0.0);
  for (double v : error_indicators(a, zero)) CHECK(v == 0.0);
}

TEST_CASE("field recovery matches the uncondensed block and scales linearly") {
  const Assembled a = assemble_global(uniform_mesh(0), plane_cfg(2.0 * M_PI));
  const Vec x = dense_solve(a);
  const auto fields = recover_fields(a, x);
  REQUIRE(fields.size() == 1);

  // oracle: one-shot least squares over [fields | traces] on the single element
  const ElementSystem& es = a.sys[0];
  Mat bb(es.G.rows(), es.nfield + es.layout.n);
  bb.leftCols(es.nfield) = es.B;
  bb.rightCols(es.layout.n) = es.Bhat;
  const Mat w = cholesky_forward(es.Gchol, bb);
  const Vec wl = cholesky_forward(es.Gchol, Mat(es.l)).col(0);
  Mat nmat = w.adjoint() * w;
  nmat = 0.5 * (nmat + nmat.adjoint());
  const Vec full = cholesky_solve(hermitian_cholesky(nmat), Vec(w.adjoint() * wl));
  CHECK((fields[0] - full.head(es.nfield)).norm() < 1e-10 * full.norm());
}

TEST_CASE("plane-wave fields converge at the expected rate") {
  const double omega = 4.0 * M_PI;
  const PlaneWave pw{omega, 1.0, 0.6, 0.8};
  const ProblemConfig pc = plane_cfg(omega);

  std::vector<Mesh> meshes = {Mesh::initial(2)};
  std::vector<DofMap> dms = {build_dofmap(meshes[0])};
  std::vector<double> errs;
  for (int g = 0; g < 5; ++g) {
    if (g > 0) {
      std::vector<Mark> marks;
      for (int e : meshes.back().active_elems()) marks.push_back({e, MarkKind::H});
      meshes.push_back(refine(meshes.back(), marks));
      dms.push_back(build_dofmap(meshes.back()));
    }
    const Assembled a = assemble_global(meshes.back(), pc);
    const Hierarchy h =
        build_hierarchy(meshes, dms, a.A, CoarseOpMode::Restrict, nullptr, CycleConfig{});
    const MgResult r = mg_solve(h, a.rhs, 1e-10, 2000);
    REQUIRE(r.converged);
    errs.push_back(plane_wave_l2_error(a, r.x, pw));
  }
  const double rate = std::log2(errs[1] / errs[4]) / 3.0;
  CHECK(rate >= 2.0);  // matches the field order
}
