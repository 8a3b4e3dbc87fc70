#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "dpgmg/io.hpp"

namespace dpgmg {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<ConvergenceRecord>& records) {
  out << csv_header() << "\n";
  for (const auto& r : records) {
    out << r.grid << ',' << r.ndof << ',' << r.iterations << ',' << fmt(r.final_residual) << ','
        << fmt(r.dpg_eta) << ',' << fmt(r.assembly_s) << ',' << fmt(r.solve_s) << "\n";
  }
}

std::vector<ConvergenceRecord> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != csv_header()) throw ParseError(1, "bad CSV header: " + line);

  std::vector<ConvergenceRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 7) throw ParseError(lineno, "expected 7 fields");
    try {
      ConvergenceRecord r;
      r.grid = std::stoi(f[0]);
      r.ndof = std::stoll(f[1]);
      r.iterations = std::stoi(f[2]);
      r.final_residual = std::stod(f[3]);
      r.dpg_eta = std::stod(f[4]);
      r.assembly_s = std::stod(f[5]);
      r.solve_s = std::stod(f[6]);
      out.push_back(r);
    } catch (const std::exception&) {
      throw ParseError(lineno, "bad field in row: " + line);
    }
  }
  return out;
}

}  // namespace dpgmg
