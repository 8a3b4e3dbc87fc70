#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "dpgmg/io.hpp"

namespace dpgmg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, int line) {
  size_t used = 0;
  double x = 0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    throw ParseError(line, "not a number: " + v);
  }
  if (used != v.size()) throw ParseError(line, "trailing characters after number: " + v);
  if (!std::isfinite(x)) throw ParseError(line, "number not finite: " + v);
  return x;
}

int parse_int(const std::string& v, int line) {
  size_t used = 0;
  long x = 0;
  try {
    x = std::stol(v, &used);
  } catch (const std::exception&) {
    throw ParseError(line, "not an integer: " + v);
  }
  if (used != v.size()) throw ParseError(line, "trailing characters after integer: " + v);
  return static_cast<int>(x);
}

bool parse_bool(const std::string& v, int line) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ParseError(line, "expected true or false, got: " + v);
}

std::vector<double> parse_list(const std::string& v, int line) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ParseError(line, "empty list element");
    out.push_back(parse_double(item, line));
  }
  if (out.empty()) throw ParseError(line, "empty list");
  return out;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void require(bool ok, const char* key, const char* what) {
  if (!ok) throw RangeError(key, what);
}

}  // namespace

StudyConfig parse_config(std::istream& in) {
  StudyConfig cfg;
  bool have_study = false;

  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    if (key.empty()) throw ParseError(lineno, "empty key");
    if (val.empty()) throw ParseError(lineno, "empty value for key " + key);

    if (key == "study") {
      if (val == "uniform_h")
        cfg.kind = StudyKind::UniformH;
      else if (val == "uniform_p")
        cfg.kind = StudyKind::UniformP;
      else if (val == "hp_adaptive")
        cfg.kind = StudyKind::HpAdaptive;
      else
        throw RangeError("study", "must be uniform_h, uniform_p or hp_adaptive");
      have_study = true;
    } else if (key == "omega") {
      cfg.pc.omega = parse_double(val, lineno);
      require(cfg.pc.omega > 0, "omega", "must be positive");
    } else if (key == "omegas") {
      cfg.omegas = parse_list(val, lineno);
      for (double w : cfg.omegas) require(w > 0, "omegas", "must be positive");
    } else if (key == "wavespeed") {
      cfg.pc.wavespeed = parse_double(val, lineno);
      require(cfg.pc.wavespeed > 0, "wavespeed", "must be positive");
    } else if (key == "impedance") {
      cfg.pc.impedance = parse_double(val, lineno);
      require(cfg.pc.impedance > 0, "impedance", "must be positive");
    } else if (key == "alpha") {
      cfg.pc.alpha = parse_double(val, lineno);
      require(cfg.pc.alpha > 0, "alpha", "must be positive");
    } else if (key == "delta_p") {
      cfg.pc.delta_p = parse_int(val, lineno);
      require(cfg.pc.delta_p >= 1, "delta_p", "must be >= 1");
    } else if (key == "tol") {
      cfg.tol = parse_double(val, lineno);
      require(cfg.tol > 0 && cfg.tol < 1, "tol", "must lie in (0,1)");
    } else if (key == "grids") {
      cfg.grids = parse_int(val, lineno);
      require(cfg.grids >= 1, "grids", "must be >= 1");
    } else if (key == "theta") {
      cfg.theta = parse_double(val, lineno);
      require(cfg.theta > 0 && cfg.theta <= 1, "theta", "must lie in (0,1]");
    } else if (key == "p0") {
      cfg.p0 = parse_int(val, lineno);
      require(cfg.p0 >= 1, "p0", "must be >= 1");
    } else if (key == "p_max") {
      cfg.p_max = parse_int(val, lineno);
      require(cfg.p_max >= 1, "p_max", "must be >= 1");
    } else if (key == "warm_start") {
      cfg.warm_start = parse_bool(val, lineno);
    } else if (key == "max_iter") {
      cfg.max_iter = parse_int(val, lineno);
      require(cfg.max_iter >= 1, "max_iter", "must be >= 1");
    } else if (key == "mode") {
      if (val == "restrict")
        cfg.mode = CoarseOpMode::Restrict;
      else if (val == "store")
        cfg.mode = CoarseOpMode::Store;
      else
        throw RangeError("mode", "must be restrict or store");
    } else if (key == "pre_smooth") {
      cfg.cycle.pre_smooth = parse_int(val, lineno);
      require(cfg.cycle.pre_smooth >= 1, "pre_smooth", "must be >= 1");
    } else if (key == "post_smooth") {
      cfg.cycle.post_smooth = parse_int(val, lineno);
      require(cfg.cycle.post_smooth >= 1, "post_smooth", "must be >= 1");
    } else if (key == "damping") {
      cfg.cycle.damping = parse_double(val, lineno);
      require(cfg.cycle.damping >= 0 && cfg.cycle.damping <= 1, "damping",
              "must lie in [0,1]; 0 selects the automatic value");
    } else if (key == "bottom") {
      if (val == "smoothing")
        cfg.cycle.bottom = CycleConfig::Bottom::SmoothOnly;
      else if (val == "exact")
        cfg.cycle.bottom = CycleConfig::Bottom::ExactSolve;
      else
        throw RangeError("bottom", "must be smoothing or exact");
    } else if (key == "load") {
      if (val == "plane_wave")
        cfg.load.kind = LoadSpec::Kind::PlaneWaveDir;
      else if (val == "gaussian_beam")
        cfg.load.kind = LoadSpec::Kind::GaussianBeam;
      else if (val == "zero")
        cfg.load.kind = LoadSpec::Kind::Zero;
      else
        throw RangeError("load", "must be plane_wave, gaussian_beam or zero");
    } else if (key == "load_dx") {
      cfg.load.dx = parse_double(val, lineno);
    } else if (key == "load_dy") {
      cfg.load.dy = parse_double(val, lineno);
    } else if (key == "beam_center") {
      cfg.load.center = parse_double(val, lineno);
      require(cfg.load.center >= 0 && cfg.load.center <= 1, "beam_center", "must lie in [0,1]");
    } else if (key == "beam_waist") {
      cfg.load.waist = parse_double(val, lineno);
      require(cfg.load.waist > 0, "beam_waist", "must be positive");
    } else {
      throw UnknownKey(key);
    }
  }

  if (!have_study) throw RequiredMissing("study");
  require(cfg.p_max >= cfg.p0, "p_max", "must be >= p0");
  require(cfg.cycle.post_smooth == cfg.cycle.pre_smooth, "post_smooth",
          "must equal pre_smooth (the cycle must stay symmetric for CG)");
  require(cfg.load.dx != 0 || cfg.load.dy != 0, "load_dx", "direction must be nonzero");
  cfg.validate();
  return cfg;
}

StudyConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config(in);
}

std::string serialize_config(const StudyConfig& cfg) {
  std::ostringstream out;
  out << "study = "
      << (cfg.kind == StudyKind::UniformH
              ? "uniform_h"
              : cfg.kind == StudyKind::UniformP ? "uniform_p" : "hp_adaptive")
      << "\n";
  out << "omega = " << fmt(cfg.pc.omega) << "\n";
  if (!cfg.omegas.empty()) {
    out << "omegas = ";
    for (size_t i = 0; i < cfg.omegas.size(); ++i)
      out << (i ? "," : "") << fmt(cfg.omegas[i]);
    out << "\n";
  }
  out << "wavespeed = " << fmt(cfg.pc.wavespeed) << "\n";
  out << "impedance = " << fmt(cfg.pc.impedance) << "\n";
  out << "alpha = " << fmt(cfg.pc.alpha) << "\n";
  out << "delta_p = " << cfg.pc.delta_p << "\n";
  out << "tol = " << fmt(cfg.tol) << "\n";
  out << "grids = " << cfg.grids << "\n";
  out << "theta = " << fmt(cfg.theta) << "\n";
  out << "p0 = " << cfg.p0 << "\n";
  out << "p_max = " << cfg.p_max << "\n";
  out << "warm_start = " << (cfg.warm_start ? "true" : "false") << "\n";
  out << "max_iter = " << cfg.max_iter << "\n";
  out << "mode = " << (cfg.mode == CoarseOpMode::Restrict ? "restrict" : "store") << "\n";
  out << "pre_smooth = " << cfg.cycle.pre_smooth << "\n";
  out << "post_smooth = " << cfg.cycle.post_smooth << "\n";
  out << "damping = " << fmt(cfg.cycle.damping) << "\n";
  out << "bottom = "
      << (cfg.cycle.bottom == CycleConfig::Bottom::SmoothOnly ? "smoothing" : "exact") << "\n";
  out << "load = "
      << (cfg.load.kind == LoadSpec::Kind::PlaneWaveDir
              ? "plane_wave"
              : cfg.load.kind == LoadSpec::Kind::GaussianBeam ? "gaussian_beam" : "zero")
      << "\n";
  out << "load_dx = " << fmt(cfg.load.dx) << "\n";
  out << "load_dy = " << fmt(cfg.load.dy) << "\n";
  out << "beam_center = " << fmt(cfg.load.center) << "\n";
  out << "beam_waist = " << fmt(cfg.load.waist) << "\n";
  return out.str();
}

}  // namespace dpgmg
