// Command-line driver: convergence studies for the ultraweak Helmholtz
// solver with multigrid-preconditioned CG on condensed trace systems.
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "dpgmg/io.hpp"

namespace fs = std::filesystem;
using namespace dpgmg;

namespace {

struct CommonArgs {
  std::string config;
  std::string out = "out";
  bool vtk = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config, "study configuration file")->required();
  cmd->add_option("-o,--out", args.out, "output directory (default ./out)");
  cmd->add_flag("--vtk", args.vtk, "write a legacy-VTK pressure snapshot per grid");
}

void print_records(const StudyResult& res) {
  std::cout << "grid      ndof  iters      residual       dpg_eta   asm_s  solve_s\n";
  for (const auto& r : res.records) {
    char line[160];
    std::snprintf(line, sizeof line, "%4d %9lld %6d %13.3e %13.6e %7.2f %8.2f\n", r.grid,
                  static_cast<long long>(r.ndof), r.iterations, r.final_residual, r.dpg_eta,
                  r.assembly_s, r.solve_s);
    std::cout << line;
  }
}

void write_study_csv(const fs::path& path, const StudyResult& res) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_csv(out, res.records);
  std::cout << "wrote " << path.string() << "\n";
}

int run_one_study(StudyKind kind, const char* name, const CommonArgs& args) {
  StudyConfig cfg = parse_config_file(args.config);
  cfg.kind = kind;  // the subcommand picks the protocol
  fs::create_directories(args.out);
  if (args.vtk) {
    cfg.on_grid = [&args, name](int grid, const Assembled& a, const Vec& x) {
      const fs::path p = fs::path(args.out) / (std::string(name) + "_grid" +
                                               std::to_string(grid) + ".vtk");
      std::ofstream v(p);
      write_vtk(v, a, x);
    };
  }
  StudyResult res = run_study(cfg);
  print_records(res);
  write_study_csv(fs::path(args.out) / (std::string(name) + ".csv"), res);
  if (!res.all_converged) {
    std::cerr << "error: at least one grid did not reach tolerance "
              << cfg.tol << " within " << cfg.max_iter << " iterations\n";
    return 1;
  }
  return 0;
}

int run_sweep(const CommonArgs& args) {
  StudyConfig cfg = parse_config_file(args.config);
  if (cfg.omegas.empty()) cfg.omegas.push_back(cfg.pc.omega);
  fs::create_directories(args.out);
  OmegaSweepResult sw = run_omega_sweep(cfg);

  bool ok = true;
  for (size_t i = 0; i < sw.rows.size(); ++i) {
    std::cout << "omega = " << sw.rows[i].omega << "\n";
    print_records(sw.studies[i]);
    char name[64];
    std::snprintf(name, sizeof name, "sweep_omega%zu.csv", i);
    write_study_csv(fs::path(args.out) / name, sw.studies[i]);
    ok = ok && sw.studies[i].all_converged;
  }
  {
    std::ofstream s(fs::path(args.out) / "sweep_summary.csv");
    s << "omega,max_iterations\n";
    for (const auto& r : sw.rows) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g,%d\n", r.omega, r.max_iterations);
      s << buf;
    }
  }
  std::cout << "wrote " << (fs::path(args.out) / "sweep_summary.csv").string() << "\n";
  if (sw.has_slope)
    std::cout << "log-log iteration growth slope: " << sw.slope << "\n";
  else
    std::cout << "log-log iteration growth slope: absent (needs >= 2 frequencies)\n";
  if (!ok) {
    std::cerr << "error: at least one sweep solve did not reach tolerance\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ultraweak DPG Helmholtz solver with multigrid-preconditioned CG"};
  app.require_subcommand(1);

  CommonArgs h_args, p_args, hp_args, sweep_args;
  CLI::App* h = app.add_subcommand("h-study", "uniform h-refinement study");
  add_common(h, h_args);
  CLI::App* p = app.add_subcommand("p-study", "h-until-Nyquist then uniform p study");
  add_common(p, p_args);
  CLI::App* hp = app.add_subcommand("hp-adaptive", "Dörfler-driven hp-adaptive study");
  add_common(hp, hp_args);
  CLI::App* sweep = app.add_subcommand("omega-sweep", "repeat the configured study per frequency");
  add_common(sweep, sweep_args);
  CLI::App* self = app.add_subcommand("selftest", "run the invariant suite on tiny meshes");
  (void)self;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (h->parsed()) return run_one_study(StudyKind::UniformH, "h_study", h_args);
    if (p->parsed()) return run_one_study(StudyKind::UniformP, "p_study", p_args);
    if (hp->parsed()) return run_one_study(StudyKind::HpAdaptive, "hp_adaptive", hp_args);
    if (sweep->parsed()) return run_sweep(sweep_args);
    if (self->parsed()) return run_selftest(std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
