#include "dpgmg/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "dpgmg/shape.hpp"

namespace dpgmg {

BoundaryLoad make_load(const LoadSpec& ls, double omega, double wavespeed, double impedance) {
  switch (ls.kind) {
    case LoadSpec::Kind::PlaneWaveDir: {
      const double n = std::hypot(ls.dx, ls.dy);
      if (n == 0.0) throw ConfigError("plane-wave direction must be nonzero");
      PlaneWave pw{omega, wavespeed, ls.dx / n, ls.dy / n};
      return plane_wave_load(pw, impedance);
    }
    case LoadSpec::Kind::GaussianBeam:
      return gaussian_beam_load(omega, wavespeed, impedance, ls.center, ls.waist);
    case LoadSpec::Kind::Zero:
      return zero_load();
  }
  throw ConfigError("unknown load kind");
}

void StudyConfig::validate() const {
  if (!(tol > 0.0 && tol < 1.0)) throw ConfigError("tol must lie in (0,1)");
  if (grids < 1) throw ConfigError("grids must be >= 1");
  if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("theta must lie in (0,1]");
  if (p0 < 1) throw ConfigError("p0 must be >= 1");
  if (p_max < p0) throw ConfigError("p_max must be >= p0");
  if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (pc.omega <= 0.0) throw ConfigError("omega must be positive");
  if (pc.wavespeed <= 0.0) throw ConfigError("wavespeed must be positive");
  if (pc.impedance <= 0.0) throw ConfigError("impedance must be positive");
  for (double w : omegas)
    if (w <= 0.0) throw ConfigError("sweep frequencies must be positive");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int max_active_order(const Mesh& m) {
  int p = 0;
  for (int e : m.active_elems()) p = std::max(p, m.elems[e].order);
  return p;
}

/// At least two elements per wavelength: every active edge <= lambda/2.
bool nyquist_resolved(const Mesh& m, double omega, double wavespeed) {
  const double half_lambda = M_PI * wavespeed / omega;
  for (int e : m.active_elems())
    if (m.max_edge_len(e) > half_lambda) return false;
  return true;
}

/// Shared per-study state: the mesh lineage, the systems retained for store
/// mode, and the previous grid's solution for warm starts.
struct StudyRun {
  const StudyConfig& cfg;
  ProblemConfig pc;  // cfg.pc with the load closure installed
  std::vector<Mesh> meshes;
  std::vector<DofMap> dms;
  std::vector<SparseHermitian> stored;
  StudyResult out;
  Vec x_prev;

  explicit StudyRun(const StudyConfig& c) : cfg(c), pc(c.pc) {
    pc.boundary_load = make_load(c.load, pc.omega, pc.wavespeed, pc.impedance);
    meshes.push_back(Mesh::initial(c.p0, c.p_max));
  }

  /// Assembles and solves the current finest mesh, appends one record, and
  /// returns the squared element indicators for marking.
  std::vector<double> solve_grid() {
    const int g = static_cast<int>(out.records.size());
    Assembled a = assemble_global(meshes.back(), pc);
    dms.push_back(a.dm);
    // the hierarchy wants one retained system per mesh (the finest slot is
    // never read, but it keeps the lists aligned for the next grid)
    if (cfg.mode == CoarseOpMode::Store) stored.push_back(a.A);

    const auto t0 = Clock::now();
    Hierarchy h = build_hierarchy(meshes, dms, a.A, cfg.mode,
                                  cfg.mode == CoarseOpMode::Store ? &stored : nullptr, cfg.cycle);
    Vec x0;
    const bool warm = cfg.warm_start && x_prev.size() > 0 && !h.pairs.empty();
    if (warm) x0 = total_prolongation(h.pairs.back(), static_cast<int>(a.rhs.size())) * x_prev;
    MgResult mg = mg_solve(h, a.rhs, cfg.tol, cfg.max_iter, warm ? &x0 : nullptr);
    const double solve_s = seconds_since(t0);

    std::vector<double> eta2 = error_indicators(a, mg.x);
    double sum = 0;
    for (double v : eta2) sum += v;
    const double global = global_eta2(a, mg.x);

    ConvergenceRecord rec;
    rec.grid = g;
    rec.ndof = a.dm.ndof_reported;
    rec.iterations = mg.iterations;
    rec.final_residual = mg.history.empty() ? 0.0 : mg.history.back();
    rec.dpg_eta = std::sqrt(sum);
    rec.assembly_s = a.assemble_seconds;
    rec.solve_s = solve_s;
    out.records.push_back(rec);
    out.eta_identity_rel.push_back(global > 0 ? std::abs(sum - global) / global : 0.0);
    out.orders.push_back(max_active_order(meshes.back()));
    out.nyquist.push_back(nyquist_resolved(meshes.back(), pc.omega, pc.wavespeed));
    out.all_converged = out.all_converged && mg.converged;

    if (cfg.warm_start) x_prev = mg.x;
    if (cfg.on_grid) cfg.on_grid(g, a, mg.x);
    return eta2;
  }

  void push_refined(const std::vector<Mark>& marks) { meshes.push_back(refine(meshes.back(), marks)); }

  std::vector<Mark> mark_all(MarkKind kind) const {
    std::vector<Mark> marks;
    for (int e : meshes.back().active_elems()) marks.push_back({e, kind});
    return marks;
  }
};

}  // namespace

StudyResult run_uniform_h(const StudyConfig& cfg) {
  cfg.validate();
  StudyRun run(cfg);
  for (int g = 0; g < cfg.grids; ++g) {
    run.solve_grid();
    if (g + 1 < cfg.grids) run.push_refined(run.mark_all(MarkKind::H));
  }
  return std::move(run.out);
}

StudyResult run_uniform_p(const StudyConfig& cfg) {
  cfg.validate();
  StudyRun run(cfg);
  for (int g = 0; g < cfg.grids; ++g) {
    run.solve_grid();
    const Mesh& m = run.meshes.back();
    const bool resolved = run.out.nyquist.back();
    if (resolved && run.out.p_phase_start < 0) run.out.p_phase_start = g;
    if (g + 1 == cfg.grids) break;
    if (!resolved)
      run.push_refined(run.mark_all(MarkKind::H));
    else if (max_active_order(m) < cfg.p_max)
      run.push_refined(run.mark_all(MarkKind::P));
    else
      break;  // p_max reached: study ends
  }
  return std::move(run.out);
}

StudyResult run_hp_adaptive(const StudyConfig& cfg) {
  cfg.validate();
  StudyRun run(cfg);
  bool final_grid = false;
  for (int g = 0; g < cfg.grids; ++g) {
    std::vector<double> eta2 = run.solve_grid();
    if (final_grid || g + 1 == cfg.grids) break;

    const Mesh& m = run.meshes.back();
    const std::vector<int> active = m.active_elems();
    std::vector<Mark> marks;
    int n_h = 0;
    for (int idx : dorfler_mark(eta2, cfg.theta)) {
      const int elem = active[idx];
      const bool h = wavelength_h_refine(m, elem, run.pc.omega, run.pc.wavespeed) ||
                     m.elems[elem].order >= cfg.p_max;
      marks.push_back({elem, h ? MarkKind::H : MarkKind::P});
      n_h += h ? 1 : 0;
    }
    final_grid = n_h == 0;  // end one grid after a round with no h-requests
    run.push_refined(marks);
  }
  return std::move(run.out);
}

StudyResult run_study(const StudyConfig& cfg) {
  switch (cfg.kind) {
    case StudyKind::UniformH:
      return run_uniform_h(cfg);
    case StudyKind::UniformP:
      return run_uniform_p(cfg);
    case StudyKind::HpAdaptive:
      return run_hp_adaptive(cfg);
  }
  throw ConfigError("unknown study kind");
}

OmegaSweepResult run_omega_sweep(const StudyConfig& cfg) {
  cfg.validate();
  std::vector<double> omegas = cfg.omegas;
  if (omegas.empty()) omegas.push_back(cfg.pc.omega);

  OmegaSweepResult sweep;
  for (double w : omegas) {
    StudyConfig per = cfg;
    per.pc.omega = w;
    per.omegas.clear();
    StudyResult res = run_study(per);
    int max_it = 0;
    for (const auto& r : res.records) max_it = std::max(max_it, r.iterations);
    sweep.rows.push_back({w, max_it});
    sweep.studies.push_back(std::move(res));
  }

  if (sweep.rows.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(sweep.rows.size());
    for (const auto& r : sweep.rows) {
      const double x = std::log(r.omega);
      const double y = std::log(static_cast<double>(std::max(r.max_iterations, 1)));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    sweep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    sweep.has_slope = true;
  }
  return sweep;
}

double plane_wave_l2_error(const Assembled& a, const Vec& xhat, const PlaneWave& pw) {
  const std::vector<Vec> fields = recover_fields(a, xhat);
  double acc = 0;
  for (size_t k = 0; k < a.sys.size(); ++k) {
    const ElemContext& ctx = a.ctx[k];
    const int nf1 = (ctx.p + 1) * (ctx.p + 1);
    const int nq1 = ctx.p_test + 2;
    const shape::Quad1D q = shape::gauss_legendre(nq1);
    std::vector<shape::Pt> pts;
    for (int b = 0; b < nq1; ++b)
      for (int c = 0; c < nq1; ++c) pts.push_back({q.x[c], q.x[b]});
    const Eigen::MatrixXd basis = shape::eval_l2(ctx.p, pts);
    const Mat vals = basis.transpose().cast<Cplx>() *
                     Eigen::Map<const Mat>(fields[k].data(), nf1, 3);  // cols ux, uy, p
    for (int b = 0; b < nq1; ++b)
      for (int c = 0; c < nq1; ++c) {
        const int i = b * nq1 + c;
        const double x = ctx.rect.x0 + ctx.rect.hx * (q.x[c] + 1) / 2;
        const double y = ctx.rect.y0 + ctx.rect.hy * (q.x[b] + 1) / 2;
        const double w = q.w[c] * q.w[b] * ctx.rect.hx * ctx.rect.hy / 4.0;
        acc += w * (std::norm(vals(i, 0) - pw.ux(x, y)) + std::norm(vals(i, 1) - pw.uy(x, y)) +
                    std::norm(vals(i, 2) - pw.p(x, y)));
      }
  }
  return std::sqrt(acc);
}

}  // namespace dpgmg
