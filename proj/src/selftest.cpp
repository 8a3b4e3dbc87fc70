#include <cmath>
#include <ostream>
#include <sstream>

#include "dpgmg/io.hpp"

namespace dpgmg {

namespace {

struct Reporter {
  std::ostream& out;
  int failures = 0;
  void check(const char* name, bool ok, const std::string& detail = {}) {
    out << (ok ? "pass" : "FAIL") << "  " << name;
    if (!detail.empty()) out << "  (" << detail << ")";
    out << "\n";
    failures += ok ? 0 : 1;
  }
};

ProblemConfig tiny_problem() {
  ProblemConfig pc;
  pc.omega = 2.0 * M_PI;
  PlaneWave pw{pc.omega, pc.wavespeed, 0.6, 0.8};
  pc.boundary_load = plane_wave_load(pw, pc.impedance);
  return pc;
}

}  // namespace

int run_selftest(std::ostream& out) {
  Reporter rep{out};
  const ProblemConfig pc = tiny_problem();

  // Element Gram matrix is Hermitian positive definite.
  {
    Mesh m = Mesh::initial(2);
    DofMap dm = build_dofmap(m);
    ElemContext ctx = elem_context(m, dm, 0, pc);
    Mat g = element_gram(ctx, pc);
    const double herm = (g - g.adjoint()).norm() / g.norm();
    bool pd = true;
    try {
      hermitian_cholesky(g);
    } catch (const NotPositiveDefinite&) {
      pd = false;
    }
    rep.check("gram Hermitian + positive definite", herm < 1e-12 && pd);
  }

  // Condensed solve on one element matches the uncondensed normal equations.
  {
    Mesh m = Mesh::initial(2);
    Assembled a = assemble_global(m, pc);
    const auto& es = a.sys[0];
    Mat bb(es.B.rows(), es.B.cols() + es.Bhat.cols());
    bb << es.B, es.Bhat;
    // One-shot least squares over the combined [field | trace] unknowns.
    Mat w = cholesky_forward(es.Gchol, bb);
    Mat big = w.adjoint() * w;
    Vec rl = w.adjoint() * cholesky_forward(es.Gchol, Mat(es.l));
    Vec full = cholesky_solve(hermitian_cholesky(big), rl);
    Vec xc = cholesky_solve(hermitian_cholesky(a.A.mat().toDense()), a.rhs);
    Vec field = es.recov_c - es.recov_K * local_trace(a.conn[0], es.layout.n, xc);
    const double df = (full.head(es.nfield) - field).norm() / full.norm();
    const double dt = (full.tail(es.layout.n) - xc).norm() / full.norm();
    rep.check("condensation matches one-shot least squares", df < 1e-10 && dt < 1e-10,
              "field " + std::to_string(df) + " trace " + std::to_string(dt));
  }

  // Two-level restrict operator equals the Galerkin triple product.
  {
    std::vector<Mesh> meshes{Mesh::initial(2)};
    std::vector<Mark> marks{{0, MarkKind::H}};
    meshes.push_back(refine(meshes[0], marks));
    std::vector<DofMap> dms{build_dofmap(meshes[0]), build_dofmap(meshes[1])};
    Assembled a = assemble_global(meshes[1], pc);
    Hierarchy h = build_hierarchy(meshes, dms, a.A, CoarseOpMode::Restrict, nullptr, CycleConfig{});
    SpMat p = total_prolongation(h.pairs[0], a.A.n());
    const Mat d = h.a[0].mat().toDense() - (p.adjoint() * a.A.mat() * p).toDense();
    rep.check("restrict operator equals P^H A P", d.norm() / h.a[0].mat().norm() < 1e-12);
  }

  // V-cycle preconditioner is symmetric and positive on random vectors.
  {
    std::vector<Mesh> meshes{Mesh::initial(2)};
    meshes.push_back(refine(meshes[0], {{0, MarkKind::H}}));
    std::vector<DofMap> dms{build_dofmap(meshes[0]), build_dofmap(meshes[1])};
    Assembled a = assemble_global(meshes[1], pc);
    Hierarchy h = build_hierarchy(meshes, dms, a.A, CoarseOpMode::Restrict, nullptr, CycleConfig{});
    srand(12345);
    Vec u = Vec::Random(a.A.n()), v = Vec::Random(a.A.n());
    const Cplx s1 = v.dot(v_cycle(h, u)), s2 = u.dot(v_cycle(h, v));
    const double sym = std::abs(s1 - std::conj(s2)) / std::abs(s1);
    const double pos = u.dot(v_cycle(h, u)).real();
    rep.check("V-cycle symmetric and positive", sym < 1e-10 && pos > 0);
  }

  // Solver reaches tolerance and the indicator identity holds.
  {
    std::vector<Mesh> meshes{Mesh::initial(2)};
    meshes.push_back(refine(meshes[0], {{0, MarkKind::H}}));
    std::vector<DofMap> dms{build_dofmap(meshes[0]), build_dofmap(meshes[1])};
    Assembled a = assemble_global(meshes[1], pc);
    Hierarchy h = build_hierarchy(meshes, dms, a.A, CoarseOpMode::Restrict, nullptr, CycleConfig{});
    MgResult mg = mg_solve(h, a.rhs, 1e-7, 200);
    double sum = 0;
    for (double e : error_indicators(a, mg.x)) sum += e;
    const double global = global_eta2(a, mg.x);
    const double rel = std::abs(sum - global) / global;
    rep.check("solve converges, indicators sum to the global residual",
              mg.converged && rel < 1e-12, "identity " + std::to_string(rel));
  }

  // Config and CSV documents round-trip.
  {
    StudyConfig cfg;
    cfg.kind = StudyKind::HpAdaptive;
    cfg.pc.omega = 4 * M_PI;
    cfg.omegas = {2 * M_PI, 4 * M_PI};
    cfg.tol = 3e-8;
    cfg.warm_start = true;
    std::istringstream round(serialize_config(cfg));
    StudyConfig back = parse_config(round);
    const bool same = back.kind == cfg.kind && back.pc.omega == cfg.pc.omega &&
                      back.omegas == cfg.omegas && back.tol == cfg.tol &&
                      back.warm_start == cfg.warm_start;
    std::vector<ConvergenceRecord> recs{{3, 561, 18, 3.25e-8, 0.125, 0.5, 0.25}};
    std::ostringstream csv;
    write_csv(csv, recs);
    std::istringstream csvin(csv.str());
    const auto parsed = parse_csv(csvin);
    const bool csv_ok = parsed.size() == 1 && parsed[0].grid == 3 && parsed[0].ndof == 561 &&
                        parsed[0].iterations == 18 &&
                        parsed[0].final_residual == recs[0].final_residual &&
                        parsed[0].dpg_eta == recs[0].dpg_eta;
    rep.check("config and CSV round-trip", same && csv_ok);
  }

  out << (rep.failures == 0 ? "selftest: all checks passed\n"
                            : "selftest: " + std::to_string(rep.failures) + " check(s) FAILED\n");
  return rep.failures == 0 ? 0 : 1;
}

}  // namespace dpgmg
