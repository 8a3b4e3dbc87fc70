#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "dpgmg/study.hpp"

using namespace dpgmg;

namespace {

StudyConfig wave_cfg(double omega, StudyKind kind, int grids) {
  StudyConfig cfg;
  cfg.pc.omega = omega;
  cfg.load.kind = LoadSpec::Kind::PlaneWaveDir;
  cfg.load.dx = 0.6;
  cfg.load.dy = 0.8;
  cfg.kind = kind;
  cfg.grids = grids;
  return cfg;
}

std::vector<int> iterations_of(const StudyResult& r) {
  std::vector<int> v;
  for (const auto& rec : r.records) v.push_back(rec.iterations);
  return v;
}

void check_common_invariants(const StudyResult& r, double tol) {
  REQUIRE(!r.records.empty());
  CHECK(r.all_converged);
  for (size_t g = 0; g < r.records.size(); ++g) {
    CHECK(r.records[g].grid == static_cast<int>(g));
    CHECK(r.records[g].final_residual <= tol);
    CHECK(r.records[g].dpg_eta > 0.0);
    CHECK(r.records[g].assembly_s >= 0.0);
    CHECK(r.records[g].solve_s >= 0.0);
    if (g > 0) CHECK(r.records[g].ndof > r.records[g - 1].ndof);
  }
  CHECK(r.eta_identity_rel.size() == r.records.size());
  for (double rel : r.eta_identity_rel) CHECK(rel < 1e-12);
}

}  // namespace

TEST_CASE("a single grid study solves the base mesh in one iteration") {
  const StudyConfig cfg = wave_cfg(2.0 * M_PI, StudyKind::UniformH, 1);
  const StudyResult r = run_study(cfg);
  REQUIRE(r.records.size() == 1);
  check_common_invariants(r, cfg.tol);
  // one element, so the additive patch preconditioner is the exact inverse
  CHECK(r.records[0].iterations == 1);
  CHECK(r.orders == std::vector<int>{2});
}

TEST_CASE("uniform refinement regression at low frequency") {
  const StudyConfig cfg = wave_cfg(2.0 * M_PI, StudyKind::UniformH, 4);
  const StudyResult r = run_study(cfg);
  REQUIRE(r.records.size() == 4);
  check_common_invariants(r, cfg.tol);
  CHECK(iterations_of(r) == std::vector<int>{1, 1, 7, 11});
  CHECK(r.orders == std::vector<int>(4, 2));
  CHECK(r.nyquist == std::vector<bool>{false, true, true, true});

  SUBCASE("iteration counts level off on further refinement") {
    StudyConfig deep = cfg;
    deep.grids = 6;
    const StudyResult rd = run_study(deep);
    REQUIRE(rd.records.size() == 6);
    CHECK(iterations_of(rd) == std::vector<int>{1, 1, 7, 11, 13, 14});
    CHECK(std::abs(rd.records[5].iterations - rd.records[4].iterations) <= 2);
  }
}

TEST_CASE("re-assembled coarse systems cost at least as many iterations") {
  const StudyConfig cfg = wave_cfg(2.0 * M_PI, StudyKind::UniformH, 4);
  StudyConfig store = cfg;
  store.mode = CoarseOpMode::Store;
  const StudyResult rr = run_study(cfg);
  const StudyResult rs = run_study(store);
  REQUIRE(rs.records.size() == 4);
  check_common_invariants(rs, store.tol);
  CHECK(rs.records[3].iterations >= rr.records[3].iterations);
}

TEST_CASE("order sweep switches from splitting to enrichment when resolved") {
  StudyConfig cfg = wave_cfg(8.0 * M_PI, StudyKind::UniformP, 12);
  const StudyResult r = run_study(cfg);
  // splits to h = 1/8 (two elements per wavelength), then raises the order to
  // the cap and stops on its own before the requested grid budget
  REQUIRE(r.records.size() == 7);
  check_common_invariants(r, cfg.tol);
  CHECK(r.orders == std::vector<int>{2, 2, 2, 2, 3, 4, 5});
  CHECK(r.nyquist == std::vector<bool>{false, false, false, true, true, true, true});
  CHECK(r.p_phase_start == 3);
}

TEST_CASE("order sweep ends immediately once the cap is reached") {
  StudyConfig cfg = wave_cfg(2.0 * M_PI, StudyKind::UniformP, 10);
  cfg.p0 = 2;
  cfg.p_max = 2;
  const StudyResult r = run_study(cfg);
  // h = 1/2 resolves 2*pi and the order is already capped
  REQUIRE(r.records.size() == 2);
  CHECK(r.orders == std::vector<int>{2, 2});
  CHECK(r.p_phase_start == 1);
}

TEST_CASE("adaptive study terminates on its own at low frequency") {
  StudyConfig cfg = wave_cfg(2.0 * M_PI, StudyKind::HpAdaptive, 12);
  const StudyResult r = run_study(cfg);
  check_common_invariants(r, cfg.tol);
  CHECK(r.records.size() >= 3);
  CHECK(r.records.size() < 12);
  for (size_t g = 1; g < r.orders.size(); ++g) CHECK(r.orders[g] >= r.orders[g - 1]);
  CHECK(r.orders.back() >= 3);  // ended after enrichment rounds
}

TEST_CASE("adaptive study falls back to splitting when the order is capped") {
  StudyConfig cfg = wave_cfg(2.0 * M_PI, StudyKind::HpAdaptive, 5);
  cfg.p0 = 2;
  cfg.p_max = 2;
  const StudyResult r = run_study(cfg);
  REQUIRE(r.records.size() == 5);  // h-marks never stop, so the budget is spent
  check_common_invariants(r, cfg.tol);
  CHECK(r.orders == std::vector<int>(5, 2));
}

TEST_CASE("studies are deterministic") {
  StudyConfig cfg = wave_cfg(4.0 * M_PI, StudyKind::HpAdaptive, 4);
  const StudyResult a = run_study(cfg);
  const StudyResult b = run_study(cfg);
  REQUIRE(a.records.size() == b.records.size());
  for (size_t g = 0; g < a.records.size(); ++g) {
    CHECK(a.records[g].ndof == b.records[g].ndof);
    CHECK(a.records[g].iterations == b.records[g].iterations);
    CHECK(a.records[g].final_residual == b.records[g].final_residual);
    CHECK(a.records[g].dpg_eta == b.records[g].dpg_eta);
  }
  CHECK(a.orders == b.orders);
  CHECK(a.nyquist == b.nyquist);
  CHECK(a.eta_identity_rel == b.eta_identity_rel);
  CHECK(a.p_phase_start == b.p_phase_start);
}

TEST_CASE("each grid is solved from a zero start unless warm starts are on") {
  StudyConfig cfg = wave_cfg(2.0 * M_PI, StudyKind::UniformH, 4);
  std::vector<Mesh> meshes;
  cfg.on_grid = [&](int, const Assembled& a, const Vec&) { meshes.push_back(a.mesh); };
  const StudyResult r = run_study(cfg);
  REQUIRE(meshes.size() == 4);

  // replay the last grid by hand: same lineage, fresh solve from zero
  ProblemConfig pc = cfg.pc;
  pc.boundary_load = make_load(cfg.load, pc.omega, pc.wavespeed, pc.impedance);
  std::vector<DofMap> dms;
  std::vector<Assembled> systems;
  for (const Mesh& m : meshes) {
    systems.push_back(assemble_global(m, pc));
    dms.push_back(systems.back().dm);
  }
  const Hierarchy h =
      build_hierarchy(meshes, dms, systems.back().A, cfg.mode, nullptr, cfg.cycle);
  const MgResult mg = mg_solve(h, systems.back().rhs, cfg.tol, cfg.max_iter);

  CHECK(mg.iterations == r.records[3].iterations);
  CHECK(mg.history.back() == r.records[3].final_residual);
  double sum = 0;
  for (double v : error_indicators(systems.back(), mg.x)) sum += v;
  CHECK(std::sqrt(sum) == r.records[3].dpg_eta);
}

TEST_CASE("warm started adaptive study converges") {
  StudyConfig cfg;
  cfg.pc.omega = 4.0 * M_PI;
  cfg.load.kind = LoadSpec::Kind::GaussianBeam;
  cfg.kind = StudyKind::HpAdaptive;
  cfg.grids = 4;
  cfg.warm_start = true;
  const StudyResult r = run_study(cfg);
  check_common_invariants(r, cfg.tol);
}

TEST_CASE("frequency sweep aggregates one row per frequency") {
  StudyConfig cfg = wave_cfg(2.0 * M_PI, StudyKind::UniformH, 4);
  cfg.omegas = {2.0 * M_PI, 4.0 * M_PI};
  const OmegaSweepResult sweep = run_omega_sweep(cfg);
  REQUIRE(sweep.rows.size() == 2);
  REQUIRE(sweep.studies.size() == 2);
  CHECK(sweep.has_slope);
  CHECK(std::isfinite(sweep.slope));
  for (size_t i = 0; i < sweep.rows.size(); ++i) {
    CHECK(sweep.rows[i].omega == cfg.omegas[i]);
    int max_it = 0;
    for (const auto& rec : sweep.studies[i].records) max_it = std::max(max_it, rec.iterations);
    CHECK(sweep.rows[i].max_iterations == max_it);
  }

  SUBCASE("a single frequency yields no slope") {
    StudyConfig one = cfg;
    one.omegas.clear();
    const OmegaSweepResult s1 = run_omega_sweep(one);
    REQUIRE(s1.rows.size() == 1);
    CHECK(s1.rows[0].omega == one.pc.omega);
    CHECK(!s1.has_slope);
  }
}

TEST_CASE("configuration validation rejects out-of-range values") {
  const StudyConfig good = wave_cfg(2.0 * M_PI, StudyKind::UniformH, 2);
  CHECK_NOTHROW(good.validate());

  auto expect_reject = [&](auto&& tweak) {
    StudyConfig bad = good;
    tweak(bad);
    CHECK_THROWS_AS(bad.validate(), ConfigError);
  };
  expect_reject([](StudyConfig& c) { c.tol = 1.0; });
  expect_reject([](StudyConfig& c) { c.tol = 0.0; });
  expect_reject([](StudyConfig& c) { c.grids = 0; });
  expect_reject([](StudyConfig& c) { c.theta = 0.0; });
  expect_reject([](StudyConfig& c) { c.theta = 1.5; });
  expect_reject([](StudyConfig& c) { c.p0 = 0; });
  expect_reject([](StudyConfig& c) { c.p_max = c.p0 - 1; });
  expect_reject([](StudyConfig& c) { c.max_iter = 0; });
  expect_reject([](StudyConfig& c) { c.pc.omega = -1.0; });
  expect_reject([](StudyConfig& c) { c.pc.wavespeed = 0.0; });
  expect_reject([](StudyConfig& c) { c.pc.impedance = 0.0; });
  expect_reject([](StudyConfig& c) { c.omegas = {2.0 * M_PI, -1.0}; });

  SUBCASE("a zero plane-wave direction is rejected when the load is built") {
    StudyConfig bad = good;
    bad.load.dx = 0.0;
    bad.load.dy = 0.0;
    CHECK_THROWS_AS(run_study(bad), ConfigError);
  }
}
