#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dpgmg/assembly.hpp"
#include "dpgmg/hierarchy.hpp"

namespace dpgmg {

enum class StudyKind { UniformH, UniformP, HpAdaptive };

/// Boundary-load recipe. Studies keep the recipe rather than a closure so a
/// frequency sweep can rebuild the load for each omega.
struct LoadSpec {
  enum class Kind { PlaneWaveDir, GaussianBeam, Zero };
  Kind kind = Kind::PlaneWaveDir;
  double dx = 0.6, dy = 0.8;        ///< plane-wave direction (normalized on use)
  double center = 0.5, waist = 0.1; ///< beam geometry on the x = 0 face
};

BoundaryLoad make_load(const LoadSpec& ls, double omega, double wavespeed, double impedance);

struct StudyConfig {
  ProblemConfig pc;            ///< omega, impedance, alpha, delta_p, wavespeed
  LoadSpec load;
  StudyKind kind = StudyKind::UniformH;
  std::vector<double> omegas;  ///< sweep frequencies; empty -> {pc.omega}
  int grids = 4;               ///< cap on the number of grids visited (one record each)
  double theta = 0.5;          ///< Dörfler bulk fraction
  CycleConfig cycle;
  CoarseOpMode mode = CoarseOpMode::Restrict;
  double tol = 1e-7;
  int p0 = 2;
  int p_max = 5;
  bool warm_start = false;     ///< hp only: previous solution mapped through the transfer
  int max_iter = 1000;

  /// Observer called after each solved grid (snapshots, progress); not part
  /// of the config file format.
  std::function<void(int grid, const Assembled& a, const Vec& xhat)> on_grid;

  void validate() const;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConvergenceRecord {
  int grid = 0;
  std::int64_t ndof = 0;
  int iterations = 0;
  double final_residual = 0;  ///< relative to the zero-guess right-hand side
  double dpg_eta = 0;         ///< sqrt(sum of squared element indicators)
  double assembly_s = 0;
  double solve_s = 0;         ///< preconditioner build + PCG
};

struct StudyResult {
  std::vector<ConvergenceRecord> records;
  /// Per grid: |sum_K eta_K^2 - globally accumulated residual^2| / global.
  std::vector<double> eta_identity_rel;
  std::vector<int> orders;            ///< max active element order per grid
  std::vector<bool> nyquist;          ///< grid has >= 2 elements per wavelength
  int p_phase_start = -1;             ///< uniform_p: first Nyquist-resolved grid
  bool all_converged = true;
};

/// Uniform h-refinement: exactly cfg.grids grids, each solved from zero.
StudyResult run_uniform_h(const StudyConfig& cfg);

/// Uniform h until every element satisfies the Nyquist rule (>= 2 elements
/// per wavelength), then uniform p-increments until p_max; cfg.grids caps the
/// total number of grids.
StudyResult run_uniform_p(const StudyConfig& cfg);

/// Dörfler marking on the squared indicators; marked elements h-refine while
/// their longest edge is >= half a wavelength, otherwise p-refine (falling
/// back to h at p_max). Ends one grid after a marking round requests no
/// h-refinements, or at the cfg.grids cap.
StudyResult run_hp_adaptive(const StudyConfig& cfg);

StudyResult run_study(const StudyConfig& cfg);

struct OmegaSweepRow {
  double omega = 0;
  int max_iterations = 0;
};

struct OmegaSweepResult {
  std::vector<OmegaSweepRow> rows;
  std::vector<StudyResult> studies;
  bool has_slope = false;  ///< requires >= 2 frequencies
  double slope = 0;        ///< least-squares slope of log(max_iterations) vs log(omega)
};

/// Runs the configured study once per frequency in cfg.omegas and fits the
/// iteration growth.
OmegaSweepResult run_omega_sweep(const StudyConfig& cfg);

/// L2 error of the recovered fields (u_x, u_y, p) against an exact plane
/// wave, integrated with two extra quadrature points per direction.
double plane_wave_l2_error(const Assembled& a, const Vec& xhat, const PlaneWave& pw);

}  // namespace dpgmg
