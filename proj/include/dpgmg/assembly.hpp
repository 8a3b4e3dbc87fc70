#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dpgmg/element.hpp"
#include "dpgmg/mesh.hpp"
#include "dpgmg/problem.hpp"

namespace dpgmg {

/// Global skeleton unknowns: p-hat vertex values at active non-hanging
/// vertices (vertex id order), then p-hat bubbles per regular edge (edge id
/// order, modes 2..q), then u-hat-n coefficients per regular interior edge
/// (modes 0..q). Hanging vertices and constrained edges carry no unknowns;
/// their would-be counts enter ndof_reported once.
struct DofMap {
  Skeleton skel;
  std::vector<int> vert_dof;      ///< vertex -> dof or -1
  std::vector<int> edge_bubble;   ///< edge -> first bubble dof or -1
  std::vector<int> edge_uhat;     ///< edge -> first u-hat-n dof or -1
  std::vector<int> hang_carrier;  ///< hanging vertex -> its regular carrier edge
  int ndof = 0;
  std::int64_t ndof_reported = 0;

  struct Support {
    enum Kind : char { Vertex, Bubble, Uhat } kind;
    int entity;
    int mode;
  };
  std::vector<Support> support;  ///< per dof
};

DofMap build_dofmap(const Mesh& m);

/// Constrained-approximation rows of one element: local trace coefficient i
/// equals sum of coeff * global dof over rows[i]. Regular entities give
/// identity rows; hanging corners and constrained edges expand through the
/// carrier's modes. Not thread-safe (shared coefficient cache).
using ConnRows = std::vector<std::vector<std::pair<int, double>>>;
ConnRows element_conn(const Mesh& m, const DofMap& dm, int elem);

ElemContext elem_context(const Mesh& m, const DofMap& dm, int elem, const ProblemConfig& pc);

/// Worker count: DPGMG_THREADS if set (>= 1), else hardware concurrency.
int thread_count();

struct Assembled {
  Mesh mesh;
  ProblemConfig pc;
  DofMap dm;
  std::vector<int> active;
  std::vector<ElemContext> ctx;
  std::vector<ElementSystem> sys;
  std::vector<ConnRows> conn;
  SparseHermitian A;
  Vec rhs;
  double assemble_seconds = 0;
};

/// Condensed global trace system. Element systems are computed in parallel;
/// the scatter runs serially in element id order, so results are bitwise
/// reproducible for any thread count.
Assembled assemble_global(const Mesh& m, const ProblemConfig& pc, int n_quad = 0);

/// Local trace coefficients of element k from the global solution.
Vec local_trace(const ConnRows& rows, int n_local, const Vec& xhat);

/// Per-element squared residual indicators eta_K^2 at the given solution.
std::vector<double> error_indicators(const Assembled& a, const Vec& xhat);

/// Squared residual norm of the whole solution in the inverse-Gram metric,
/// accumulated globally in one pass; the broken test space decouples it into
/// element blocks, so it equals the sum of error_indicators to roundoff.
double global_eta2(const Assembled& a, const Vec& xhat);

/// Same total computed through the condensed quadratic form
/// sum eta0^2 + x^H A x - 2 Re(x^H b); equals sum of error_indicators to
/// roundoff for any x, but loses relative accuracy once eta^2 is far below
/// the quadratic terms (catastrophic cancellation).
double global_eta2_quadratic(const Assembled& a, const Vec& xhat);

/// Per-element field coefficients [u_x | u_y | p] via the recovery maps.
std::vector<Vec> recover_fields(const Assembled& a, const Vec& xhat);

/// Absolute L2 error of (u, p) against the exact plane wave.
double field_l2_error(const Assembled& a, const std::vector<Vec>& fields, const PlaneWave& pw);

}  // namespace dpgmg
