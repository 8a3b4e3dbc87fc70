#pragma once

#include <optional>

#include "dpgmg/assembly.hpp"

namespace dpgmg {

struct MissingStoredSystem : std::runtime_error {
  MissingStoredSystem() : std::runtime_error("store mode requires retained coarse systems") {}
};

struct SingularInteriorBlock : std::runtime_error {
  explicit SingularInteriorBlock(int elem)
      : std::runtime_error("interior block of coarse element " + std::to_string(elem) +
                           " not positive definite") {}
};

struct CycleConfig {
  int pre_smooth = 1;
  int post_smooth = 1;
  double damping = 0.0;  ///< 0 = automatic: 1 / (patch interaction coloring number)
  enum Bottom : char { SmoothOnly, ExactSolve } bottom = SmoothOnly;
};

enum class CoarseOpMode { Restrict, Store };

/// Overlapping additive Schwarz on one system: cached dense factors of the
/// principal submatrices over the given index sets; one application is
/// damping * sum of patch solves (fixed order, deterministic).
struct PatchSmoother {
  std::vector<std::vector<int>> dofs;
  std::vector<CholeskyFactor> fac;
  double damping = 1.0;
  Vec apply(const Vec& r) const;
};

/// Condensation pair between a coarse mesh and the next-finer mesh: fine
/// skeleton DOFs off the coarse skeleton are interior to exactly one coarse
/// element and are eliminated by a per-element dense Schur complement.
struct MacroPair {
  std::vector<int> macro_of_fine;  ///< fine dof -> macro index, -1 if interior
  std::vector<int> fine_of_macro;  ///< macro index -> fine dof
  int n_macro = 0;

  struct Block {
    int coarse_elem;
    std::vector<int> idof;  ///< interior fine dofs of this coarse element
    std::vector<int> mrow;  ///< macro indices coupled to the block
    CholeskyFactor aii;
    Mat w;  ///< aii^{-1} A(idof, mrow)
  };
  std::vector<Block> blocks;

  SparseHermitian amacro;  ///< Schur complement on the macro DOFs
  SpMat pinc;              ///< natural inclusion, n_macro x coarse ndof
  PatchSmoother smoother;  ///< on macro DOFs, anchored at coarse-mesh vertices
};

MacroPair build_macro_pair(const Mesh& coarse, const DofMap& cdm, const Mesh& fine,
                           const DofMap& fdm, const SparseHermitian& afine,
                           double damping_override = 0.0);

/// Stage-1 harmonic-extension prolongation (fine ndof x n_macro) and the
/// full two-stage transfer (fine ndof x coarse ndof).
SpMat stage1_prolongation(const MacroPair& pair, int n_fine);
SpMat total_prolongation(const MacroPair& pair, int n_fine);

/// Coarse operator: restrict = pinc^H amacro pinc; store = the retained
/// system assembled when the coarse mesh was the active grid.
SparseHermitian coarse_operator(CoarseOpMode mode, const MacroPair& pair,
                                const SparseHermitian* stored);

struct Hierarchy {
  std::vector<SparseHermitian> a;  ///< one system per mesh, 0 = coarsest
  std::vector<MacroPair> pairs;    ///< pairs[k]: mesh k <- mesh k+1
  PatchSmoother bottom_smoother;
  std::optional<CholeskyFactor> bottom_exact;
  CycleConfig cycle;
  int levels() const { return static_cast<int>(a.size()); }
};

/// Builds the multilevel structure over the mesh lineage. `stored` must hold
/// one system per mesh in store mode (ignored in restrict mode except the
/// finest, which always comes from `afine`).
Hierarchy build_hierarchy(const std::vector<Mesh>& meshes, const std::vector<DofMap>& dms,
                          const SparseHermitian& afine, CoarseOpMode mode,
                          const std::vector<SparseHermitian>* stored, const CycleConfig& cc);

/// One V-cycle preconditioner application on the finest residual. The
/// operator is Hermitian positive definite for equal pre/post smoothing.
Vec v_cycle(const Hierarchy& h, const Vec& r);

struct MgResult {
  Vec x;
  int iterations = 0;
  std::vector<double> history;
  bool converged = false;
};

/// PCG on the finest system with the V-cycle preconditioner; zero initial
/// guess unless x0 is given (then the correction system is solved from zero).
MgResult mg_solve(const Hierarchy& h, const Vec& rhs, double tol = 1e-7, int max_iter = 500,
                  const Vec* x0 = nullptr);

/// Smoother construction shared by the macro levels and the bottom level:
/// index sets are the system DOFs whose supports lie inside vertex patches
/// of the anchor mesh. `sys_of_dof` maps a fine-skeleton dof to its row in
/// `s` (identity for the bottom level, macro classification otherwise).
PatchSmoother build_patch_smoother(const Mesh& anchor, const Skeleton& ask, const Mesh& span_mesh,
                                   const DofMap& span_dm, const std::vector<int>& sys_of_dof,
                                   const SparseHermitian& s, double damping_override);

}  // namespace dpgmg
