#pragma once

#include <array>

#include "dpgmg/lac.hpp"
#include "dpgmg/mesh.hpp"
#include "dpgmg/problem.hpp"

namespace dpgmg {

/// Everything element-local the forms need: geometry, field order, enriched
/// test order, per-edge trace orders (the carrier order for hanging edges)
/// and boundary flags. Edges are indexed bottom, right, top, left; the edge
/// parameter always runs with the increasing coordinate.
struct ElemContext {
  Rect rect;
  int p;
  int p_test;
  std::array<int, 4> edge_p;
  std::array<bool, 4> edge_bdry;
};

/// Local trace enumeration: 4 corner values of p-hat, then per-edge p-hat
/// bubbles (modes 2..q_e), then per interior edge the u-hat-n Legendre
/// coefficients (modes 0..q_e). Boundary edges carry no u-hat-n unknowns:
/// the impedance relation u-hat-n = p-hat/Z - u0 is eliminated.
struct TraceLayout {
  std::array<int, 4> edge_p;
  std::array<bool, 4> bdry;
  std::array<int, 4> bubble_off;
  std::array<int, 4> uhat_off;  ///< -1 on boundary edges
  int n_phat = 0, n = 0;

  static TraceLayout make(const std::array<int, 4>& ep, const std::array<bool, 4>& bd);
};

struct SingularFieldBlock : std::runtime_error {
  explicit SingularFieldBlock(int pivot)
      : std::runtime_error("field normal block singular at pivot " + std::to_string(pivot)) {}
};

/// Element matrices of the least-squares system and its trace-condensed form.
/// Fields are ordered [u_x | u_y | p], each a tensor Legendre block of
/// (p+1)^2 coefficients.
struct ElementSystem {
  Mat G;     ///< test x test Gram in the adjoint graph inner product
  Mat B;     ///< test x field
  Mat Bhat;  ///< test x local trace
  Vec l;
  CholeskyFactor Gchol;
  Mat Acond;  ///< trace Schur complement (Hermitian PSD)
  Vec lcond;
  Mat recov_K;  ///< field = recov_c - recov_K * trace
  Vec recov_c;
  Vec rf;             ///< field block of the normal-equation right side
  double eta0_sq = 0;  ///< field-minimized residual at zero trace
  TraceLayout layout;
  int nfield = 0;
};

/// Test-space Gram matrix: ||i w q + div v||^2 + ||grad q + i w v||^2
/// + alpha (||q||^2 + ||v||^2) over the element, with n_quad Gauss points per
/// direction (0 means the default p_test + 2).
Mat element_gram(const ElemContext& ctx, const ProblemConfig& pc, int n_quad = 0);

/// Volume form B, skeleton form Bhat (impedance eliminated on boundary
/// edges) and load l.
void element_forms(const ElemContext& ctx, const ProblemConfig& pc, Mat& B, Mat& Bhat, Vec& l,
                   int n_quad = 0);

/// Static condensation of the field block of the normal equations.
/// Throws SingularFieldBlock if the field block is not positive definite.
ElementSystem element_system(const ElemContext& ctx, const ProblemConfig& pc, int n_quad = 0);

/// Residual indicator eta_K^2 = r^H G^{-1} r at the given local coefficients.
double element_eta2(const ElementSystem& es, const Vec& field, const Vec& trace);

}  // namespace dpgmg
