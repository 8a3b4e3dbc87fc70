#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace dpgmg::shape {

/// Gauss-Legendre rule on [-1,1], exact for degree 2n-1.
struct Quad1D {
  Eigen::VectorXd x, w;
};
Quad1D gauss_legendre(int n);

/// P_0..P_p at s; `der` (optional) receives derivatives.
void legendre_all(int p, double s, double* val, double* der = nullptr);

/// 1D hierarchical C^0 basis of order p on [-1,1]:
///   index 0: (1-s)/2, index 1: (1+s)/2,
///   index k>=2: integrated Legendre (P_k - P_{k-2})/(2k-1), zero at +-1.
void h1_1d(int p, double s, double* val, double* der = nullptr);

struct Pt {
  double x, y;
};

/// 2D tensor bases on [-1,1]^2, index = j*(p+1)+i (i: xi mode, j: eta mode).
/// Returned matrices are nfunc x npts.
Eigen::MatrixXd eval_h1(int p, const std::vector<Pt>& pts);
void eval_h1_grad(int p, const std::vector<Pt>& pts, Eigen::MatrixXd& dxi, Eigen::MatrixXd& deta);
Eigen::MatrixXd eval_l2(int p, const std::vector<Pt>& pts);

/// H(div) basis of exact-sequence order p: Q_{p,p-1} x Q_{p-1,p}, dim 2p(p+1).
/// x-component functions (chi_a(xi) P_b(eta), 0) followed by y-component
/// (0, P_a(xi) chi_b(eta)); a chi-index of 0/1 pins the normal trace to one
/// edge and it vanishes on the other three. Divergences lie in the tensor
/// Legendre span of degree p-1.
struct HdivFn {
  int comp;        ///< 0: x-component family, 1: y-component family
  int a, b;        ///< 1D mode indices (see class comment)
  int assoc_edge;  ///< 0 bottom, 1 right, 2 top, 3 left, -1 interior
};
std::vector<HdivFn> hdiv_layout(int p);
void eval_hdiv(int p, const std::vector<Pt>& pts, Eigen::MatrixXd& vx, Eigen::MatrixXd& vy,
               Eigen::MatrixXd& div);

/// Trace of the 2D H1 tensor basis on one master edge, as a selection matrix
/// T ((p+1) x (p+1)^2): row k holds the coefficient of edge mode k (in the
/// globally oriented edge parameter: +xi for horizontal, +eta for vertical
/// edges) for each 2D function. Functions vanishing on the edge give zero
/// columns. Edges: 0 bottom (eta=-1), 1 right, 2 top, 3 left.
Eigen::MatrixXd edge_trace_h1(int p, int edge);

/// Re-expansion of degree-p polynomials under s = a*t + b (image inside
/// [-1,1]): row j holds the child-basis coefficients of parent mode j.
Eigen::MatrixXd reexpand_h1(int p, double a, double b);
Eigen::MatrixXd reexpand_legendre(int p, double a, double b);

/// Parent-edge modes expanded on the two half edges (child 0 covers the
/// lower-coordinate half). h1[c](j,i): coefficient of child hierarchical mode
/// i in parent mode j; leg[c] likewise for the Legendre family.
struct ConstraintCoeffs {
  int p;
  std::array<Eigen::MatrixXd, 2> h1;
  std::array<Eigen::MatrixXd, 2> leg;
};
ConstraintCoeffs constraint_coeffs(int p);

}  // namespace dpgmg::shape
