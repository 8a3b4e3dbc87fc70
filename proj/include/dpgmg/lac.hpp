#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpgmg {

using Cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using SpMat = Eigen::SparseMatrix<Cplx>;

/// Pivot `k` of the factorization was <= 0; the matrix is not HPD.
struct NotPositiveDefinite : std::runtime_error {
  int pivot;
  explicit NotPositiveDefinite(int k)
      : std::runtime_error("matrix not positive definite at pivot " + std::to_string(k)), pivot(k) {}
};

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

/// CG curvature p^H A p (or preconditioner product r^H M r) was <= 0.
struct BreakdownNonpositiveCurvature : std::runtime_error {
  explicit BreakdownNonpositiveCurvature(const std::string& what) : std::runtime_error(what) {}
};

/// Dense Hermitian matrix. Construction verifies Hermitian symmetry to a
/// relative Frobenius tolerance and stores the exact symmetrization.
class HermitianDense {
 public:
  explicit HermitianDense(Mat a, double tol = 1e-12);
  int n() const { return static_cast<int>(a_.rows()); }
  const Mat& mat() const { return a_; }

 private:
  Mat a_;
};

/// Sparse Hermitian matrix, both triangles stored (CSC). `verify` checks
/// numerical Hermitian symmetry entry-wise to a relative tolerance.
class SparseHermitian {
 public:
  SparseHermitian() = default;
  explicit SparseHermitian(SpMat a) : a_(std::move(a)) { a_.makeCompressed(); }
  int n() const { return static_cast<int>(a_.rows()); }
  const SpMat& mat() const { return a_; }
  bool verify(double tol = 1e-12) const;
  Vec apply(const Vec& x) const { return a_ * x; }

 private:
  SpMat a_;
};

/// Lower-triangular factor L of A = L L^H.
struct CholeskyFactor {
  Mat L;
  int n() const { return static_cast<int>(L.rows()); }
};

/// Unblocked complex Cholesky. Throws NotPositiveDefinite with the failing
/// pivot index; pivots must exceed a scaled floor to count as positive.
CholeskyFactor hermitian_cholesky(const Mat& a);

/// Solves A x = b given A = L L^H. Throws DimensionMismatch on size conflict.
Vec cholesky_solve(const CholeskyFactor& f, const Vec& b);
Mat cholesky_solve(const CholeskyFactor& f, const Mat& b);

/// Forward substitution only: returns L^{-1} B.
Mat cholesky_forward(const CholeskyFactor& f, const Mat& b);

/// P^H A P with enforced Hermitian symmetrization of the result.
SparseHermitian triple_product(const SpMat& p, const SparseHermitian& a);

using LinOp = std::function<Vec(const Vec&)>;

struct PcgResult {
  Vec x;
  std::vector<double> history;  ///< relative true-residual norms, history[0] = 1
  int iterations = 0;
  bool converged = false;
};

/// Preconditioned CG for Hermitian positive definite A, M. Starts from the
/// zero vector. Terminates when the relative l2 norm of the unpreconditioned
/// residual drops to <= tol; the recurrence residual is replaced by a freshly
/// computed one every 50 iterations. On max_iter the best iterate seen is
/// returned with converged = false. Throws BreakdownNonpositiveCurvature if
/// p^H A p <= 0 or r^H M r <= 0.
PcgResult pcg(const LinOp& a, const LinOp& m, const Vec& b, double tol, int max_iter);

}  // namespace dpgmg
