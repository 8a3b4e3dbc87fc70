#include "dpgmg/lac.hpp"

#include <cmath>

namespace dpgmg {

HermitianDense::HermitianDense(Mat a, double tol) : a_(std::move(a)) {
  if (a_.rows() != a_.cols()) throw DimensionMismatch("HermitianDense: matrix not square");
  const double nrm = a_.norm();
  const double dev = (a_ - a_.adjoint().eval()).norm();
  if (nrm > 0 && dev > tol * nrm)
    throw DimensionMismatch("HermitianDense: matrix not Hermitian (relative deviation " +
                            std::to_string(dev / nrm) + ")");
  a_ = 0.5 * (a_ + a_.adjoint().eval());
}

bool SparseHermitian::verify(double tol) const {
  if (a_.rows() != a_.cols()) return false;
  SpMat d = SpMat(a_.adjoint()) - a_;
  const double nrm = a_.norm();
  return nrm == 0.0 ? d.norm() == 0.0 : d.norm() <= tol * nrm;
}

CholeskyFactor hermitian_cholesky(const Mat& a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("hermitian_cholesky: matrix not square");
  const int n = static_cast<int>(a.rows());
  Mat l = Mat::Zero(n, n);
  // Pivot floor scaled by the largest diagonal entry; anything at or below it
  // is treated as a nonpositive pivot.
  double dmax = 0.0;
  for (int i = 0; i < n; ++i) dmax = std::max(dmax, std::abs(a(i, i).real()));
  const double floor = dmax * 1e-300;
  for (int j = 0; j < n; ++j) {
    Cplx s = a(j, j);
    for (int k = 0; k < j; ++k) s -= l(j, k) * std::conj(l(j, k));
    const double d = s.real();
    if (!(d > floor) || !std::isfinite(d)) throw NotPositiveDefinite(j);
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      Cplx t = a(i, j);
      for (int k = 0; k < j; ++k) t -= l(i, k) * std::conj(l(j, k));
      l(i, j) = t / ljj;
    }
  }
  return CholeskyFactor{std::move(l)};
}

Mat cholesky_forward(const CholeskyFactor& f, const Mat& b) {
  if (f.L.rows() != b.rows()) throw DimensionMismatch("cholesky_forward: size conflict");
  return f.L.triangularView<Eigen::Lower>().solve(b);
}

Mat cholesky_solve(const CholeskyFactor& f, const Mat& b) {
  if (f.L.rows() != b.rows()) throw DimensionMismatch("cholesky_solve: size conflict");
  Mat y = f.L.triangularView<Eigen::Lower>().solve(b);
  return f.L.adjoint().triangularView<Eigen::Upper>().solve(y);
}

Vec cholesky_solve(const CholeskyFactor& f, const Vec& b) {
  Mat x = cholesky_solve(f, Mat(b));
  return Vec(x.col(0));
}

SparseHermitian triple_product(const SpMat& p, const SparseHermitian& a) {
  if (p.rows() != a.n()) throw DimensionMismatch("triple_product: P rows != A dim");
  SpMat t = SpMat(p.adjoint()) * a.mat() * p;
  SpMat sym = 0.5 * (t + SpMat(t.adjoint()));
  return SparseHermitian(std::move(sym));
}

PcgResult pcg(const LinOp& a, const LinOp& m, const Vec& b, double tol, int max_iter) {
  const double bnorm = b.norm();
  PcgResult out;
  out.x = Vec::Zero(b.size());
  out.history.push_back(1.0);
  if (bnorm == 0.0) {
    out.converged = true;
    return out;
  }
  Vec x = Vec::Zero(b.size());
  Vec r = b;
  Vec z = m(r);
  double rho = std::real(r.dot(z));
  if (rho <= 0.0) throw BreakdownNonpositiveCurvature("pcg: r^H M r <= 0");
  Vec p = z;
  double best_rel = 1.0;
  Vec best_x = x;
  for (int it = 1; it <= max_iter; ++it) {
    Vec q = a(p);
    const double pap = std::real(p.dot(q));
    if (pap <= 0.0) throw BreakdownNonpositiveCurvature("pcg: p^H A p <= 0");
    const double alpha = rho / pap;
    x += alpha * p;
    if (it % 50 == 0)
      r = b - a(x);
    else
      r -= alpha * q;
    const double rel = r.norm() / bnorm;
    out.history.push_back(rel);
    out.iterations = it;
    if (rel < best_rel) {
      best_rel = rel;
      best_x = x;
    }
    if (rel <= tol) {
      out.x = x;
      out.converged = true;
      return out;
    }
    z = m(r);
    const double rho_next = std::real(r.dot(z));
    if (rho_next <= 0.0) throw BreakdownNonpositiveCurvature("pcg: r^H M r <= 0");
    p = z + (rho_next / rho) * p;
    rho = rho_next;
  }
  out.x = best_x;
  out.converged = false;
  return out;
}

}  // namespace dpgmg
