#include "dpgmg/shape.hpp"

#include <Eigen/LU>
#include <cmath>
#include <stdexcept>

namespace dpgmg::shape {

Quad1D gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n < 1");
  Quad1D q;
  q.x.resize(n);
  q.w.resize(n);
  // Newton on P_n from Chebyshev initial guesses; symmetric pairs mirrored.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pn = 0, dpn = 1;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pn = (n >= 2) ? p1 : (n == 1 ? x : 1.0);
      dpn = n * (x * pn - p0) / (x * x - 1.0);
      const double dx = pn / dpn;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    q.x[i] = -x;
    q.x[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dpn * dpn);
    q.w[i] = w;
    q.w[n - 1 - i] = w;
  }
  if (n % 2 == 1) q.x[n / 2] = 0.0;
  return q;
}

void legendre_all(int p, double s, double* val, double* der) {
  val[0] = 1.0;
  if (der) der[0] = 0.0;
  if (p == 0) return;
  val[1] = s;
  if (der) der[1] = 1.0;
  for (int k = 2; k <= p; ++k) {
    val[k] = ((2 * k - 1) * s * val[k - 1] - (k - 1) * val[k - 2]) / k;
    // P'_k = P'_{k-2} + (2k-1) P_{k-1}, stable at the endpoints.
    if (der) der[k] = der[k - 2] + (2 * k - 1) * val[k - 1];
  }
}

void h1_1d(int p, double s, double* val, double* der) {
  std::vector<double> lp(p + 1);
  legendre_all(p, s, lp.data());
  val[0] = 0.5 * (1.0 - s);
  val[1] = 0.5 * (1.0 + s);
  if (der) {
    der[0] = -0.5;
    der[1] = 0.5;
  }
  for (int k = 2; k <= p; ++k) {
    val[k] = (lp[k] - lp[k - 2]) / (2 * k - 1);
    if (der) der[k] = lp[k - 1];
  }
}

Eigen::MatrixXd eval_h1(int p, const std::vector<Pt>& pts) {
  const int n1 = p + 1;
  Eigen::MatrixXd out(n1 * n1, pts.size());
  std::vector<double> vx(n1), vy(n1);
  for (size_t q = 0; q < pts.size(); ++q) {
    h1_1d(p, pts[q].x, vx.data());
    h1_1d(p, pts[q].y, vy.data());
    for (int j = 0; j < n1; ++j)
      for (int i = 0; i < n1; ++i) out(j * n1 + i, q) = vx[i] * vy[j];
  }
  return out;
}

void eval_h1_grad(int p, const std::vector<Pt>& pts, Eigen::MatrixXd& dxi, Eigen::MatrixXd& deta) {
  const int n1 = p + 1;
  dxi.resize(n1 * n1, pts.size());
  deta.resize(n1 * n1, pts.size());
  std::vector<double> vx(n1), vy(n1), dx(n1), dy(n1);
  for (size_t q = 0; q < pts.size(); ++q) {
    h1_1d(p, pts[q].x, vx.data(), dx.data());
    h1_1d(p, pts[q].y, vy.data(), dy.data());
    for (int j = 0; j < n1; ++j)
      for (int i = 0; i < n1; ++i) {
        dxi(j * n1 + i, q) = dx[i] * vy[j];
        deta(j * n1 + i, q) = vx[i] * dy[j];
      }
  }
}

Eigen::MatrixXd eval_l2(int p, const std::vector<Pt>& pts) {
  const int n1 = p + 1;
  Eigen::MatrixXd out(n1 * n1, pts.size());
  std::vector<double> vx(n1), vy(n1);
  for (size_t q = 0; q < pts.size(); ++q) {
    legendre_all(p, pts[q].x, vx.data());
    legendre_all(p, pts[q].y, vy.data());
    for (int j = 0; j < n1; ++j)
      for (int i = 0; i < n1; ++i) out(j * n1 + i, q) = vx[i] * vy[j];
  }
  return out;
}

std::vector<HdivFn> hdiv_layout(int p) {
  std::vector<HdivFn> fns;
  fns.reserve(2 * p * (p + 1));
  for (int a = 0; a <= p; ++a)
    for (int b = 0; b < p; ++b)
      fns.push_back({0, a, b, a == 0 ? 3 : (a == 1 ? 1 : -1)});
  for (int a = 0; a < p; ++a)
    for (int b = 0; b <= p; ++b)
      fns.push_back({1, a, b, b == 0 ? 0 : (b == 1 ? 2 : -1)});
  return fns;
}

void eval_hdiv(int p, const std::vector<Pt>& pts, Eigen::MatrixXd& vx, Eigen::MatrixXd& vy,
               Eigen::MatrixXd& div) {
  const auto fns = hdiv_layout(p);
  const int n = static_cast<int>(fns.size());
  vx.setZero(n, pts.size());
  vy.setZero(n, pts.size());
  div.resize(n, pts.size());
  std::vector<double> hx(p + 1), hy(p + 1), dhx(p + 1), dhy(p + 1), lx(p + 1), ly(p + 1);
  for (size_t q = 0; q < pts.size(); ++q) {
    h1_1d(p, pts[q].x, hx.data(), dhx.data());
    h1_1d(p, pts[q].y, hy.data(), dhy.data());
    legendre_all(p, pts[q].x, lx.data());
    legendre_all(p, pts[q].y, ly.data());
    for (int f = 0; f < n; ++f) {
      const auto& d = fns[f];
      if (d.comp == 0) {
        vx(f, q) = hx[d.a] * ly[d.b];
        div(f, q) = dhx[d.a] * ly[d.b];
      } else {
        vy(f, q) = lx[d.a] * hy[d.b];
        div(f, q) = lx[d.a] * dhy[d.b];
      }
    }
  }
}

Eigen::MatrixXd edge_trace_h1(int p, int edge) {
  const int n1 = p + 1;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n1, n1 * n1);
  // Restriction of chi_i(xi) chi_j(eta): only the transverse mode index 0 or 1
  // (value 1 at the pinned coordinate) survives.
  for (int k = 0; k < n1; ++k) {
    switch (edge) {
      case 0: t(k, 0 * n1 + k) = 1.0; break;  // eta=-1: j=0, edge param xi
      case 2: t(k, 1 * n1 + k) = 1.0; break;  // eta=+1: j=1
      case 3: t(k, k * n1 + 0) = 1.0; break;  // xi=-1:  i=0, edge param eta
      case 1: t(k, k * n1 + 1) = 1.0; break;  // xi=+1:  i=1
      default: throw std::invalid_argument("edge_trace_h1: edge out of range");
    }
  }
  return t;
}

Eigen::MatrixXd reexpand_h1(int p, double a, double b) {
  const int n1 = p + 1;
  // Endpoint coefficients are values at t=-1,+1; the bubble remainder is
  // collocated at interior Chebyshev nodes (exact for polynomials).
  Eigen::MatrixXd out(n1, n1);
  std::vector<double> parent(n1);
  const int nb = p - 1;
  Eigen::MatrixXd vb(nb, nb);
  std::vector<double> child(n1);
  std::vector<double> tn(nb);
  for (int k = 0; k < nb; ++k) tn[k] = std::cos(M_PI * (k + 1) / (nb + 1));
  for (int k = 0; k < nb; ++k) {
    h1_1d(p, tn[k], child.data());
    for (int i = 0; i < nb; ++i) vb(k, i) = child[i + 2];
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  if (nb > 0) lu.compute(vb);
  for (int j = 0; j < n1; ++j) {
    h1_1d(p, -a + b, parent.data());
    const double f_lo = parent[j];
    h1_1d(p, a + b, parent.data());
    const double f_hi = parent[j];
    out(j, 0) = f_lo;
    out(j, 1) = f_hi;
    if (nb > 0) {
      Eigen::VectorXd rhs(nb);
      for (int k = 0; k < nb; ++k) {
        h1_1d(p, a * tn[k] + b, parent.data());
        const double fv = parent[j];
        h1_1d(p, tn[k], child.data());
        rhs[k] = fv - f_lo * child[0] - f_hi * child[1];
      }
      Eigen::VectorXd c = lu.solve(rhs);
      for (int i = 0; i < nb; ++i) out(j, i + 2) = c[i];
    }
  }
  return out;
}

Eigen::MatrixXd reexpand_legendre(int p, double a, double b) {
  const int n1 = p + 1;
  Eigen::MatrixXd out(n1, n1);
  // c_i = (2i+1)/2 * int P_j(a t + b) P_i(t) dt, exact with p+1 Gauss points.
  Quad1D q = gauss_legendre(n1);
  std::vector<double> pj(n1), pi(n1);
  Eigen::MatrixXd pv(n1, n1), cv(n1, n1);
  for (int k = 0; k < n1; ++k) {
    legendre_all(p, a * q.x[k] + b, pj.data());
    legendre_all(p, q.x[k], pi.data());
    for (int j = 0; j < n1; ++j) pv(j, k) = pj[j];
    for (int i = 0; i < n1; ++i) cv(i, k) = pi[i];
  }
  for (int j = 0; j < n1; ++j)
    for (int i = 0; i < n1; ++i) {
      double s = 0;
      for (int k = 0; k < n1; ++k) s += q.w[k] * pv(j, k) * cv(i, k);
      out(j, i) = s * (2 * i + 1) * 0.5;
    }
  return out;
}

ConstraintCoeffs constraint_coeffs(int p) {
  ConstraintCoeffs c;
  c.p = p;
  c.h1[0] = reexpand_h1(p, 0.5, -0.5);
  c.h1[1] = reexpand_h1(p, 0.5, 0.5);
  c.leg[0] = reexpand_legendre(p, 0.5, -0.5);
  c.leg[1] = reexpand_legendre(p, 0.5, 0.5);
  return c;
}

}  // namespace dpgmg::shape
