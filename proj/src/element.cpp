#include "dpgmg/element.hpp"

#include "dpgmg/shape.hpp"

namespace dpgmg {

using shape::Pt;

TraceLayout TraceLayout::make(const std::array<int, 4>& ep, const std::array<bool, 4>& bd) {
  TraceLayout lay;
  lay.edge_p = ep;
  lay.bdry = bd;
  int off = 4;
  for (int e = 0; e < 4; ++e) {
    lay.bubble_off[e] = off;
    off += ep[e] - 1;
  }
  lay.n_phat = off;
  for (int e = 0; e < 4; ++e) {
    if (bd[e]) {
      lay.uhat_off[e] = -1;
    } else {
      lay.uhat_off[e] = off;
      off += ep[e] + 1;
    }
  }
  lay.n = off;
  return lay;
}

namespace {

// Element outward normal along each edge against the global edge normal
// (+x for vertical, +y for horizontal edges): bottom/left run against it.
constexpr double kOutSign[4] = {-1.0, +1.0, +1.0, -1.0};

// Edge -> (corner at the low end of the edge parameter, corner at the high
// end); edges bottom, right, top, left; corners SW, SE, NE, NW.
constexpr int kEdgeLo[4] = {0, 1, 3, 0};
constexpr int kEdgeHi[4] = {1, 2, 2, 3};

std::vector<Pt> tensor_pts(const Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size());
  std::vector<Pt> pts(n * n);
  for (int b = 0; b < n; ++b)
    for (int a = 0; a < n; ++a) pts[b * n + a] = {x[a], x[b]};
  return pts;
}

std::vector<Pt> edge_pts(int edge, const Eigen::VectorXd& s) {
  std::vector<Pt> pts(s.size());
  for (int k = 0; k < s.size(); ++k) {
    switch (edge) {
      case 0: pts[k] = {s[k], -1.0}; break;
      case 1: pts[k] = {1.0, s[k]}; break;
      case 2: pts[k] = {s[k], 1.0}; break;
      default: pts[k] = {-1.0, s[k]}; break;
    }
  }
  return pts;
}

struct EdgeGeom {
  double len, nx, ny;
};

EdgeGeom edge_geom(const Rect& r, int edge) {
  if (edge == 0 || edge == 2) return {r.hx, 0.0, edge == 0 ? -1.0 : 1.0};
  return {r.hy, edge == 3 ? -1.0 : 1.0, 0.0};
}

void edge_point(const Rect& r, int edge, double s, double& x, double& y) {
  const double tx = r.x0 + r.hx * (s + 1.0) / 2.0;
  const double ty = r.y0 + r.hy * (s + 1.0) / 2.0;
  switch (edge) {
    case 0: x = tx; y = r.y0; break;
    case 1: x = r.x0 + r.hx; y = ty; break;
    case 2: x = tx; y = r.y0 + r.hy; break;
    default: x = r.x0; y = ty; break;
  }
}

// Test basis data at volume quadrature points, with physical scalings.
struct TestEval {
  int n_h1, n_hdiv, n;
  Eigen::MatrixXd qv, qx, qy;      // H1 values and physical gradients
  Eigen::MatrixXd vx, vy, vdiv;    // H(div) components and physical divergence
};

TestEval eval_test(int pt, const Rect& r, const std::vector<Pt>& pts) {
  TestEval te;
  te.n_h1 = (pt + 1) * (pt + 1);
  te.n_hdiv = 2 * pt * (pt + 1);
  te.n = te.n_h1 + te.n_hdiv;
  te.qv = shape::eval_h1(pt, pts);
  shape::eval_h1_grad(pt, pts, te.qx, te.qy);
  te.qx *= 2.0 / r.hx;
  te.qy *= 2.0 / r.hy;
  shape::eval_hdiv(pt, pts, te.vx, te.vy, te.vdiv);
  const auto fns = shape::hdiv_layout(pt);
  for (int f = 0; f < te.n_hdiv; ++f)
    te.vdiv.row(f) *= fns[f].comp == 0 ? 2.0 / r.hx : 2.0 / r.hy;
  return te;
}

}  // namespace

Mat element_gram(const ElemContext& ctx, const ProblemConfig& pc, int n_quad) {
  const int pt = ctx.p_test;
  const int nq1 = n_quad > 0 ? n_quad : pt + 2;
  const shape::Quad1D q = shape::gauss_legendre(nq1);
  const TestEval te = eval_test(pt, ctx.rect, tensor_pts(q.x));
  const Cplx iw(0.0, pc.omega);

  const int npts = nq1 * nq1;
  Eigen::VectorXd w(npts);
  for (int b = 0; b < nq1; ++b)
    for (int a = 0; a < nq1; ++a) w[b * nq1 + a] = q.w[a] * q.w[b] * ctx.rect.hx * ctx.rect.hy / 4.0;

  // Rows of the adjoint applied to each test function: s1 = i w q + div v,
  // (s2x, s2y) = grad q + i w v.
  Mat s1(te.n, npts), s2x(te.n, npts), s2y(te.n, npts);
  s1.topRows(te.n_h1) = iw * te.qv;
  s1.bottomRows(te.n_hdiv) = te.vdiv.cast<Cplx>();
  s2x.topRows(te.n_h1) = te.qx.cast<Cplx>();
  s2x.bottomRows(te.n_hdiv) = iw * te.vx;
  s2y.topRows(te.n_h1) = te.qy.cast<Cplx>();
  s2y.bottomRows(te.n_hdiv) = iw * te.vy;

  const auto wd = w.asDiagonal();
  Mat G = s1.conjugate() * wd * s1.transpose();
  G += s2x.conjugate() * wd * s2x.transpose();
  G += s2y.conjugate() * wd * s2y.transpose();
  Eigen::MatrixXd mass = te.qv * wd * te.qv.transpose();
  G.topLeftCorner(te.n_h1, te.n_h1) += pc.alpha * mass.cast<Cplx>();
  Eigen::MatrixXd vmass = te.vx * wd * te.vx.transpose() + te.vy * wd * te.vy.transpose();
  G.bottomRightCorner(te.n_hdiv, te.n_hdiv) += pc.alpha * vmass.cast<Cplx>();
  return Mat(0.5 * (G + G.adjoint()));
}

void element_forms(const ElemContext& ctx, const ProblemConfig& pc, Mat& B, Mat& Bhat, Vec& l,
                   int n_quad) {
  const int pt = ctx.p_test;
  const int p = ctx.p;
  const int nf1 = (p + 1) * (p + 1);
  const int nq1 = n_quad > 0 ? n_quad : pt + 2;
  const shape::Quad1D q = shape::gauss_legendre(nq1);
  const TestEval te = eval_test(pt, ctx.rect, tensor_pts(q.x));
  const Eigen::MatrixXd fv = shape::eval_l2(p, tensor_pts(q.x));
  const Cplx iw(0.0, pc.omega);
  const TraceLayout lay = TraceLayout::make(ctx.edge_p, ctx.edge_bdry);

  const int npts = nq1 * nq1;
  Eigen::VectorXd w(npts);
  for (int b = 0; b < nq1; ++b)
    for (int a = 0; a < nq1; ++a) w[b * nq1 + a] = q.w[a] * q.w[b] * ctx.rect.hx * ctx.rect.hy / 4.0;
  const auto wd = w.asDiagonal();

  // b(u, v) = (i w p, q) - (u, grad q) + (i w u, v) - (p, div v); fields
  // ordered [u_x | u_y | p].
  B.setZero(te.n, 3 * nf1);
  B.block(0, 0, te.n_h1, nf1) = (-(te.qx * wd * fv.transpose())).cast<Cplx>();
  B.block(0, nf1, te.n_h1, nf1) = (-(te.qy * wd * fv.transpose())).cast<Cplx>();
  B.block(0, 2 * nf1, te.n_h1, nf1) = iw * (te.qv * wd * fv.transpose()).cast<Cplx>();
  B.block(te.n_h1, 0, te.n_hdiv, nf1) = iw * (te.vx * wd * fv.transpose()).cast<Cplx>();
  B.block(te.n_h1, nf1, te.n_hdiv, nf1) = iw * (te.vy * wd * fv.transpose()).cast<Cplx>();
  B.block(te.n_h1, 2 * nf1, te.n_hdiv, nf1) = (-(te.vdiv * wd * fv.transpose())).cast<Cplx>();

  Bhat.setZero(te.n, lay.n);
  l.setZero(te.n);
  const double zinv = 1.0 / pc.impedance;
  for (int e = 0; e < 4; ++e) {
    const int qe = ctx.edge_p[e];
    const EdgeGeom g = edge_geom(ctx.rect, e);
    const auto epts = edge_pts(e, q.x);
    const Eigen::MatrixXd qv = shape::eval_h1(pt, epts);
    Eigen::MatrixXd evx, evy, ediv;
    shape::eval_hdiv(pt, epts, evx, evy, ediv);
    const Eigen::MatrixXd vn = g.nx * evx + g.ny * evy;
    std::vector<double> mu(qe + 1), leg(qe + 1);
    for (int k = 0; k < nq1; ++k) {
      const double s = q.x[k];
      const double wk = q.w[k] * g.len / 2.0;
      shape::h1_1d(qe, s, mu.data());
      shape::legendre_all(qe, s, leg.data());
      for (int m = 0; m <= qe; ++m) {
        const int col = m == 0   ? kEdgeLo[e]
                        : m == 1 ? kEdgeHi[e]
                                 : lay.bubble_off[e] + (m - 2);
        // <p-hat, v.n> over the element boundary
        for (int f = 0; f < te.n_hdiv; ++f) Bhat(te.n_h1 + f, col) += mu[m] * wk * vn(f, k);
        if (ctx.edge_bdry[e]) {
          // eliminated u-hat-n = p-hat/Z - u0 contributes Z^{-1} <p-hat, q>
          for (int f = 0; f < te.n_h1; ++f) Bhat(f, col) += zinv * mu[m] * wk * qv(f, k);
        }
      }
      if (!ctx.edge_bdry[e]) {
        // <u-hat-n, q> with u-hat-n stored against the global edge normal
        for (int m = 0; m <= qe; ++m)
          for (int f = 0; f < te.n_h1; ++f)
            Bhat(f, lay.uhat_off[e] + m) += kOutSign[e] * leg[m] * wk * qv(f, k);
      } else {
        double x, y;
        edge_point(ctx.rect, e, s, x, y);
        const Cplx u0 = pc.boundary_load(x, y, g.nx, g.ny);
        for (int f = 0; f < te.n_h1; ++f) l(f) += wk * u0 * qv(f, k);
      }
    }
  }
}

ElementSystem element_system(const ElemContext& ctx, const ProblemConfig& pc, int n_quad) {
  ElementSystem es;
  es.layout = TraceLayout::make(ctx.edge_p, ctx.edge_bdry);
  es.nfield = 3 * (ctx.p + 1) * (ctx.p + 1);
  es.G = element_gram(ctx, pc, n_quad);
  element_forms(ctx, pc, es.B, es.Bhat, es.l, n_quad);
  es.Gchol = hermitian_cholesky(es.G);

  const int nf = es.nfield, ntr = es.layout.n;
  Mat bb(es.G.rows(), nf + ntr);
  bb.leftCols(nf) = es.B;
  bb.rightCols(ntr) = es.Bhat;
  const Mat W = cholesky_forward(es.Gchol, bb);
  const Vec wl = cholesky_forward(es.Gchol, Mat(es.l)).col(0);
  Mat M = W.adjoint() * W;
  M = 0.5 * (M + M.adjoint());
  const Vec r = W.adjoint() * wl;

  const Mat Mff = M.topLeftCorner(nf, nf);
  const Mat Mft = M.topRightCorner(nf, ntr);
  const Mat Mtt = M.bottomRightCorner(ntr, ntr);
  es.rf = r.head(nf);
  CholeskyFactor fff;
  try {
    fff = hermitian_cholesky(Mff);
  } catch (const NotPositiveDefinite& e) {
    throw SingularFieldBlock(e.pivot);
  }
  es.recov_K = cholesky_solve(fff, Mft);
  es.recov_c = cholesky_solve(fff, Vec(es.rf));
  Mat ac = Mtt - Mft.adjoint() * es.recov_K;
  es.Acond = 0.5 * (ac + ac.adjoint());
  es.lcond = r.tail(ntr) - es.recov_K.adjoint() * es.rf;
  es.eta0_sq = wl.squaredNorm() - std::real(es.rf.dot(es.recov_c));
  return es;
}

double element_eta2(const ElementSystem& es, const Vec& field, const Vec& trace) {
  const Vec r = es.l - es.B * field - es.Bhat * trace;
  return cholesky_forward(es.Gchol, Mat(r)).squaredNorm();
}

}  // namespace dpgmg
