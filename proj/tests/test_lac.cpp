#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dpgmg/lac.hpp"
#include "util.hpp"

using namespace dpgmg;
using testing::rel_err;
using testing::seeded_hpd;
using testing::seeded_mat;
using testing::seeded_vec;

TEST_CASE("cholesky of the identity is the identity") {
  const Mat i3 = Mat::Identity(3, 3);
  const CholeskyFactor f = hermitian_cholesky(i3);
  CHECK(rel_err(f.L, i3) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("cholesky of a diagonal matrix takes square roots") {
  Mat a = Mat::Zero(2, 2);
  a(0, 0) = 4.0;
  a(1, 1) = 9.0;
  const CholeskyFactor f = hermitian_cholesky(a);
  CHECK(std::abs(f.L(0, 0) - Cplx(2.0)) < 1e-14);
  CHECK(std::abs(f.L(1, 1) - Cplx(3.0)) < 1e-14);
  CHECK(std::abs(f.L(1, 0)) == 0.0);
}

TEST_CASE("cholesky factor reassembles the input") {
  const Mat a = seeded_hpd(8, 101);
  const CholeskyFactor f = hermitian_cholesky(a);
  CHECK(rel_err(f.L * f.L.adjoint(), a) < 1e-10);
}

TEST_CASE("cholesky rejects indefinite matrices with the failing pivot") {
  Mat a = Mat::Identity(3, 3);
  a(1, 1) = -1.0;
  CHECK_THROWS_AS(hermitian_cholesky(a), NotPositiveDefinite);
  try {
    hermitian_cholesky(a);
  } catch (const NotPositiveDefinite& e) {
    CHECK(e.pivot == 1);
  }
}

TEST_CASE("hermitian wrapper rejects non-hermitian input") {
  Mat a = Mat::Identity(3, 3);
  a(0, 1) = Cplx(0.0, 1.0);  // missing the conjugate mirror
  CHECK_THROWS_AS(HermitianDense{a}, DimensionMismatch);
  CHECK_NOTHROW(HermitianDense{seeded_hpd(5, 7)});
}

TEST_CASE("sparse hermitian verification") {
  const Mat h = seeded_hpd(6, 11);
  SparseHermitian a{SpMat(h.sparseView())};
  CHECK(a.verify(1e-12));
  Mat bad = h;
  bad(0, 1) += Cplx(0.1, 0.2);
  SparseHermitian b{SpMat(bad.sparseView())};
  CHECK_FALSE(b.verify(1e-12));
}

TEST_CASE("solve through the factor") {
  SUBCASE("identity factor returns the right-hand side") {
    const CholeskyFactor f = hermitian_cholesky(Mat::Identity(4, 4));
    const Vec b = seeded_vec(4, 3);
    CHECK((cholesky_solve(f, b) - b).norm() < 1e-14);
  }
  SUBCASE("diagonal system") {
    Mat a = Mat::Zero(2, 2);
    a(0, 0) = 2.0;
    a(1, 1) = 8.0;
    Vec b(2);
    b << 2.0, 8.0;
    const Vec x = cholesky_solve(hermitian_cholesky(a), b);
    CHECK(std::abs(x[0] - Cplx(1.0)) < 1e-14);
    CHECK(std::abs(x[1] - Cplx(1.0)) < 1e-14);
  }
  SUBCASE("b built from a known solution") {
    const Mat a = seeded_hpd(10, 21);
    const Vec ones = Vec::Ones(10);
    const Vec x = cholesky_solve(hermitian_cholesky(a), Vec(a * ones));
    CHECK((x - ones).norm() < 1e-10);
  }
  SUBCASE("dimension conflicts are rejected") {
    const CholeskyFactor f = hermitian_cholesky(Mat::Identity(4, 4));
    CHECK_THROWS_AS(cholesky_solve(f, Vec(seeded_vec(5, 1))), DimensionMismatch);
  }
}

TEST_CASE("forward substitution inverts the lower factor only") {
  const Mat a = seeded_hpd(6, 31);
  const CholeskyFactor f = hermitian_cholesky(a);
  const Mat b = seeded_mat(6, 2, 32);
  const Mat w = cholesky_forward(f, b);
  CHECK(rel_err(f.L * w, b) < 1e-12);
}

TEST_CASE("triple product") {
  const Mat ad = seeded_hpd(8, 41);
  const SparseHermitian a{SpMat(ad.sparseView())};

  SUBCASE("identity transfer returns the operator") {
    SpMat p(8, 8);
    p.setIdentity();
    const SparseHermitian out = triple_product(p, a);
    CHECK(rel_err(Mat(out.mat()), ad) < 1e-14);
  }
  SUBCASE("all-ones column sums every entry") {
    SpMat id(5, 5);
    id.setIdentity();
    SpMat p(5, 1);
    for (int i = 0; i < 5; ++i) p.insert(i, 0) = 1.0;
    const SparseHermitian out = triple_product(p, SparseHermitian{id});
    CHECK(out.n() == 1);
    CHECK(std::abs(Mat(out.mat())(0, 0) - Cplx(5.0)) < 1e-14);
  }
  SUBCASE("matches dense arithmetic") {
    const Mat pd = seeded_mat(8, 3, 42);
    const SpMat p = pd.sparseView();
    const SparseHermitian out = triple_product(p, a);
    CHECK(rel_err(Mat(out.mat()), Mat(pd.adjoint() * ad * pd)) < 1e-12);
    CHECK(out.verify(1e-14));  // exactly hermitian after symmetrization
  }
  SUBCASE("row mismatch is rejected") {
    const SpMat p = SpMat(seeded_mat(7, 3, 43).sparseView());
    CHECK_THROWS_AS(triple_product(p, a), DimensionMismatch);
  }
}

namespace {

LinOp dense_op(const Mat& a) {
  return [a](const Vec& x) { return Vec(a * x); };
}

LinOp identity_op() {
  return [](const Vec& x) { return x; };
}

}  // namespace

TEST_CASE("pcg with identity operator and preconditioner converges immediately") {
  const Vec b = seeded_vec(6, 51);
  const PcgResult r = pcg(identity_op(), identity_op(), b, 1e-12, 10);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  CHECK((r.x - b).norm() < 1e-12);
  REQUIRE(!r.history.empty());
  CHECK(r.history.front() == 1.0);
}

TEST_CASE("pcg with the exact inverse as preconditioner takes one iteration") {
  Mat a = Mat::Zero(3, 3);
  a(0, 0) = 1.0;
  a(1, 1) = 2.0;
  a(2, 2) = 3.0;
  const CholeskyFactor f = hermitian_cholesky(a);
  const Vec b = seeded_vec(3, 52);
  const PcgResult r =
      pcg(dense_op(a), [&](const Vec& v) { return cholesky_solve(f, v); }, b, 1e-10, 10);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  CHECK((a * r.x - b).norm() < 1e-10 * b.norm());
}

TEST_CASE("pcg matches a direct solve and terminates within the dimension") {
  const Mat a = seeded_hpd(20, 61);
  const Vec b = seeded_vec(20, 62);
  const PcgResult r = pcg(dense_op(a), identity_op(), b, 1e-10, 100);
  CHECK(r.converged);
  CHECK(r.iterations <= 20);
  const Vec x = cholesky_solve(hermitian_cholesky(a), b);
  CHECK((r.x - x).norm() < 1e-8 * x.norm());
}

TEST_CASE("pcg error decreases in the energy norm") {
  const Mat a = seeded_hpd(12, 71);
  const Vec b = seeded_vec(12, 72);
  const Vec x = cholesky_solve(hermitian_cholesky(a), b);
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 8; ++k) {
    const PcgResult r = pcg(dense_op(a), identity_op(), b, 1e-300, k);
    const Vec e = r.x - x;
    const double anorm2 = std::real(e.dot(Vec(a * e)));
    CHECK(anorm2 <= prev * (1.0 + 1e-12) + 1e-300);
    prev = anorm2;
  }
}

TEST_CASE("pcg reports the best iterate when the budget runs out") {
  const Mat a = seeded_hpd(30, 81);
  const Vec b = seeded_vec(30, 82);
  const PcgResult r = pcg(dense_op(a), identity_op(), b, 1e-14, 2);
  CHECK_FALSE(r.converged);
  CHECK((b - a * r.x).norm() <= b.norm());  // no worse than the zero guess
}

TEST_CASE("pcg flags nonpositive curvature") {
  const Mat a = -Mat::Identity(4, 4);
  const Vec b = seeded_vec(4, 91);
  CHECK_THROWS_AS(pcg(dense_op(a), identity_op(), b, 1e-10, 10), BreakdownNonpositiveCurvature);
}
