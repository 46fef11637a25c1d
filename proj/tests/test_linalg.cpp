#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "lamtrans/linalg.hpp"

using namespace lamtrans;

namespace {

CMatrix from_rows(std::initializer_list<std::initializer_list<Complex>> rows) {
  const int d = static_cast<int>(rows.size());
  Eigen::MatrixXcd m(d, d);
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (Complex v : row) m(i, j++) = v;
    ++i;
  }
  return CMatrix(std::move(m));
}

}  // namespace

TEST_CASE("CMatrix construction enforces shape and finiteness") {
  Eigen::MatrixXcd rect(2, 3);
  rect.setZero();
  REQUIRE_THROWS_AS(CMatrix(rect), DimensionMismatch);

  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Zero(2, 2);
  bad(0, 1) = Complex(std::nan(""), 0.0);
  REQUIRE_THROWS_AS(CMatrix(bad), NonFiniteEntry);

  const CMatrix id = CMatrix::identity(3);
  REQUIRE(id.dim() == 3);
  REQUIRE(id(0, 0) == Complex(1.0, 0.0));
  REQUIRE(id(0, 1) == Complex(0.0, 0.0));
  REQUIRE(CMatrix::zero(2).max_abs() == 0.0);
}

TEST_CASE("CMatrix binary operations check dimension agreement") {
  const CMatrix a = CMatrix::identity(2);
  const CMatrix b = CMatrix::identity(3);
  REQUIRE_THROWS_AS(a + b, DimensionMismatch);
  REQUIRE_THROWS_AS(a - b, DimensionMismatch);
  REQUIRE_THROWS_AS(a * b, DimensionMismatch);

  const CMatrix s = 2.0 * a;
  REQUIRE(s(1, 1) == Complex(2.0, 0.0));
  REQUIRE((kI * a)(0, 0) == kI);
}

TEST_CASE("principal_sqrt squares back to the input") {
  SECTION("hermitian positive definite") {
    const CMatrix M = from_rows({{2.0, 1.0}, {1.0, 2.0}});
    const CMatrix S = principal_sqrt(M);
    REQUIRE((S * S - M).max_abs() < 1e-13);
    REQUIRE((S - S.adjoint()).max_abs() < 1e-13);
  }
  SECTION("non-hermitian with complex spectrum") {
    const CMatrix M = from_rows({{0.0, 1.0}, {-4.0, 0.0}});  // eigenvalues +-2i
    const CMatrix S = principal_sqrt(M);
    REQUIRE((S * S - M).max_abs() < 1e-12);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(S.m());
    for (int i = 0; i < 2; ++i) REQUIRE(es.eigenvalues()(i).real() >= -1e-13);
  }
  SECTION("scalar") {
    const CMatrix S = principal_sqrt(from_rows({{Complex(0.0, 2.0)}}));
    REQUIRE(std::abs(S(0, 0) - Complex(1.0, 1.0)) < 1e-14);
  }
}

TEST_CASE("principal_sqrt reports zero modes through the flag") {
  bool zero = false;
  const CMatrix M = from_rows({{1.0, 0.0}, {0.0, 0.0}});
  const CMatrix S = principal_sqrt(M, &zero);
  REQUIRE(zero);
  REQUIRE((S * S - M).max_abs() < 1e-14);

  zero = false;
  principal_sqrt(from_rows({{1.0, 0.0}, {0.0, 4.0}}), &zero);
  REQUIRE_FALSE(zero);
}

TEST_CASE("principal_sqrt rejects spectrum on the negative real axis") {
  REQUIRE_THROWS_AS(principal_sqrt(from_rows({{1.0, 0.0}, {0.0, -1.0}})),
                    NegativeRealEigenvalue);
  // Non-hermitian route: upper triangular with negative real eigenvalues.
  REQUIRE_THROWS_AS(principal_sqrt(from_rows({{-1.0, 1.0}, {0.0, -2.0}})),
                    NegativeRealEigenvalue);
}

TEST_CASE("principal_sqrt rejects defective matrices") {
  REQUIRE_THROWS_AS(principal_sqrt(from_rows({{0.0, 1.0}, {0.0, 0.0}})), NonDiagonalizable);
}

TEST_CASE("exp_iqx matches the scalar exponential and inverts exactly") {
  const CMatrix q = from_rows({{Complex(1.3, 0.4)}});
  const CMatrix e = exp_iqx(q, 0.7);
  REQUIRE(std::abs(e(0, 0) - std::exp(kI * Complex(1.3, 0.4) * 0.7)) < 1e-14);

  const CMatrix qh = from_rows({{2.0, 0.5}, {0.5, 1.0}});
  const CMatrix fwd = exp_iqx(qh, 1.9);
  const CMatrix bwd = exp_iqx(qh, -1.9);
  REQUIRE((fwd * bwd - CMatrix::identity(2)).max_abs() < 1e-13);

  REQUIRE(exp_iqx(qh, 0.0).max_abs() == 1.0);
  REQUIRE_THROWS_AS(exp_iqx(qh, std::numeric_limits<double>::infinity()), NonFiniteEntry);
}

TEST_CASE("exp_iqx refuses exponents that would overflow") {
  const CMatrix q = from_rows({{Complex(0.0, -800.0), 1.0}, {0.0, Complex(0.0, -801.0)}});
  REQUIRE_THROWS_AS(exp_iqx(q, 1.0), NonFiniteEntry);
}

TEST_CASE("block_solve recovers the exact solution of a well-posed system") {
  Eigen::MatrixXcd A(3, 3);
  A << Complex(4, 1), Complex(1, 0), Complex(0, 2), Complex(0, -1), Complex(5, 0),
      Complex(1, 1), Complex(2, 0), Complex(0, 0), Complex(6, -1);
  Eigen::MatrixXcd X(3, 2);
  X << Complex(1, 1), Complex(0, 3), Complex(-2, 0), Complex(1, -1), Complex(0.5, 0.5),
      Complex(2, 0);
  const Eigen::MatrixXcd B = A * X;
  const Eigen::MatrixXcd got = block_solve(A, B);
  REQUIRE((got - X).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("block_solve rejects singular and mismatched systems") {
  Eigen::MatrixXcd sing(2, 2);
  sing << 1.0, 2.0, 2.0, 4.0;
  REQUIRE_THROWS_AS(block_solve(sing, Eigen::MatrixXcd::Identity(2, 2)), SingularSystem);

  REQUIRE_THROWS_AS(
      block_solve(Eigen::MatrixXcd::Identity(2, 2), Eigen::MatrixXcd::Identity(3, 3)),
      DimensionMismatch);
}

TEST_CASE("bessel_j0 matches high-precision references") {
  struct Ref {
    double z, value;
  };
  // Frozen from a 30-digit evaluation of the series definition.
  const Ref refs[] = {
      {0.0, 1.0},
      {0.5, 0.93846980724081290423},
      {1.0, 0.76519768655796655145},
      {2.0, 0.22389077914123566805},
      {2.404825557695773, -1.2011950073676857534e-16},
      {5.0, -0.17759677131433830435},
      {7.5, 0.26633965788037839687},
      {8.0, 0.17165080713755390609},
      {8.5, 0.041939251842934503552},
      {12.0, 0.047689310796833536624},
      {50.0, 0.055812327669251815005},
      {123.4, -0.071525536719260193389},
      {1000.0, 0.024786686152420174561},
  };
  for (const Ref& r : refs) {
    INFO("z = " << r.z);
    REQUIRE(std::abs(bessel_j0(r.z) - r.value) < 1e-12);
  }
  REQUIRE(bessel_j0(-3.25) == bessel_j0(3.25));
  REQUIRE_THROWS_AS(bessel_j0(std::nan("")), NonFiniteEntry);
}
