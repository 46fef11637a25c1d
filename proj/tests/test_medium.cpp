#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lamtrans/medium.hpp"

using namespace lamtrans;

namespace {

CMatrix diag(std::initializer_list<double> d) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<long>(d.size()),
                                              static_cast<long>(d.size()));
  long i = 0;
  for (double v : d) m(i, i) = v, ++i;
  return CMatrix(std::move(m));
}

Layer make_layer(CMatrix a_sq, CMatrix gamma_sq) {
  Layer lay;
  lay.A_sq = std::move(a_sq);
  lay.Gamma_sq = std::move(gamma_sq);
  return lay;
}

MediumStack two_layer_stack() {
  std::vector<Layer> layers;
  layers.push_back(make_layer(diag({1.0, 4.0}), diag({0.25, 0.5})));
  layers.push_back(make_layer(diag({2.0, 3.0}), diag({0.0, 0.0})));
  return build_medium(2, {0.0, 1.5}, std::move(layers));
}

// Distinct blocks per slot so row/column placement in the assembled matrix
// is unambiguous.
CouplingSet tagged_coupling() {
  CouplingSet cs;
  cs.boundary = BoundaryQuad{diag({1.0, 1.0}), diag({2.0, 2.0}), diag({3.0, 3.0}),
                             diag({4.0, 4.0})};
  InterfaceCoupling ic;
  for (int j = 0; j < 2; ++j) {
    for (int m = 0; m < 2; ++m) {
      const double tag = 10.0 * (j + 1) + (m + 1);
      ic.alpha[j][m] = diag({tag + 0.1, tag + 0.1});
      ic.beta[j][m] = diag({tag + 0.2, tag + 0.2});
      ic.gamma[j][m] = diag({tag + 0.3, tag + 0.3});
      ic.delta[j][m] = diag({tag + 0.4, tag + 0.4});
    }
  }
  cs.interfaces.push_back(ic);
  return cs;
}

}  // namespace

TEST_CASE("SpectralParameter admits only finite positive values") {
  REQUIRE(SpectralParameter(2.5).lambda == 2.5);
  REQUIRE_THROWS_AS(SpectralParameter(0.0), BadConfig);
  REQUIRE_THROWS_AS(SpectralParameter(-1.0), BadConfig);
  REQUIRE_THROWS_AS(SpectralParameter(std::nan("")), BadConfig);
}

TEST_CASE("build_medium validates geometry") {
  std::vector<Layer> one = {make_layer(diag({1.0}), diag({0.0}))};
  REQUIRE_THROWS_AS(build_medium(0, {0.0}, one), BadConfig);
  REQUIRE_THROWS_AS(build_medium(1, {}, one), BadConfig);
  REQUIRE_THROWS_AS(
      build_medium(1, {0.0, 0.0},
                   {make_layer(diag({1.0}), diag({0.0})), make_layer(diag({1.0}), diag({0.0}))}),
      NonIncreasingInterfaces);
  // Layer count must be interface count.
  REQUIRE_THROWS_AS(build_medium(1, {0.0, 1.0}, one), DimensionMismatch);
}

TEST_CASE("build_medium enforces layer matrix constraints") {
  // A^2 must be strictly positive-definite.
  REQUIRE_THROWS_AS(build_medium(2, {0.0}, {make_layer(diag({1.0, 0.0}), diag({0.0, 0.0}))}),
                    NotPositiveDefinite);
  REQUIRE_THROWS_AS(build_medium(2, {0.0}, {make_layer(diag({1.0, -1.0}), diag({0.0, 0.0}))}),
                    NotPositiveDefinite);
  // Gamma^2 may be semidefinite but not indefinite, and must be Hermitian.
  REQUIRE_THROWS_AS(build_medium(2, {0.0}, {make_layer(diag({1.0, 1.0}), diag({1.0, -0.5}))}),
                    NotPositiveDefinite);
  Eigen::MatrixXcd skew = Eigen::MatrixXcd::Zero(2, 2);
  skew(0, 1) = 1.0;
  REQUIRE_THROWS_AS(build_medium(2, {0.0}, {make_layer(diag({1.0, 1.0}), CMatrix(skew))}),
                    NotPositiveDefinite);
  // Wrong block dimension.
  REQUIRE_THROWS_AS(build_medium(3, {0.0}, {make_layer(diag({1.0, 1.0}), diag({0.0, 0.0}))}),
                    DimensionMismatch);
}

TEST_CASE("build_medium flags semidefinite Gamma and caches the inverse") {
  const MediumStack medium = two_layer_stack();
  REQUIRE_FALSE(medium.layer(1).gamma_semidefinite);
  REQUIRE(medium.layer(2).gamma_semidefinite);
  REQUIRE((medium.layer(1).A_sq_inv.m() * medium.layer(1).A_sq.m() -
           Eigen::MatrixXcd::Identity(2, 2))
              .cwiseAbs()
              .maxCoeff() < 1e-14);
}

TEST_CASE("MediumStack geometry queries") {
  const MediumStack medium = two_layer_stack();
  REQUIRE(medium.r() == 2);
  REQUIRE(medium.n() == 1);
  REQUIRE(medium.num_layers() == 2);
  REQUIRE(medium.l0() == 0.0);
  REQUIRE(medium.ln() == 1.5);
  REQUIRE(medium.left_endpoint(1) == 0.0);
  REQUIRE(medium.left_endpoint(2) == 1.5);
  REQUIRE(medium.min_layer_thickness() == 1.5);

  // Interface points resolve rightward; the boundary precondition is hard.
  REQUIRE(medium.layer_of(0.0) == 1);
  REQUIRE(medium.layer_of(1.4999) == 1);
  REQUIRE(medium.layer_of(1.5) == 2);
  REQUIRE(medium.layer_of(100.0) == 2);
  REQUIRE_THROWS_AS(medium.layer_of(-1e-9), BadConfig);

  // Smallest eigenvalue of any A^2 is 1.0 here.
  REQUIRE(medium.min_speed() == Catch::Approx(1.0));

  std::vector<Layer> one = {make_layer(diag({4.0}), diag({0.0}))};
  const MediumStack single = build_medium(1, {0.0}, std::move(one));
  REQUIRE(std::isinf(single.min_layer_thickness()));
  REQUIRE(single.min_speed() == Catch::Approx(2.0));
}

TEST_CASE("CouplingSet validation catches shape mismatches") {
  CouplingSet cs = tagged_coupling();
  REQUIRE_NOTHROW(cs.validate(2, 1));
  REQUIRE_THROWS_AS(cs.validate(3, 1), DimensionMismatch);
  REQUIRE_THROWS_AS(cs.validate(2, 2), DimensionMismatch);
  REQUIRE_THROWS_AS(cs.at_interface(0), BadConfig);
  REQUIRE_THROWS_AS(cs.at_interface(2), BadConfig);
}

TEST_CASE("assemble_M places value columns first and condition rows in order") {
  const CouplingSet cs = tagged_coupling();
  const double lam = 3.0;
  const double l2 = lam * lam;
  for (int m = 1; m <= 2; ++m) {
    const CMatrix M = assemble_M(cs, m, 1, SpectralParameter(lam));
    REQUIRE(M.dim() == 4);
    for (int j = 0; j < 2; ++j) {
      const double tag = 10.0 * (j + 1) + m;
      // Value block: beta + lambda^2 gamma. Derivative block: alpha +
      // lambda^2 delta.
      REQUIRE(M(2 * j, 0).real() == Catch::Approx(tag + 0.2 + l2 * (tag + 0.3)));
      REQUIRE(M(2 * j, 2).real() == Catch::Approx(tag + 0.1 + l2 * (tag + 0.4)));
      REQUIRE(M(2 * j, 1) == Complex(0.0, 0.0));
    }
  }
  REQUIRE_THROWS_AS(assemble_M(cs, 3, 1, SpectralParameter(1.0)), BadConfig);
}

TEST_CASE("check_invertibility certifies transparent interfaces") {
  const MediumStack medium = two_layer_stack();
  CouplingSet cs;
  cs.boundary = BoundaryQuad{CMatrix::zero(2), -1.0 * CMatrix::identity(2), CMatrix::zero(2),
                             CMatrix::zero(2)};
  InterfaceCoupling ic;
  for (int m = 0; m < 2; ++m) {
    ic.alpha[0][m] = CMatrix::identity(2);
    ic.beta[0][m] = CMatrix::zero(2);
    ic.gamma[0][m] = CMatrix::zero(2);
    ic.delta[0][m] = CMatrix::zero(2);
    ic.alpha[1][m] = CMatrix::zero(2);
    ic.beta[1][m] = CMatrix::identity(2);
    ic.gamma[1][m] = CMatrix::zero(2);
    ic.delta[1][m] = CMatrix::zero(2);
  }
  cs.interfaces.push_back(ic);

  const InvertibilityCertificate cert =
      check_invertibility(cs, medium, {0.5, 1.0, 5.0, 25.0});
  REQUIRE(cert.entries.size() == 2);  // sides m = 1, 2 of the single interface
  REQUIRE(cert.worst() > 1e-12);

  // Zero out one condition family on one side: the block goes singular.
  CouplingSet broken = cs;
  broken.interfaces[0].alpha[0][0] = CMatrix::zero(2);
  broken.interfaces[0].beta[0][0] = CMatrix::zero(2);
  REQUIRE_THROWS_AS(check_invertibility(broken, medium, {1.0}), InvertibilityViolation);
  REQUIRE_THROWS_AS(check_invertibility(cs, medium, {}), BadConfig);
}
