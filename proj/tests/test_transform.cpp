#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "lamtrans/medium.hpp"
#include "lamtrans/spectral.hpp"
#include "lamtrans/transform.hpp"

using namespace lamtrans;

namespace {

MediumStack trivial_medium() {
  Layer lay;
  lay.A_sq = CMatrix::identity(2);
  lay.Gamma_sq = CMatrix::zero(2);
  return build_medium(2, {0.0}, {lay});
}

CouplingSet value_boundary(int r, int n) {
  CouplingSet cs;
  cs.boundary = BoundaryQuad{CMatrix::zero(r), -1.0 * CMatrix::identity(r), CMatrix::zero(r),
                             CMatrix::zero(r)};
  for (int k = 0; k < n; ++k) {
    InterfaceCoupling ic;
    for (int m = 0; m < 2; ++m) {
      ic.alpha[0][m] = CMatrix::identity(r);
      ic.beta[0][m] = CMatrix::zero(r);
      ic.gamma[0][m] = CMatrix::zero(r);
      ic.delta[0][m] = CMatrix::zero(r);
      ic.alpha[1][m] = CMatrix::zero(r);
      ic.beta[1][m] = CMatrix::identity(r);
      ic.gamma[1][m] = CMatrix::zero(r);
      ic.delta[1][m] = CMatrix::zero(r);
    }
    cs.interfaces.push_back(ic);
  }
  return cs;
}

// f(x) = x e^{-x} in both components; m-th derivative is (-1)^m (x - m) e^{-x}.
PiecewiseField xexp_field(const MediumStack& medium) {
  const auto piece = [](double x, int m) {
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    const double v = sign * (x - m) * std::exp(-x);
    CVector out(2);
    out(0) = v;
    out(1) = v;
    return out;
  };
  std::vector<PiecewiseField::Piece> pieces(static_cast<size_t>(medium.num_layers()), piece);
  return PiecewiseField(medium, std::move(pieces), DecayWitness{2.0, 0.5});
}

double xexp_image(double lambda) { return 2.0 / ((1.0 + lambda * lambda) * (1.0 + lambda * lambda)); }

}  // namespace

TEST_CASE("DecayWitness validation") {
  REQUIRE_NOTHROW((DecayWitness{0.0, 1.0}.validate()));
  REQUIRE_THROWS_AS((DecayWitness{-1.0, 1.0}.validate()), BadConfig);
  REQUIRE_THROWS_AS((DecayWitness{1.0, 0.0}.validate()), BadConfig);
  REQUIRE_THROWS_AS((DecayWitness{1.0, -2.0}.validate()), BadConfig);
}

TEST_CASE("PiecewiseField construction and evaluation") {
  const MediumStack medium = trivial_medium();

  SECTION("piece count must match the layer count") {
    std::vector<PiecewiseField::Piece> two(2, [](double, int) { return CVector::Zero(2); });
    REQUIRE_THROWS_AS(PiecewiseField(medium, two, DecayWitness{0.0, 1.0}), DimensionMismatch);
  }
  SECTION("pieces must produce r components") {
    std::vector<PiecewiseField::Piece> bad(1, [](double, int) { return CVector::Zero(3); });
    REQUIRE_THROWS_AS(PiecewiseField(medium, bad, DecayWitness{0.0, 1.0}), DimensionMismatch);
  }
  SECTION("derivative order is capped") {
    const PiecewiseField f = xexp_field(medium);
    REQUIRE_THROWS_AS(f.eval_layer(1, 0.5, 4), BadConfig);
    REQUIRE_THROWS_AS(f.eval_layer(1, 0.5, -1), BadConfig);
    REQUIRE(f.eval(1.0, 0)(0).real() == Catch::Approx(std::exp(-1.0)));
    REQUIRE(f.eval(1.0, 1)(0).real() == Catch::Approx(0.0).margin(1e-15));
  }
  SECTION("zero field") {
    const PiecewiseField z = PiecewiseField::zero(medium);
    REQUIRE(z.eval(2.0).norm() == 0.0);
    REQUIRE(z.witness().C == 0.0);
  }
}

TEST_CASE("linear_combination combines values and witnesses") {
  const MediumStack medium = trivial_medium();
  const PiecewiseField f = xexp_field(medium);
  const PiecewiseField z = PiecewiseField::zero(medium);
  const PiecewiseField g = linear_combination(2.0, f, -1.0, z);
  REQUIRE(g.eval(1.3)(0).real() == Catch::Approx(2.0 * 1.3 * std::exp(-1.3)));
  REQUIRE(g.witness().C == Catch::Approx(4.0));
  REQUIRE(g.witness().a == 0.5);

  const MediumStack other = trivial_medium();
  const PiecewiseField h = xexp_field(other);
  REQUIRE_THROWS_AS(linear_combination(1.0, f, 1.0, h), BadConfig);
}

TEST_CASE("layer support clipping") {
  const MediumStack medium = trivial_medium();
  PiecewiseField f = xexp_field(medium);

  double a = 0.0, b = 5.0;
  REQUIRE(f.clip_to_support(1, a, b));
  REQUIRE(a == 0.0);
  REQUIRE(b == 5.0);

  f.set_layer_support(1, 0.5, 2.0);
  a = 0.0;
  b = 5.0;
  REQUIRE(f.clip_to_support(1, a, b));
  REQUIRE(a == 0.5);
  REQUIRE(b == 2.0);

  a = 3.0;
  b = 5.0;
  REQUIRE_FALSE(f.clip_to_support(1, a, b));

  f.set_layer_support(1, 1.0, 1.0);  // empty support: identically zero piece
  a = 0.0;
  b = 5.0;
  REQUIRE_FALSE(f.clip_to_support(1, a, b));
}

TEST_CASE("resolve_lambda_max scales with the finest layer") {
  const MediumStack single = trivial_medium();
  QuadratureSpec quad;
  REQUIRE(resolve_lambda_max(quad, single) == 200.0);

  quad.lambda_max = 37.0;
  REQUIRE(resolve_lambda_max(quad, single) == 37.0);
  quad.lambda_max = 0.0;

  Layer lay;
  lay.A_sq = CMatrix::identity(1);
  lay.Gamma_sq = CMatrix::zero(1);
  const MediumStack thin = build_medium(1, {0.0, 0.5}, {lay, lay});
  REQUIRE(resolve_lambda_max(quad, thin) == 400.0);

  const MediumStack wide = build_medium(1, {0.0, 3.0}, {lay, lay});
  REQUIRE(resolve_lambda_max(quad, wide) == 200.0);

  const MediumStack micro = build_medium(1, {0.0, 1e-6}, {lay, lay});
  REQUIRE(resolve_lambda_max(quad, micro) == 1e5);
}

TEST_CASE("resolve_x_max honors the decay witness") {
  const MediumStack medium = trivial_medium();
  QuadratureSpec quad;

  // Auto mode: tail span depends only on the decay rate.
  REQUIRE(resolve_x_max(quad, medium, DecayWitness{2.0, 0.5}) ==
          Catch::Approx(std::log(1e10) / 0.5));
  REQUIRE(resolve_x_max(quad, medium, DecayWitness{0.0, 1.0}) == 1.0);

  // Pinned mode: accepted only when the witness bound is resolved.
  quad.x_max = 30.0;
  REQUIRE(resolve_x_max(quad, medium, DecayWitness{2.0, 0.5}) == 30.0);
  quad.x_max = 8.0;
  REQUIRE_THROWS_AS(resolve_x_max(quad, medium, DecayWitness{2.0, 0.5}), TailNotResolved);
  quad.x_max = -1.0;
  REQUIRE_THROWS_AS(resolve_x_max(quad, medium, DecayWitness{2.0, 0.5}), BadConfig);
}

TEST_CASE("forward reproduces the analytic sine image") {
  const MediumStack medium = trivial_medium();
  const CouplingSet cs = value_boundary(2, 0);
  const PiecewiseField f = xexp_field(medium);
  QuadratureSpec quad;
  quad.x_max = 30.0;
  quad.panel_tol = 1e-8;
  for (double lambda : {0.4, 1.0, 3.0, 9.0}) {
    const CVector ft = forward(f, lambda, medium, cs, quad);
    REQUIRE(ft.size() == 2);
    for (int c = 0; c < 2; ++c) {
      REQUIRE(std::abs(ft(c) - Complex(xexp_image(lambda), 0.0)) < 1e-7);
    }
  }
}

TEST_CASE("forward is linear in the field") {
  const MediumStack medium = trivial_medium();
  const CouplingSet cs = value_boundary(2, 0);
  const PiecewiseField f = xexp_field(medium);
  const PiecewiseField g = linear_combination(3.0, f, 0.0, PiecewiseField::zero(medium));
  QuadratureSpec quad;
  quad.x_max = 30.0;
  const CVector a = forward(f, 2.0, medium, cs, quad);
  const CVector b = forward(g, 2.0, medium, cs, quad);
  REQUIRE((b - 3.0 * a).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("forward reports the spatial tail bound") {
  const MediumStack medium = trivial_medium();
  const CouplingSet cs = value_boundary(2, 0);
  const PiecewiseField f = xexp_field(medium);
  QuadratureSpec quad;
  quad.x_max = 30.0;
  PanelReport rep;
  forward(f, 1.0, medium, cs, quad, &rep);
  // (C/a) e^{-a (x_max - ln)} with C = 2, a = 0.5, scaled by the kernel size.
  REQUIRE(rep.tail_bound > 0.0);
  REQUIRE(rep.tail_bound < 1e-4);
  REQUIRE(rep.evaluations > 0);
}

TEST_CASE("operator_image matches the analytic image of the operator") {
  // For the trivial layer the operator action on x e^{-x} is its own second
  // derivative, whose image is (x - 2) e^{-x} transformed; the identity
  // routes it through -lambda^2 f~ and the boundary limits instead.
  const MediumStack medium = trivial_medium();
  const CouplingSet cs = value_boundary(2, 0);
  const PiecewiseField f = xexp_field(medium);
  QuadratureSpec quad;
  quad.x_max = 30.0;
  quad.panel_tol = 1e-9;
  for (double lambda : {0.7, 2.0, 6.0}) {
    const CVector img = operator_image(f, lambda, medium, cs, quad);
    // With beta0 = -E the boundary correction is +f(0) = 0 here, and
    // f~ = 2/(1+lambda^2)^2, so the image is -2 lambda^2/(1+lambda^2)^2.
    const double want = -2.0 * lambda * lambda /
                        ((1.0 + lambda * lambda) * (1.0 + lambda * lambda));
    for (int c = 0; c < 2; ++c) {
      REQUIRE(std::abs(img(c) - Complex(want, 0.0)) < 1e-6);
    }
  }
}

TEST_CASE("operator_image rejects fields violating the conjugation conditions") {
  Layer lay;
  lay.A_sq = CMatrix::identity(2);
  lay.Gamma_sq = CMatrix::zero(2);
  const MediumStack medium = build_medium(2, {0.0, 1.0}, {lay, lay});
  const CouplingSet cs = value_boundary(2, 1);
  // Discontinuous across the interface: transparent coupling demands
  // continuity of value and slope.
  const auto left = [](double x, int) {
    CVector v(2);
    v(0) = std::exp(-x);
    v(1) = 0.0;
    return v;
  };
  const auto right = [](double x, int) {
    CVector v(2);
    v(0) = 5.0 * std::exp(-x);
    v(1) = 0.0;
    return v;
  };
  const PiecewiseField f(medium, {left, right}, DecayWitness{5.0, 0.5});
  QuadratureSpec quad;
  quad.x_max = 30.0;
  REQUIRE_THROWS_AS(operator_image(f, 1.0, medium, cs, quad), HypothesisViolated);
}

TEST_CASE("sample_forward lays a uniform grid and serializes losslessly") {
  const MediumStack medium = trivial_medium();
  const CouplingSet cs = value_boundary(2, 0);
  const PiecewiseField f = xexp_field(medium);
  QuadratureSpec quad;
  quad.x_max = 30.0;
  quad.lambda_max = 20.0;
  const TransformImage image = sample_forward(f, medium, cs, quad, 17);
  REQUIRE(image.nodes.size() == 17);
  REQUIRE(image.nodes.front() == quad.epsilon);
  REQUIRE(image.nodes.back() == Catch::Approx(20.0).margin(1e-12));
  for (size_t i = 0; i < image.nodes.size(); ++i) {
    REQUIRE(std::abs(image.values[i](0) - Complex(xexp_image(image.nodes[i]), 0.0)) < 1e-5);
  }
  REQUIRE_THROWS_AS(sample_forward(f, medium, cs, quad, 1), BadConfig);

  std::stringstream ss;
  write_image_csv(image, ss);
  const TransformImage back = read_image_csv(ss);
  REQUIRE(back.nodes.size() == image.nodes.size());
  for (size_t i = 0; i < image.nodes.size(); ++i) {
    REQUIRE(back.nodes[i] == image.nodes[i]);  // %.17g round-trips doubles
    REQUIRE((back.values[i] - image.values[i]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("read_image_csv rejects malformed rows") {
  std::stringstream ss("lambda,re_1,im_1\n1.0,2.0\n");
  REQUIRE_THROWS_AS(read_image_csv(ss), BadConfig);
  std::stringstream empty("lambda,re_1,im_1\n");
  REQUIRE_THROWS_AS(read_image_csv(empty), BadConfig);
}

TEST_CASE("inverse_fn recovers the field from its analytic image") {
  const MediumStack medium = trivial_medium();
  const CouplingSet cs = value_boundary(2, 0);
  QuadratureSpec quad;
  quad.lambda_max = 100.0;
  quad.panel_tol = 1e-7;
  const auto ftilde = [](double lam) {
    CVector v(2);
    v(0) = xexp_image(lam);
    v(1) = xexp_image(lam);
    return v;
  };
  for (double x : {0.5, 1.0, 2.5}) {
    const CVector rec = inverse_fn(ftilde, x, medium, cs, quad);
    const double want = x * std::exp(-x);
    for (int c = 0; c < 2; ++c) {
      REQUIRE(std::abs(rec(c) - Complex(want, 0.0)) < 5e-4);
    }
  }
}

TEST_CASE("inverse integrates a sampled image through its spline") {
  const MediumStack medium = trivial_medium();
  const CouplingSet cs = value_boundary(2, 0);
  QuadratureSpec quad;
  quad.panel_tol = 1e-7;

  TransformImage image;
  image.nodes.push_back(0.01);
  for (int i = 1; i <= 300; ++i) image.nodes.push_back(0.1 * i);
  for (double lam : image.nodes) {
    CVector v(2);
    v(0) = xexp_image(lam);
    v(1) = xexp_image(lam);
    image.values.push_back(v);
  }
  const CVector rec = inverse(image, 1.0, medium, cs, quad);
  REQUIRE(std::abs(rec(0) - Complex(std::exp(-1.0), 0.0)) < 3e-3);

  // The sampled support must cover part of the integration range.
  TransformImage offside = image;
  QuadratureSpec tiny = quad;
  tiny.epsilon = 40.0;
  tiny.lambda_max = 45.0;
  REQUIRE_THROWS_AS(inverse(offside, 1.0, medium, cs, tiny), BadConfig);
}

TEST_CASE("decompose_roundtrip recovers a compact two-layer field") {
  Layer lay;
  lay.A_sq = CMatrix::identity(1);
  lay.Gamma_sq = CMatrix::zero(1);
  const MediumStack medium = build_medium(1, {0.0, 1.0}, {lay, lay});
  const CouplingSet cs = value_boundary(1, 1);

  // Smooth bump supported in (0.1, 0.9): layer 2 is identically zero, so the
  // spatial integration clips to the first layer.
  const auto bump = [](double x, int m) {
    CVector v(1);
    if (x <= 0.1 || x >= 0.9) {
      v(0) = 0.0;
      return v;
    }
    if (m == 0) {
      const double s = (x - 0.1) * (0.9 - x);
      v(0) = s * s * s * s * 1500.0;
      return v;
    }
    const double h = 1e-5;
    const auto at = [](double t) {
      if (t <= 0.1 || t >= 0.9) return 0.0;
      const double s = (t - 0.1) * (0.9 - t);
      return s * s * s * s * 1500.0;
    };
    if (m == 1) {
      v(0) = (at(x + h) - at(x - h)) / (2.0 * h);
      return v;
    }
    v(0) = 0.0;  // higher derivatives unused by the roundtrip
    return v;
  };
  const auto zero = [](double, int) { return CVector(CVector::Zero(1)); };
  PiecewiseField f(medium, {bump, zero}, DecayWitness{2.0, 1.0});
  f.set_layer_support(1, 0.1, 0.9);
  f.set_layer_support(2, 0.0, 0.0);

  std::vector<double> xs;
  for (int i = 0; i <= 20; ++i) xs.push_back(0.05 + 0.8 * i / 20.0);
  QuadratureSpec quad;
  quad.lambda_max = 60.0;
  const RoundtripReport rep = decompose_roundtrip(f, xs, medium, cs, quad);
  REQUIRE(rep.field_scale > 0.5);
  REQUIRE(rep.max_rel_error < 2e-3);
  REQUIRE(rep.x.size() == xs.size());
  REQUIRE_THROWS_AS(decompose_roundtrip(f, {}, medium, cs, quad), BadConfig);
}
