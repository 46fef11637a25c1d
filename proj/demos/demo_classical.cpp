// Single uniform layer with the value boundary condition: the transform
// collapses to the classical sine pair. Prints the kernel next to
// -2i sin(lambda x), the image of exp(-x) next to 1/(1+lambda^2), and the
// round-trip error for x exp(-x).

#include <cmath>
#include <complex>
#include <cstdio>

#include "lamtrans/lamtrans.hpp"

int main() {
  using namespace lamtrans;

  const ParsedConfig cfg = parse_config_json(Json::parse(R"({
    "medium": {
      "r": 1,
      "interfaces": [0.0],
      "layers": [{"A_sq": [[1.0]], "Gamma_sq": [[0.0]]}]
    },
    "coupling": "dirichlet",
    "quadrature": {"lambda_max": 40.0}
  })"));
  const MediumStack& medium = *cfg.medium;
  const CouplingSet& coupling = *cfg.coupling;

  std::printf("kernel vs -2i sin(lambda x)\n");
  std::printf("%8s %8s %24s %24s\n", "lambda", "x", "u(x)", "reference");
  for (double lambda : {0.5, 2.0, 10.0}) {
    const SpectralBasis basis = build_basis(medium, coupling, lambda);
    for (double x : {0.5, 1.5, 3.0}) {
      const Complex u = spectral_u(basis, x)(0, 0);
      const Complex ref = Complex(0.0, -2.0) * std::sin(lambda * x);
      std::printf("%8.2f %8.2f %11.6f%+11.6fi %11.6f%+11.6fi\n", lambda, x, u.real(), u.imag(),
                  ref.real(), ref.imag());
    }
  }

  const PiecewiseField exp_field =
      build_field(Json{{"type", "poly_exp"}, {"coeffs", {1.0}}, {"rate", 1.0}}, medium);
  std::printf("\nforward image of exp(-x) vs 1/(1+lambda^2)\n");
  std::printf("%8s %16s %16s %12s\n", "lambda", "image", "reference", "abs error");
  for (double lambda : {0.5, 1.0, 2.0, 5.0}) {
    const Complex got = forward(exp_field, lambda, medium, coupling, cfg.quadrature)(0);
    const double want = 1.0 / (1.0 + lambda * lambda);
    std::printf("%8.2f %16.10f %16.10f %12.3e\n", lambda, got.real(), want,
                std::abs(got - Complex(want, 0.0)));
  }

  const PiecewiseField bump =
      build_field(Json{{"type", "poly_exp"}, {"coeffs", {0.0, 1.0}}, {"rate", 1.0}}, medium);
  const RoundtripReport rep =
      decompose_roundtrip(bump, {0.5, 1.0, 2.0, 4.0}, medium, coupling, cfg.quadrature);
  std::printf("\nround-trip of x exp(-x) on 4 samples: max relative error %.3e\n",
              rep.max_rel_error);
  return rep.max_rel_error < 1e-2 ? 0 : 1;
}
