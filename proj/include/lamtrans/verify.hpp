#pragma once

// The acceptance suite: eight property-based criteria at desk scale, shared
// by the standalone acceptance binary and the CLI verify command. Every
// tolerance is pinned here, next to the check it gates.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "lamtrans/elastodyn.hpp"
#include "lamtrans/errors.hpp"
#include "lamtrans/linalg.hpp"
#include "lamtrans/medium.hpp"
#include "lamtrans/oracles.hpp"
#include "lamtrans/quadrature.hpp"
#include "lamtrans/spectral.hpp"
#include "lamtrans/transform.hpp"

namespace lamtrans {

struct CriterionResult {
  int index = 0;
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  std::vector<std::string> details;
};

struct AcceptanceOptions {
  unsigned long long seed = 20240817ULL;
};

namespace verify_detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return std::string(buf);
}

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline CMatrix real_matrix(const Eigen::MatrixXd& m) {
  return CMatrix(Eigen::MatrixXcd(m.cast<Complex>()));
}

inline Eigen::MatrixXd randn(std::mt19937_64& rng, int r) {
  std::normal_distribution<double> d(0.0, 1.0);
  Eigen::MatrixXd m(r, r);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) m(i, j) = d(rng);
  }
  return m;
}

// Classical single-layer configuration: A^2 = E, Gamma^2 = 0, value condition
// at l0 = 0 normalized so u = -2i sin(lambda x) E and u* = sin(lambda x)/lambda E.
inline MediumStack classical_medium() {
  Layer lay;
  lay.A_sq = CMatrix::identity(2);
  lay.Gamma_sq = CMatrix::zero(2);
  return build_medium(2, {0.0}, {lay});
}

inline CouplingSet value_condition_coupling(int r, int n) {
  CouplingSet coupling;
  Eigen::MatrixXcd beta = -Eigen::MatrixXcd::Identity(r, r);
  coupling.boundary =
      BoundaryQuad{CMatrix::zero(r), CMatrix(std::move(beta)), CMatrix::zero(r), CMatrix::zero(r)};
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
    coupling.interfaces.push_back(std::move(ic));
  }
  return coupling;
}

// Random admissible medium: real SPD A^2 with eigenvalues bounded away from
// zero, real PSD Gamma^2, strictly increasing interfaces.
inline MediumStack random_medium(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> gap(0.4, 1.2);
  std::vector<double> interfaces{0.0};
  for (int k = 0; k < n; ++k) interfaces.push_back(interfaces.back() + gap(rng));
  std::vector<Layer> layers;
  for (int m = 0; m <= n; ++m) {
    const Eigen::MatrixXd R = randn(rng, 2);
    const Eigen::MatrixXd S = randn(rng, 2);
    Layer lay;
    lay.A_sq = real_matrix(0.4 * (R * R.transpose()) + 0.5 * Eigen::MatrixXd::Identity(2, 2));
    lay.Gamma_sq = real_matrix(0.25 * (S * S.transpose()));
    layers.push_back(std::move(lay));
  }
  return build_medium(2, interfaces, std::move(layers));
}

// Random coupling built to stay well conditioned: anti-diagonally dominant
// interface blocks, near -E boundary value functional with small gamma/delta.
inline CouplingSet random_coupling(std::mt19937_64& rng, int r, int n) {
  CouplingSet coupling;
  coupling.boundary = BoundaryQuad{
      real_matrix(0.3 * randn(rng, r)),
      real_matrix(-Eigen::MatrixXd::Identity(r, r) + 0.3 * randn(rng, r)),
      real_matrix(0.02 * randn(rng, r)), real_matrix(0.02 * randn(rng, r))};
  for (int k = 0; k < n; ++k) {
    InterfaceCoupling ic;
    for (int m = 0; m < 2; ++m) {
      ic.alpha[0][m] = real_matrix(Eigen::MatrixXd::Identity(r, r) + 0.3 * randn(rng, r));
      ic.beta[0][m] = real_matrix(0.3 * randn(rng, r));
      ic.gamma[0][m] = real_matrix(0.02 * randn(rng, r));
      ic.delta[0][m] = CMatrix::zero(r);
      ic.alpha[1][m] = real_matrix(0.3 * randn(rng, r));
      ic.beta[1][m] = real_matrix(Eigen::MatrixXd::Identity(r, r) + 0.3 * randn(rng, r));
      ic.gamma[1][m] = real_matrix(0.02 * randn(rng, r));
      ic.delta[1][m] = CMatrix::zero(r);
    }
    coupling.interfaces.push_back(std::move(ic));
  }
  return coupling;
}

// d^m/dx^m of p(x) e^{-rate x} for a coefficient-vector polynomial.
inline double poly_exp_deriv(const std::vector<double>& coeffs, double rate, double x, int m) {
  std::vector<double> poly = coeffs;
  for (int d = 0; d < m; ++d) {
    std::vector<double> next(std::max<size_t>(poly.size(), 1), 0.0);
    for (size_t k = 0; k < poly.size(); ++k) {
      next[k] += -rate * poly[k];
      if (k > 0) next[k - 1] += static_cast<double>(k) * poly[k];
    }
    poly = std::move(next);
  }
  double p = 0.0;
  for (size_t k = poly.size(); k-- > 0;) p = p * x + poly[k];
  return p * std::exp(-rate * x);
}

// C^3 polynomial bump ((x-a)(b-x))^4, normalized to unit peak, supported on
// [a, b]; exact derivatives through order 3 via the coefficient expansion.
struct PolyBump {
  double a, b;
  std::vector<double> coeffs;  // monomial coefficients of the degree-8 bump

  PolyBump(double a_, double b_) : a(a_), b(b_) {
    std::vector<double> base{-a * b, a + b, -1.0};  // (x-a)(b-x)
    std::vector<double> p{1.0};
    for (int k = 0; k < 4; ++k) {
      std::vector<double> q(p.size() + base.size() - 1, 0.0);
      for (size_t i = 0; i < p.size(); ++i) {
        for (size_t j = 0; j < base.size(); ++j) q[i + j] += p[i] * base[j];
      }
      p = std::move(q);
    }
    const double mid = 0.5 * (a + b);
    double peak = 0.0;
    for (size_t k = p.size(); k-- > 0;) peak = peak * mid + p[k];
    for (double& c : p) c /= peak;
    coeffs = std::move(p);
  }

  double eval(double x, int m) const {
    if (x <= a || x >= b) return 0.0;
    std::vector<double> poly = coeffs;
    for (int d = 0; d < m; ++d) {
      std::vector<double> next(std::max<size_t>(poly.size(), 1), 0.0);
      for (size_t k = 1; k < poly.size(); ++k) next[k - 1] = static_cast<double>(k) * poly[k];
      poly = std::move(next);
    }
    double v = 0.0;
    for (size_t k = poly.size(); k-- > 0;) v = v * x + poly[k];
    return v;
  }
};

inline ElasticScenario two_layer_scenario() {
  ElasticScenario sc;
  sc.layers = {ElasticLayer{2.0, 1.0, 2.0, 1.0}, ElasticLayer{1.2, 0.8, 1.6, 0.85}};
  sc.interfaces = {0.0, 1.0};
  return sc;
}

// --- Criterion 1: classical-limit equivalence -----------------------------

inline CriterionResult criterion_classical() {
  CriterionResult res;
  res.index = 1;
  res.name = "classical limit";
  Timer timer;
  try {
    const MediumStack medium = classical_medium();
    const CouplingSet coupling = value_condition_coupling(2, 0);
    coupling.validate(2, 0);

    double u_err = 0.0, dual_err = 0.0;
    for (int i = 0; i < 50; ++i) {
      const double lambda = 0.1 * std::pow(500.0, i / 49.0);  // log grid [0.1, 50]
      const SpectralBasis basis = build_basis(medium, coupling, lambda);
      for (int j = 0; j <= 40; ++j) {
        const double x = 10.0 * j / 40.0;
        const Eigen::Matrix2cd u = spectral_u_layer(basis, 1, x).m();
        const Eigen::Matrix2cd du = dual_u_layer(basis, 1, x).m();
        const Eigen::Matrix2cd u_ref =
            Complex(0.0, -2.0) * std::sin(lambda * x) * Eigen::Matrix2cd::Identity();
        const Eigen::Matrix2cd d_ref =
            (std::sin(lambda * x) / lambda) * Eigen::Matrix2cd::Identity();
        u_err = std::max(u_err, (u - u_ref).cwiseAbs().maxCoeff());
        dual_err = std::max(dual_err, (du - d_ref).cwiseAbs().maxCoeff());
      }
    }

    QuadratureSpec quad;
    quad.panel_tol = 1e-9;
    std::vector<PiecewiseField::Piece> pieces{[](double x, int m) {
      CVector v(2);
      const double val = ((m % 2 == 0) ? 1.0 : -1.0) * std::exp(-x);
      v << val, val;
      return v;
    }};
    const PiecewiseField f(medium, std::move(pieces), DecayWitness{2.0, 1.0});
    double fwd_err = 0.0, trunc = 0.0;
    for (int i = 0; i < 12; ++i) {
      const double lambda = 0.1 * std::pow(500.0, i / 11.0);
      PanelReport rep;
      const CVector img = forward(f, lambda, medium, coupling, quad, &rep);
      const double ref = 1.0 / (1.0 + lambda * lambda);
      fwd_err = std::max(fwd_err, (img - CVector::Constant(2, ref)).cwiseAbs().maxCoeff());
      trunc = std::max(trunc, rep.truncation_estimate + rep.tail_bound);
    }

    const bool ok_u = u_err <= 1e-10;
    const bool ok_dual = dual_err <= 1e-10;
    const bool ok_fwd = fwd_err <= 1e-8;
    res.details.push_back("max |u - (-2i sin(lambda x) E)| = " + fmt(u_err) + " (tol 1e-10)");
    res.details.push_back("max |u* - sin(lambda x)/lambda E| = " + fmt(dual_err) + " (tol 1e-10)");
    res.details.push_back("max |F[e^-x] - 1/(1+lambda^2)| = " + fmt(fwd_err) + " (tol 1e-8)");
    res.pass = ok_u && ok_dual && ok_fwd;
  } catch (const std::exception& e) {
    res.pass = false;
    res.details.push_back(std::string("exception: ") + e.what());
  }
  res.seconds = timer.seconds();
  return res;
}

// --- Criterion 2: round-trip decomposition --------------------------------

struct RoundtripOutcome {
  double max_rel_error = 0.0;
  double truncation = 0.0;
};

inline RoundtripOutcome roundtrip_case(const QuadratureSpec& quad, int grid_points) {
  const ElasticScenario scenario = two_layer_scenario();
  const ElasticSystem sys = build_coupling(scenario, 0.5);
  const PolyBump bump(0.1, 0.9);
  std::vector<PiecewiseField::Piece> pieces;
  pieces.push_back([bump](double x, int m) {
    CVector v(2);
    v << bump.eval(x, m), bump.eval(x, m);
    return v;
  });
  pieces.push_back([](double, int) { return CVector(CVector::Zero(2)); });
  PiecewiseField f(sys.medium, std::move(pieces), DecayWitness{3.0, 1.0});
  f.set_layer_support(1, 0.1, 0.9);
  f.set_layer_support(2, 0.0, 0.0);  // identically zero piece

  std::vector<double> xs;
  for (int i = 0; i < grid_points; ++i) {
    double x = 0.02 + (1.8 - 0.02) * i / (grid_points - 1);
    if (std::abs(x - 1.0) <= 1e-3) x += 2.5e-3;  // skip the interface neighborhood
    xs.push_back(x);
  }
  const RoundtripReport rep = decompose_roundtrip(f, xs, sys.medium, sys.coupling, quad);
  RoundtripOutcome out;
  out.max_rel_error = rep.max_rel_error;
  out.truncation = rep.truncation_estimate;
  return out;
}

inline CriterionResult criterion_roundtrip() {
  CriterionResult res;
  res.index = 2;
  res.name = "round-trip decomposition";
  Timer timer;
  try {
    QuadratureSpec quad;
    const RoundtripOutcome out = roundtrip_case(quad, 100);
    res.details.push_back("max relative reconstruction error = " + fmt(out.max_rel_error) +
                          " (tol 1e-3, 100-point grid)");
    res.details.push_back("reported truncation estimate = " + fmt(out.truncation));
    res.pass = out.max_rel_error <= 1e-3;
  } catch (const std::exception& e) {
    res.pass = false;
    res.details.push_back(std::string("exception: ") + e.what());
  }
  res.seconds = timer.seconds();
  return res;
}

// --- Criterion 3: operational identity ------------------------------------

// A field satisfying the conjugation conditions: free smooth data in layer 1,
// traces propagated across each interface through M_1 v_1 = M_2 v_2.
struct PropagatedField {
  PiecewiseField field;
  PiecewiseField image_under_B;  // A^2 f'' + Gamma^2 f per layer
  double scale = 1.0;
};

inline PropagatedField propagated_field(std::mt19937_64& rng, const MediumStack& medium,
                                        const CouplingSet& coupling, double lambda_for_M) {
  const int r = medium.r();
  const int n = medium.n();
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::vector<std::vector<double>> poly(static_cast<size_t>(r));
  for (int c = 0; c < r; ++c) {
    poly[static_cast<size_t>(c)] = {coef(rng), coef(rng), coef(rng), coef(rng)};
  }
  std::vector<PiecewiseField::Piece> pieces;
  pieces.push_back([poly, r](double x, int m) {
    CVector v(r);
    for (int c = 0; c < r; ++c) v(c) = poly_exp_deriv(poly[static_cast<size_t>(c)], 1.0, x, m);
    return v;
  });

  const SpectralParameter sp(lambda_for_M);
  CVector val = CVector::Zero(r), der = CVector::Zero(r);
  if (n >= 1) {
    for (int c = 0; c < r; ++c) {
      val(c) = poly_exp_deriv(poly[static_cast<size_t>(c)], 1.0, medium.interface(1), 0);
      der(c) = poly_exp_deriv(poly[static_cast<size_t>(c)], 1.0, medium.interface(1), 1);
    }
  }
  for (int k = 1; k <= n; ++k) {
    const double lk = medium.interface(k);
    const CMatrix M1 = assemble_M(coupling, 1, k, sp);
    const CMatrix M2 = assemble_M(coupling, 2, k, sp);
    CVector traces(2 * r);
    traces << val, der;
    const CVector rhs = M1.m() * traces;
    const CVector z = block_solve(M2.m(), Eigen::MatrixXcd(rhs));
    const CVector V = z.head(r), W = z.tail(r);
    // Piece (V + (W + V)(x - l_k)) e^{-(x - l_k)} has traces (V, W) at l_k.
    pieces.push_back([V, W, lk, r](double x, int m) {
      const double dx = x - lk;
      const double e = std::exp(-dx);
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      const CVector C = W + V;
      CVector v(r);
      for (int c = 0; c < r; ++c) {
        v(c) = sign * e * (V(c) + C(c) * dx - static_cast<double>(m) * C(c));
      }
      return v;
    });
    if (k < n) {
      const double lnext = medium.interface(k + 1);
      const double dx = lnext - lk;
      const double e = std::exp(-dx);
      const CVector C = W + V;
      val = e * (V + C * dx);
      der = -e * (V + C * dx) + e * C;
    }
  }

  std::vector<PiecewiseField::Piece> bpieces;
  for (int m = 1; m <= n + 1; ++m) {
    const Layer& lay = medium.layer(m);
    const PiecewiseField::Piece piece = pieces[static_cast<size_t>(m) - 1];
    const Eigen::MatrixXcd A2 = lay.A_sq.m();
    const Eigen::MatrixXcd G2 = lay.Gamma_sq.m();
    bpieces.push_back([piece, A2, G2, r](double x, int m_req) {
      if (m_req > 1) return CVector(CVector::Zero(r));  // never requested
      return CVector(A2 * piece(x, m_req + 2) + G2 * piece(x, m_req));
    });
  }
  // Witness rate 0.5: every piece is (poly deg <= 1) * e^{-(x - anchor)}, so
  // |f| e^{0.5 (x - l_n)} is bounded and eventually decreasing; its sampled
  // sup over [l0, x_hi] padded by 20% majorizes the tail.
  double peak = 0.0, bpeak = 0.0;
  const double x_hi = medium.ln() + 6.0;
  for (double x = medium.l0(); x <= x_hi + 1e-12; x += 0.02) {
    const int layer = medium.layer_of(x);
    const PiecewiseField::Piece& piece = pieces[static_cast<size_t>(layer) - 1];
    const Layer& lay = medium.layer(layer);
    const CVector fv = piece(x, 0);
    const CVector bf = lay.A_sq.m() * piece(x, 2) + lay.Gamma_sq.m() * fv;
    peak = std::max(peak, fv.cwiseAbs().maxCoeff());
    bpeak = std::max(bpeak, bf.cwiseAbs().maxCoeff());
  }
  DecayWitness w{std::max(peak, 1e-6) * std::exp(0.5 * x_hi) * 1.2, 0.5};
  PiecewiseField field(medium, pieces, w);
  DecayWitness wb{std::max(bpeak, 1e-6) * std::exp(0.5 * x_hi) * 1.2, 0.5};
  PiecewiseField bfield(medium, std::move(bpieces), wb);
  return PropagatedField{std::move(field), std::move(bfield), std::max({peak, bpeak, 1.0})};
}

inline CriterionResult criterion_operational_identity(unsigned long long seed) {
  CriterionResult res;
  res.index = 3;
  res.name = "operational identity";
  Timer timer;
  try {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    QuadratureSpec quad;
    double worst = 0.0;
    int cases = 0;
    // The boundary quad is unconstrained, but the fields must satisfy the
    // interface conditions at every sampled lambda, so the interface families
    // used here are lambda-independent: value continuity, and the elasticity
    // coupling at xi = 0, whose interface rows scale uniformly in lambda.
    for (int trial = 0; trial < 5; ++trial) {
      MediumStack medium = classical_medium();
      CouplingSet coupling = value_condition_coupling(2, 0);
      if (trial < 3) {
        medium = random_medium(rng, 1);
        coupling = value_condition_coupling(2, 1);
        if (trial == 2) {
          // Full quad at the boundary: all four blocks enter the correction.
          coupling.boundary = BoundaryQuad{
              real_matrix(Eigen::MatrixXd::Identity(2, 2) + 0.3 * randn(rng, 2)),
              real_matrix(0.3 * randn(rng, 2)), real_matrix(0.05 * randn(rng, 2)),
              real_matrix(0.05 * randn(rng, 2))};
        }
      } else {
        const ElasticSystem sys = build_coupling(two_layer_scenario(), 0.0);
        medium = sys.medium;
        coupling = sys.coupling;
      }
      const PropagatedField pf = propagated_field(rng, medium, coupling, 1.0);
      for (int i = 0; i < 20; ++i) {
        const double lambda = 0.5 + (20.0 - 0.5) * i / 19.0;
        const CVector lhs = forward(pf.image_under_B, lambda, medium, coupling, quad);
        const CVector rhs = operator_image(pf.field, lambda, medium, coupling, quad);
        const double err = (lhs - rhs).cwiseAbs().maxCoeff();
        const double bound = 1e-6 * (1.0 + lambda * lambda) * pf.scale;
        worst = std::max(worst, err / bound);
        ++cases;
      }
    }
    res.details.push_back("worst |F[Bf] - RHS| / (1e-6 (1+lambda^2) scale) = " + fmt(worst) +
                          " over " + std::to_string(cases) + " cases (pass < 1)");
    res.pass = worst <= 1.0;
  } catch (const std::exception& e) {
    res.pass = false;
    res.details.push_back(std::string("exception: ") + e.what());
  }
  res.seconds = timer.seconds();
  return res;
}

// --- Criterion 4: eigen-structure residuals -------------------------------

inline CriterionResult criterion_eigen_structure(unsigned long long seed) {
  CriterionResult res;
  res.index = 4;
  res.name = "eigen-structure residuals";
  Timer timer;
  try {
    std::mt19937_64 rng(seed ^ 0x2545f4914f6cdd1dULL);
    std::uniform_int_distribution<int> pick_n(1, 3);
    std::uniform_real_distribution<double> pick_lambda(0.6, 4.0);
    double ode_worst = 0.0, iface_worst = 0.0, dual_iface_worst = 0.0, boundary_worst = 0.0;
    int media_done = 0;
    int draws = 0;
    int rejected_singular = 0, rejected_noise = 0;
    while (media_done < 50) {
      if (++draws > 500) throw Error("criterion 4: too many rejected random draws");
      const int n = pick_n(rng);
      const MediumStack medium = random_medium(rng, n);
      const CouplingSet coupling = random_coupling(rng, 2, n);
      const double lambda_a = pick_lambda(rng), lambda_b = pick_lambda(rng);
      bool singular_draw = false, noisy_draw = false;
      double d_ode = 0.0, d_iface = 0.0, d_dual_iface = 0.0, d_boundary = 0.0;
      try {
      for (const double lambda : {lambda_a, lambda_b}) {
        const SpectralBasis basis = build_basis(medium, coupling, lambda);
        if (basis.boundary_singular()) {
          singular_draw = true;  // regenerate unlucky draw
          break;
        }
        const SpectralParameter sp(lambda);

        // ODE residuals of Phi, Psi, u, u* by the independent stencil oracle.
        // Widths and steps are chosen so the check resolves 1e-8: the dual
        // rides on a per-point 2r x 2r solve whose rounding noise (~kappa eps)
        // is amplified by 1/h^2 in any second-derivative stencil, so the step
        // must be as large as truncation allows. The 6th-order stencil keeps
        // (h q)^6 truncation negligible at h ~ 0.1/q, and the step also caps
        // at a fraction of the layer width. The per-layer formulas are entire
        // in x, so a stencil wing reaching marginally past the layer edge
        // still probes the same representation. The residual is normalized by
        // the column's scale over the layer, not per point, so a sample near
        // a zero of a component cannot inflate the quotient.
        for (int m = 1; m <= n + 1; ++m) {
          const double a = medium.left_endpoint(m);
          const double w = (m <= n) ? (medium.interface(m) - a) : 1.5;
          const Layer& lay = medium.layer(m);
          const CMatrix B =
              CMatrix(Eigen::MatrixXcd(lambda * lambda * Eigen::MatrixXcd::Identity(2, 2) +
                                       lay.Gamma_sq.m()));
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(lay.A_sq.m().real());
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eg(lay.Gamma_sq.m().real());
          const double q_top = std::sqrt(
              (lambda * lambda + std::max(eg.eigenvalues().maxCoeff(), 0.0)) /
              ea.eigenvalues().minCoeff());
          const double h = std::min(0.1 / q_top, 0.08 * w);
          const double a2max = lay.A_sq.m().cwiseAbs().maxCoeff();
          const std::vector<double> points{a + 0.25 * w, a + 0.55 * w, a + 0.85 * w};

          // Pre-registered feasibility gate: each evaluation carries rounding
          // noise bounded by eps times an amplification norm (the boundary
          // inverses for u, the fundamental-block conditioning for u*), and
          // the stencil divides accumulated noise by h^2. A draw whose
          // predicted noise floor exceeds a tenth of the tolerance is
          // regenerated. The decision uses norms of the draw's own objects,
          // never a measured residual, so it cannot mask a defect.
          const double eps = 2.2e-16;
          const double wsum = 1088.0 / 180.0;  // sum of |stencil weights|
          const double pinv_n = basis.phi0_inv().cwiseAbs().maxCoeff();
          const double qinv_n = basis.psi0_inv().cwiseAbs().maxCoeff();
          double e_phi = 0.0, e_psi = 0.0, e_u = 0.0, e_dual = 0.0;
          for (const double p : points) {
            const double phn = basis.phi(m).eval(p).m().cwiseAbs().maxCoeff();
            const double psn = basis.psi(m).eval(p).m().cwiseAbs().maxCoeff();
            e_phi = std::max(e_phi, eps * phn);
            e_psi = std::max(e_psi, eps * psn);
            e_u = std::max(e_u, eps * (phn * pinv_n + psn * qinv_n));
            const Eigen::MatrixXcd om = omega(basis, m, p);
            const double kap = om.cwiseAbs().maxCoeff() * om.inverse().cwiseAbs().maxCoeff();
            if (kap > 1e12) {
              e_dual = 1.0;  // far past any feasible floor; rejects below
            } else {
              e_dual = std::max(e_dual, eps * kap * dual_row(basis, m, p).cwiseAbs().maxCoeff());
            }
          }
          const auto probe = [&](const std::function<CVector(double)>& fn, const CMatrix& a2,
                                 const CMatrix& bb, double e_abs) {
            double scale = 1e-12;
            for (const double p : points)
              scale = std::max(scale, (bb.m() * fn(p)).cwiseAbs().maxCoeff());
            if (wsum * a2max * e_abs > 1e-9 * h * h * scale) {
              noisy_draw = true;
              return;
            }
            const OracleReport rep = fd_residual(fn, a2, bb, points, {}, h, 1e-8, "ode", 7);
            d_ode = std::max(d_ode, rep.max_abs_error / scale);
          };
          for (int col = 0; col < 2; ++col) {
            const std::function<CVector(double)> fns[3] = {
                [&basis, m, col](double x) { return CVector(basis.phi(m).eval(x).m().col(col)); },
                [&basis, m, col](double x) { return CVector(basis.psi(m).eval(x).m().col(col)); },
                [&basis, m, col](double x) {
                  return CVector(spectral_u_layer(basis, m, x).m().col(col));
                }};
            const double e_abs[3] = {e_phi, e_psi, e_u};
            for (int fi = 0; fi < 3; ++fi) probe(fns[fi], lay.A_sq, B, e_abs[fi]);
            // The dual satisfies the transposed equation u*'' A^2 + u* B = 0.
            const CMatrix A2t = CMatrix(Eigen::MatrixXcd(lay.A_sq.m().transpose()));
            const CMatrix Bt = CMatrix(Eigen::MatrixXcd(B.m().transpose()));
            const std::function<CVector(double)> dual_col = [&basis, m, col](double x) {
              return CVector(dual_u_layer(basis, m, x).m().transpose().col(col));
            };
            probe(dual_col, A2t, Bt, e_dual);
            if (noisy_draw) break;
          }
          if (noisy_draw) break;
        }
        if (noisy_draw) break;

        // Interface conditions for Phi and Psi; dual conditions for u*.
        for (int k = 1; k <= n; ++k) {
          const double lk = medium.interface(k);
          const CMatrix M1 = assemble_M(coupling, 1, k, sp);
          const CMatrix M2 = assemble_M(coupling, 2, k, sp);
          for (int which = 0; which < 2; ++which) {
            const LayerExpRep& lrep = which == 0 ? basis.phi(k) : basis.psi(k);
            const LayerExpRep& rrep = which == 0 ? basis.phi(k + 1) : basis.psi(k + 1);
            Eigen::MatrixXcd v1(4, 2), v2(4, 2);
            v1 << lrep.eval(lk).m(), lrep.deriv(lk).m();
            v2 << rrep.eval(lk).m(), rrep.deriv(lk).m();
            const Eigen::MatrixXcd r1 = M1.m() * v1, r2 = M2.m() * v2;
            const double scale = std::max({r1.norm(), r2.norm(), 1e-12});
            d_iface = std::max(d_iface, (r1 - r2).norm() / scale);
          }
          const Eigen::MatrixXcd vk = dual_row(basis, k, lk);
          const Eigen::MatrixXcd vk1 = dual_row(basis, k + 1, lk);
          const Eigen::MatrixXcd lhs = block_solve(Eigen::MatrixXcd(M1.m().transpose()),
                                                   Eigen::MatrixXcd(vk.transpose()))
                                           .transpose();
          const Eigen::MatrixXcd rhs = block_solve(Eigen::MatrixXcd(M2.m().transpose()),
                                                   Eigen::MatrixXcd(vk1.transpose()))
                                           .transpose();
          const double scale = std::max({lhs.norm(), rhs.norm(), 1e-12});
          d_dual_iface = std::max(d_dual_iface, (lhs - rhs).norm() / scale);
        }

        // Boundary annihilation of u at l0.
        {
          const BoundaryQuad& b = coupling.boundary;
          const double l0 = medium.l0();
          const Eigen::MatrixXcd u0 = spectral_u_layer(basis, 1, l0, 0).m();
          const Eigen::MatrixXcd u1 = spectral_u_layer(basis, 1, l0, 1).m();
          const Eigen::MatrixXcd lead = b.alpha.m() + lambda * lambda * b.delta.m();
          const Eigen::MatrixXcd trail = b.beta.m() + lambda * lambda * b.gamma.m();
          const Eigen::MatrixXcd resid = lead * u1 + trail * u0;
          const double scale = std::max({(lead * u1).norm(), (trail * u0).norm(), 1e-12});
          d_boundary = std::max(d_boundary, resid.norm() / scale);
        }
      }
      } catch (const SingularWronskian&) {
        singular_draw = true;  // a stencil wing hit a singular fundamental block
      }
      if (singular_draw) {
        ++rejected_singular;
        continue;
      }
      if (noisy_draw) {
        ++rejected_noise;
        continue;
      }
      ode_worst = std::max(ode_worst, d_ode);
      iface_worst = std::max(iface_worst, d_iface);
      dual_iface_worst = std::max(dual_iface_worst, d_dual_iface);
      boundary_worst = std::max(boundary_worst, d_boundary);
      ++media_done;
    }
    res.details.push_back("ODE residual (Phi, Psi, u, u*) worst rel = " + fmt(ode_worst) +
                          " (tol 1e-8)");
    res.details.push_back("interface condition worst rel = " + fmt(iface_worst) + " (tol 1e-9)");
    res.details.push_back("dual interface condition worst rel = " + fmt(dual_iface_worst) +
                          " (tol 1e-9)");
    res.details.push_back("boundary annihilation worst rel = " + fmt(boundary_worst) +
                          " (tol 1e-10)");
    res.details.push_back("media checked: " + std::to_string(media_done) +
                          " (n in {1,2,3}); regenerated: " + std::to_string(rejected_singular) +
                          " singular, " + std::to_string(rejected_noise) + " noise floor");
    res.pass = ode_worst <= 1e-8 && iface_worst <= 1e-9 && dual_iface_worst <= 1e-9 &&
               boundary_worst <= 1e-10;
  } catch (const std::exception& e) {
    res.pass = false;
    res.details.push_back(std::string("exception: ") + e.what());
  }
  res.seconds = timer.seconds();
  return res;
}

// --- Criterion 5: Duhamel correctness -------------------------------------

inline CriterionResult criterion_duhamel(unsigned long long seed) {
  CriterionResult res;
  res.index = 5;
  res.name = "Duhamel convolution";
  Timer timer;
  try {
    std::mt19937_64 rng(seed ^ 0xda3e39cb94b95bdbULL);
    std::uniform_real_distribution<double> uxi(0.0, 5.0), ueta(0.1, 10.0), ut(0.5, 2.5),
        uc(-1.0, 1.0), ub(0.2, 1.5), ud(0.0, 4.0);
    double worst = 0.0;
    const double c_speed = 2.0;
    for (int trial = 0; trial < 100; ++trial) {
      const double xi = uxi(rng), eta = ueta(rng), t = ut(rng);
      const Complex a0(uc(rng), uc(rng)), a1(uc(rng), uc(rng)), a2(uc(rng), uc(rng));
      const double b = ub(rng), d = ud(rng), e = ud(rng);
      const auto pbar = [=](double tau) {
        return (a0 + a1 * tau) * std::exp(-b * tau) * std::sin(d * tau + e) +
               a2 * std::exp(-0.5 * b * tau);
      };
      const double omega = std::hypot(c_speed * xi, eta);
      const Eigen::Vector2cd duh = duhamel(c_speed, xi, eta, t, pbar, 1.0 / (1.0 + d));
      const Eigen::Vector2cd march = ode_march(omega, pbar, t, 0.02 / std::max(omega, 1.0));
      double pbar_peak = 0.0;
      for (double tau = 0.0; tau <= t; tau += t / 64.0) {
        pbar_peak = std::max(pbar_peak, std::abs(pbar(tau)));
      }
      const double scale =
          std::max({std::abs(duh(0)), std::abs(march(0)), 0.01 * t * pbar_peak, 1e-12});
      worst = std::max(worst, std::abs(duh(0) - march(0)) / scale);
    }

    double const_err = 0.0;
    for (const double omega : {1.0, 2.5, 6.0, 10.0}) {
      for (const double t : {0.4, 1.1, 2.0}) {
        const Eigen::Vector2cd duh =
            duhamel(1.0, 0.0, omega, t, [](double) { return Complex(1.0, 0.0); }, 1.0);
        const double closed = (1.0 - std::cos(omega * t)) / (omega * omega);
        const_err = std::max(const_err, std::abs(duh(0) - Complex(closed, 0.0)));
      }
    }
    res.details.push_back("worst rel error vs 4th-order march = " + fmt(worst) +
                          " over 100 triples (tol 1e-6)");
    res.details.push_back("constant-load closed form abs err = " + fmt(const_err) +
                          " (tol 1e-10)");
    res.pass = worst <= 1e-6 && const_err <= 1e-10;
  } catch (const std::exception& e) {
    res.pass = false;
    res.details.push_back(std::string("exception: ") + e.what());
  }
  res.seconds = timer.seconds();
  return res;
}

// --- Criterion 6: homogeneous half-space physics --------------------------

inline LoadSpec gaussian_pulse_load(double width, double t0, double amplitude) {
  LoadSpec load;
  load.shape = [width, amplitude](double y) {
    const double s = y / width;
    return amplitude * std::exp(-0.5 * s * s);
  };
  load.time_factor = [t0](double t) {
    return t <= 0.0 ? 0.0 : (t / t0) * (t / t0) * std::exp(-t / t0);
  };
  load.y_lo = -8.0 * width;
  load.y_hi = 8.0 * width;
  load.time_scale = t0;
  const auto shape = load.shape;
  const auto g = load.time_factor;
  load.p = [shape, g](double y, double t) { return shape(y) * g(t); };
  return load;
}

inline std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> v(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    v[static_cast<size_t>(i)] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  }
  return v;
}

inline CriterionResult criterion_halfspace_physics() {
  CriterionResult res;
  res.index = 6;
  res.name = "homogeneous half-space physics";
  Timer timer;
  try {
    ElasticScenario scenario;
    scenario.layers = {ElasticLayer{2.0, 1.0, 2.0, 1.0}};
    scenario.interfaces = {0.0};
    const LoadSpec load = gaussian_pulse_load(0.8, 0.4, 1.0);

    QuadratureSpec quad;
    quad.panel_tol = 1e-5;
    quad.lambda_max = 100.0;
    quad.x_max = 8.0;  // y-image of the width-0.8 Gaussian decays by here

    // Zero-load nullity: identically zero load must give bit-zero fields.
    {
      LoadSpec zero = load;
      zero.shape = [](double) { return 0.0; };
      zero.p = [](double, double) { return 0.0; };
      const TensionGrid g = reconstruct_tension_grid(scenario, zero, linspace(0.0, 0.4, 5),
                                                     linspace(-1.0, 1.0, 5), {0.2, 0.5}, quad);
      double nonzero = 0.0;
      for (const auto& seg : g.phi) {
        for (const Complex& v : seg) nonzero = std::max(nonzero, std::abs(v));
      }
      for (const auto& seg : g.psi) {
        for (const Complex& v : seg) nonzero = std::max(nonzero, std::abs(v));
      }
      res.details.push_back("zero-load max |tension| = " + fmt(nonzero) + " (exact 0 required)");
      if (nonzero != 0.0) {
        res.pass = false;
        res.seconds = timer.seconds();
        return res;
      }
    }

    const std::vector<double> xs = linspace(0.0, 1.0, 11);
    const std::vector<double> ys = linspace(-2.5, 2.5, 11);
    const std::vector<double> ts = linspace(0.3, 1.5, 5);
    const TensionGrid tension = reconstruct_tension_grid(scenario, load, xs, ys, ts, quad);
    const FieldGrid fields = fields_from_tension(tension, scenario);

    // Surface boundary condition sigma_x(l0, y, t) = -p(y, t).
    double surf_err = 0.0, p_peak = 0.0;
    for (size_t iy = 0; iy < ys.size(); ++iy) {
      for (size_t it = 0; it < ts.size(); ++it) {
        const double p = load.p(ys[iy], ts[it]);
        p_peak = std::max(p_peak, std::abs(p));
        surf_err = std::max(surf_err, std::abs(fields.at(fields.sigma_x, 0, 0,
                                                         static_cast<int>(iy),
                                                         static_cast<int>(it)) +
                                               p));
      }
    }

    // Causality: outside the widened cone |y| > y_hi + c t the kernel route
    // vanishes structurally and the spectral route must agree to 1e-2 peak.
    const HomogeneousKernelRoute kernel(scenario, load, {0.5}, 1.6, quad);
    double kernel_outside = 0.0, spectral_outside = 0.0;
    for (const double y_out : {12.0, -12.0}) {
      const Eigen::Vector2d k = kernel.tension(0, y_out, 1.0);
      kernel_outside = std::max({kernel_outside, std::abs(k(0)), std::abs(k(1))});
      const TensionPairValue far = reconstruct_tension(scenario, load, 0.5, y_out, 1.0, quad);
      spectral_outside = std::max({spectral_outside, std::abs(far.phi), std::abs(far.psi)});
    }

    const double peak = tension.field_scale;
    const bool ok_surface = surf_err <= 5e-2 * p_peak;
    const bool ok_causal = kernel_outside == 0.0 && spectral_outside <= 1e-2 * peak;
    const bool ok_imag = tension.conj_symmetry_residue <= 1e-6;
    res.details.push_back("surface |sigma_x + p| max = " + fmt(surf_err) + " vs 5e-2 * |p|max = " +
                          fmt(5e-2 * p_peak));
    res.details.push_back("outside-cone kernel route = " + fmt(kernel_outside) +
                          " (exact 0), spectral = " + fmt(spectral_outside) + " vs 1e-2 peak = " +
                          fmt(1e-2 * peak));
    res.details.push_back("conjugate-symmetry residue = " + fmt(tension.conj_symmetry_residue) +
                          " (tol 1e-6)");
    res.pass = ok_surface && ok_causal && ok_imag;
  } catch (const std::exception& e) {
    res.pass = false;
    res.details.push_back(std::string("exception: ") + e.what());
  }
  res.seconds = timer.seconds();
  return res;
}

// --- Criterion 7: two-layer conjugation -----------------------------------

inline CriterionResult criterion_two_layer_conjugation() {
  CriterionResult res;
  res.index = 7;
  res.name = "two-layer conjugation";
  Timer timer;
  try {
    ElasticScenario scenario;
    scenario.layers = {ElasticLayer{2.0, 1.0, 2.0, 1.0}, ElasticLayer{1.2, 0.8, 1.6, 0.85}};
    scenario.interfaces = {0.0, 0.3};
    const LoadSpec load = gaussian_pulse_load(1.0, 0.5, 1.0);

    QuadratureSpec quad;
    quad.panel_tol = 1e-5;
    quad.lambda_max = 80.0;
    quad.x_max = 6.5;

    const std::vector<double> xs = linspace(0.0, 0.6, 11);  // interface at node 5
    const std::vector<double> ys = linspace(-2.0, 2.0, 11);
    const std::vector<double> ts = linspace(0.2, 1.0, 5);
    const TensionGrid tension = reconstruct_tension_grid(scenario, load, xs, ys, ts, quad);
    const FieldGrid fields = fields_from_tension(tension, scenario);
    const InterfaceJumpReport jumps = interface_jumps(fields);

    const bool ok_disp = jumps.max_jump_displacement <= 5e-2 * jumps.displacement_scale;
    const bool ok_stress = jumps.max_jump_stress <= 5e-2 * jumps.stress_scale;
    res.details.push_back("displacement jump max = " + fmt(jumps.max_jump_displacement) +
                          " vs 5e-2 * scale = " + fmt(5e-2 * jumps.displacement_scale));
    res.details.push_back("stress (sigma_x, tau_xy) jump max = " + fmt(jumps.max_jump_stress) +
                          " vs 5e-2 * scale = " + fmt(5e-2 * jumps.stress_scale));
    res.details.push_back("segments: " + std::to_string(tension.seg_x.size()) +
                          ", conj-symmetry residue = " + fmt(tension.conj_symmetry_residue));
    res.pass = ok_disp && ok_stress;
  } catch (const std::exception& e) {
    res.pass = false;
    res.details.push_back(std::string("exception: ") + e.what());
  }
  res.seconds = timer.seconds();
  return res;
}

// --- Criterion 8: refinement monotonicity ---------------------------------

inline CriterionResult criterion_refinement(unsigned long long seed) {
  CriterionResult res;
  res.index = 8;
  res.name = "refinement monotonicity";
  Timer timer;
  try {
    QuadratureSpec coarse;  // defaults
    QuadratureSpec fine;
    fine.panel_tol = coarse.panel_tol / 2.0;
    fine.lambda_max = 400.0;  // doubles the resolved default of 200

    // Criterion-1 style forward error at a few nodes.
    const auto forward_err = [&](const QuadratureSpec& q, double* trunc) {
      const MediumStack medium = classical_medium();
      const CouplingSet coupling = value_condition_coupling(2, 0);
      std::vector<PiecewiseField::Piece> pieces{[](double x, int m) {
        CVector v(2);
        const double val = ((m % 2 == 0) ? 1.0 : -1.0) * std::exp(-x);
        v << val, val;
        return v;
      }};
      const PiecewiseField f(medium, std::move(pieces), DecayWitness{2.0, 1.0});
      double err = 0.0, tr = 0.0;
      for (const double lambda : {0.3, 1.0, 3.0, 9.0, 20.0, 45.0}) {
        PanelReport rep;
        const CVector img = forward(f, lambda, medium, coupling, q, &rep);
        err = std::max(err,
                       (img - CVector::Constant(2, 1.0 / (1.0 + lambda * lambda)))
                           .cwiseAbs()
                           .maxCoeff());
        tr = std::max(tr, rep.truncation_estimate + rep.tail_bound);
      }
      *trunc = tr;
      return err;
    };

    double tr1_c = 0.0, tr1_f = 0.0;
    const double e1_c = forward_err(coarse, &tr1_c);
    const double e1_f = forward_err(fine, &tr1_f);

    const RoundtripOutcome r_c = roundtrip_case(coarse, 20);
    const RoundtripOutcome r_f = roundtrip_case(fine, 20);

    // Criterion-3 style identity error on one deterministic case.
    std::mt19937_64 rng(seed ^ 0x853c49e6748fea9bULL);
    const auto identity_err = [&](const QuadratureSpec& q) {
      std::mt19937_64 local = rng;  // same field for both resolutions
      const ElasticSystem sys = build_coupling(two_layer_scenario(), 0.0);
      const PropagatedField pf = propagated_field(local, sys.medium, sys.coupling, 1.0);
      double worst = 0.0;
      for (const double lambda : {0.8, 2.0, 5.0, 11.0, 17.0}) {
        const CVector lhs = forward(pf.image_under_B, lambda, sys.medium, sys.coupling, q);
        const CVector rhs = operator_image(pf.field, lambda, sys.medium, sys.coupling, q);
        worst = std::max(worst,
                         (lhs - rhs).cwiseAbs().maxCoeff() /
                             ((1.0 + lambda * lambda) * pf.scale));
      }
      return worst;
    };
    const double e3_c = identity_err(coarse);
    const double e3_f = identity_err(fine);

    const bool ok1 = e1_f <= e1_c + tr1_c + 1e-13;
    const bool ok2 = r_f.max_rel_error <= r_c.max_rel_error + r_c.truncation + 1e-13;
    const bool ok3 = e3_f <= e3_c + 1e-13 + 1e-9;  // identity errors carry no separate estimate
    res.details.push_back("forward error coarse " + fmt(e1_c) + " -> fine " + fmt(e1_f) +
                          " (allowance " + fmt(tr1_c) + ")");
    res.details.push_back("roundtrip error coarse " + fmt(r_c.max_rel_error) + " -> fine " +
                          fmt(r_f.max_rel_error) + " (allowance " + fmt(r_c.truncation) + ")");
    res.details.push_back("identity error coarse " + fmt(e3_c) + " -> fine " + fmt(e3_f));
    res.pass = ok1 && ok2 && ok3;
  } catch (const std::exception& e) {
    res.pass = false;
    res.details.push_back(std::string("exception: ") + e.what());
  }
  res.seconds = timer.seconds();
  return res;
}

}  // namespace verify_detail

// Empty `indices` runs all eight criteria; otherwise only the listed ones,
// in fixed order.
inline std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt,
                                                   const std::vector<int>& indices) {
  const auto wanted = [&](int i) {
    if (indices.empty()) return true;
    for (int w : indices) {
      if (w == i) return true;
    }
    return false;
  };
  std::vector<CriterionResult> out;
  if (wanted(1)) out.push_back(verify_detail::criterion_classical());
  if (wanted(2)) out.push_back(verify_detail::criterion_roundtrip());
  if (wanted(3)) out.push_back(verify_detail::criterion_operational_identity(opt.seed));
  if (wanted(4)) out.push_back(verify_detail::criterion_eigen_structure(opt.seed));
  if (wanted(5)) out.push_back(verify_detail::criterion_duhamel(opt.seed));
  if (wanted(6)) out.push_back(verify_detail::criterion_halfspace_physics());
  if (wanted(7)) out.push_back(verify_detail::criterion_two_layer_conjugation());
  if (wanted(8)) out.push_back(verify_detail::criterion_refinement(opt.seed));
  return out;
}

inline std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt) {
  return run_acceptance(opt, {});
}

}  // namespace lamtrans
