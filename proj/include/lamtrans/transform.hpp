#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lamtrans/errors.hpp"
#include "lamtrans/linalg.hpp"
#include "lamtrans/medium.hpp"
#include "lamtrans/quadrature.hpp"
#include "lamtrans/spectral.hpp"

namespace lamtrans {

// Tail envelope ||f(x)|| <= C e^{-a (x - l_n)} for x >= l_n. The transform's
// spatial truncation is derived from it, so absolute integrability of the
// field is enforced structurally rather than probed.
struct DecayWitness {
  double C = 0.0;
  double a = 1.0;

  void validate() const {
    if (!(C >= 0.0) || !std::isfinite(C)) throw BadConfig("DecayWitness: C must be finite, >= 0");
    if (!(a > 0.0) || !std::isfinite(a)) throw BadConfig("DecayWitness: a must be finite, > 0");
  }
};

// Piecewise-smooth vector field over the layered half-line. Each piece is a
// callable (x, m) -> d^m f/dx^m valid on its closed layer interval, so
// one-sided limits at interfaces are plain endpoint evaluations of the
// adjacent pieces. Derivative orders 0..3 are part of the contract.
class PiecewiseField {
 public:
  using Piece = std::function<CVector(double, int)>;

  PiecewiseField(const MediumStack& medium, std::vector<Piece> pieces, DecayWitness witness,
                 bool lower_accuracy = false)
      : medium_(&medium),
        pieces_(std::move(pieces)),
        witness_(witness),
        lower_accuracy_(lower_accuracy) {
    witness_.validate();
    const int n = medium.n();
    if (static_cast<int>(pieces_.size()) != n + 1) {
      throw DimensionMismatch("PiecewiseField: expected " + std::to_string(n + 1) +
                              " pieces, got " + std::to_string(pieces_.size()));
    }
    for (int k = 1; k <= n + 1; ++k) {
      const double a = medium.left_endpoint(k);
      const double b = (k <= n) ? medium.interface(k) : a + 1.0;
      const CVector probe = eval_layer(k, 0.5 * (a + b), 0);
      if (probe.size() != medium.r() || !probe.allFinite()) {
        throw BadConfig("PiecewiseField: piece " + std::to_string(k) +
                        " must return a finite r-vector");
      }
    }
  }

  static PiecewiseField zero(const MediumStack& medium) {
    const int r = medium.r();
    std::vector<Piece> pieces(static_cast<size_t>(medium.n()) + 1,
                              [r](double, int) { return CVector(CVector::Zero(r)); });
    return PiecewiseField(medium, std::move(pieces), DecayWitness{0.0, 1.0});
  }

  const MediumStack& medium() const { return *medium_; }
  int r() const { return medium_->r(); }
  const DecayWitness& witness() const { return witness_; }
  bool lower_accuracy() const { return lower_accuracy_; }
  const Piece& piece(int layer) const { return pieces_.at(static_cast<size_t>(layer) - 1); }

  // One-sided evaluation on layer k's closed interval; m = derivative order.
  CVector eval_layer(int layer, double x, int m) const {
    if (m < 0 || m > 3) throw BadConfig("PiecewiseField: derivative order must be 0..3");
    CVector v = pieces_.at(static_cast<size_t>(layer) - 1)(x, m);
    if (v.size() != medium_->r()) {
      throw DimensionMismatch("PiecewiseField: piece " + std::to_string(layer) +
                              " returned wrong dimension");
    }
    return v;
  }

  CVector eval(double x, int m = 0) const { return eval_layer(medium_->layer_of(x), x, m); }

  // Optional declared support within one layer: integration clips to it.
  // An empty declared support (lo >= hi) marks the piece as identically zero.
  void set_layer_support(int layer, double lo, double hi) {
    if (supports_.empty()) {
      supports_.assign(pieces_.size(), {std::numeric_limits<double>::lowest(),
                                        std::numeric_limits<double>::max()});
    }
    supports_.at(static_cast<size_t>(layer) - 1) = {lo, hi};
  }

  // Clip [a, b] to the declared support of the layer; false means the
  // intersection is empty and the integral over [a, b] vanishes.
  bool clip_to_support(int layer, double& a, double& b) const {
    if (supports_.empty()) return true;
    const auto& s = supports_.at(static_cast<size_t>(layer) - 1);
    a = std::max(a, s.first);
    b = std::min(b, s.second);
    return b > a;
  }

 private:
  const MediumStack* medium_;
  std::vector<Piece> pieces_;
  DecayWitness witness_;
  bool lower_accuracy_;
  std::vector<std::pair<double, double>> supports_;
};

// a*f + b*g over the same medium; the witness envelopes add.
inline PiecewiseField linear_combination(double a, const PiecewiseField& f, double b,
                                         const PiecewiseField& g) {
  if (&f.medium() != &g.medium()) {
    throw BadConfig("linear_combination: fields must share one medium");
  }
  const int n = f.medium().n();
  std::vector<PiecewiseField::Piece> pieces;
  pieces.reserve(static_cast<size_t>(n) + 1);
  for (int k = 1; k <= n + 1; ++k) {
    PiecewiseField::Piece pf = f.piece(k), pg = g.piece(k);
    pieces.push_back([a, b, pf, pg](double x, int m) {
      return CVector(a * pf(x, m) + b * pg(x, m));
    });
  }
  DecayWitness w{std::abs(a) * f.witness().C + std::abs(b) * g.witness().C,
                 std::min(f.witness().a, g.witness().a)};
  return PiecewiseField(f.medium(), std::move(pieces), w,
                        f.lower_accuracy() || g.lower_accuracy());
}

namespace detail {

// Natural cubic spline with complex vector values; supports derivative
// orders 0..3 (the third derivative is piecewise constant). Outside the knot
// range it evaluates to zero, which the decay witness must cover.
class ComplexSpline {
 public:
  ComplexSpline() = default;

  ComplexSpline(std::vector<double> x, std::vector<CVector> y) : x_(std::move(x)) {
    const int n = static_cast<int>(x_.size());
    if (n < 2) throw BadConfig("ComplexSpline: needs at least two knots");
    if (static_cast<int>(y.size()) != n) {
      throw DimensionMismatch("ComplexSpline: knot/value count mismatch");
    }
    for (int i = 1; i < n; ++i) {
      if (!(x_[static_cast<size_t>(i)] > x_[static_cast<size_t>(i - 1)])) {
        throw BadConfig("ComplexSpline: knots must be strictly increasing");
      }
    }
    const int r = static_cast<int>(y[0].size());
    y_.resize(n, r);
    for (int i = 0; i < n; ++i) {
      if (y[static_cast<size_t>(i)].size() != r) {
        throw DimensionMismatch("ComplexSpline: inconsistent value dimension");
      }
      y_.row(i) = y[static_cast<size_t>(i)].transpose();
    }
    m2_ = Eigen::MatrixXcd::Zero(n, r);
    if (n > 2) {
      // Tridiagonal system for interior second derivatives; n stays small
      // enough that a dense solve is simplest.
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n - 2, n - 2);
      Eigen::MatrixXcd rhs(n - 2, r);
      for (int i = 1; i <= n - 2; ++i) {
        const double h0 = x_[static_cast<size_t>(i)] - x_[static_cast<size_t>(i - 1)];
        const double h1 = x_[static_cast<size_t>(i + 1)] - x_[static_cast<size_t>(i)];
        T(i - 1, i - 1) = 2.0 * (h0 + h1);
        if (i > 1) T(i - 1, i - 2) = h0;
        if (i < n - 2) T(i - 1, i) = h1;
        rhs.row(i - 1) =
            6.0 * ((y_.row(i + 1) - y_.row(i)) / h1 - (y_.row(i) - y_.row(i - 1)) / h0);
      }
      const Eigen::MatrixXcd Tc = T.cast<Complex>();
      m2_.block(1, 0, n - 2, r) = Tc.partialPivLu().solve(rhs);
    }
  }

  double front() const { return x_.front(); }
  double back() const { return x_.back(); }

  CVector eval(double t, int m) const {
    const int n = static_cast<int>(x_.size());
    const int r = static_cast<int>(y_.cols());
    if (t < x_.front() || t > x_.back()) return CVector::Zero(r);
    int i = static_cast<int>(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin()) - 1;
    i = std::min(std::max(i, 0), n - 2);
    const double h = x_[static_cast<size_t>(i + 1)] - x_[static_cast<size_t>(i)];
    const double dt = t - x_[static_cast<size_t>(i)];
    const Eigen::RowVectorXcd a = y_.row(i);
    const Eigen::RowVectorXcd c = 0.5 * m2_.row(i);
    const Eigen::RowVectorXcd d = (m2_.row(i + 1) - m2_.row(i)) / (6.0 * h);
    const Eigen::RowVectorXcd b = (y_.row(i + 1) - y_.row(i)) / h -
                                  (h / 6.0) * (2.0 * m2_.row(i) + m2_.row(i + 1));
    switch (m) {
      case 0: return (a + dt * (b + dt * (c + dt * d))).transpose();
      case 1: return (b + dt * (2.0 * c + dt * 3.0 * d)).transpose();
      case 2: return (2.0 * c + 6.0 * dt * d).transpose();
      case 3: return (6.0 * d).transpose();
      default: throw BadConfig("ComplexSpline: derivative order must be 0..3");
    }
  }

 private:
  std::vector<double> x_;
  Eigen::MatrixXcd y_;   // one knot per row
  Eigen::MatrixXcd m2_;  // second derivatives at knots
};

}  // namespace detail

// Build a field from per-layer samples via natural cubic splines. Flagged
// lower-accuracy: interface derivative limits carry O(h^2) interpolation
// error, unlike analytic pieces.
inline PiecewiseField make_sampled_field(const MediumStack& medium,
                                         const std::vector<std::vector<double>>& layer_x,
                                         const std::vector<std::vector<CVector>>& layer_values,
                                         DecayWitness witness) {
  const int n = medium.n();
  if (static_cast<int>(layer_x.size()) != n + 1 ||
      static_cast<int>(layer_values.size()) != n + 1) {
    throw DimensionMismatch("make_sampled_field: expected " + std::to_string(n + 1) +
                            " per-layer sample sets");
  }
  std::vector<PiecewiseField::Piece> pieces;
  pieces.reserve(static_cast<size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    auto spline = std::make_shared<detail::ComplexSpline>(layer_x[static_cast<size_t>(k)],
                                                          layer_values[static_cast<size_t>(k)]);
    pieces.push_back([spline](double x, int m) { return spline->eval(x, m); });
  }
  return PiecewiseField(medium, std::move(pieces), witness, /*lower_accuracy=*/true);
}

// Sampled transform image over a sorted positive grid; the panel metadata
// aggregates the quadrature work behind the values.
struct TransformImage {
  std::vector<double> nodes;
  std::vector<CVector> values;
  PanelReport quadrature;

  void validate() const {
    if (nodes.size() != values.size()) {
      throw DimensionMismatch("TransformImage: node/value count mismatch");
    }
    if (nodes.empty()) throw BadConfig("TransformImage: empty image");
    if (!(nodes.front() > 0.0)) throw BadConfig("TransformImage: nodes must be positive");
    const Eigen::Index r = values.front().size();
    for (size_t i = 0; i < nodes.size(); ++i) {
      if (i > 0 && !(nodes[i] > nodes[i - 1])) {
        throw BadConfig("TransformImage: nodes must be strictly increasing");
      }
      if (values[i].size() != r || !values[i].allFinite()) {
        throw NonFiniteEntry("TransformImage: value at node " + std::to_string(i) +
                             " is malformed");
      }
    }
  }
};

namespace detail {

inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// CSV layout: lambda, re_1, im_1, ..., re_r, im_r.
inline void write_image_csv(const TransformImage& image, std::ostream& os) {
  image.validate();
  const int r = static_cast<int>(image.values.front().size());
  os << "lambda";
  for (int c = 1; c <= r; ++c) os << ",re_" << c << ",im_" << c;
  os << "\n";
  for (size_t i = 0; i < image.nodes.size(); ++i) {
    os << detail::fmt_g17(image.nodes[i]);
    for (int c = 0; c < r; ++c) {
      os << "," << detail::fmt_g17(image.values[i](c).real()) << ","
         << detail::fmt_g17(image.values[i](c).imag());
    }
    os << "\n";
  }
}

inline TransformImage read_image_csv(std::istream& is) {
  TransformImage image;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> tok;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) tok.push_back(cell);
    if (tok.empty()) continue;
    char* end = nullptr;
    const double lam = std::strtod(tok[0].c_str(), &end);
    if (end == tok[0].c_str()) continue;  // header row
    if (tok.size() < 3 || tok.size() % 2 == 0) {
      throw BadConfig("read_image_csv: row needs lambda plus re/im pairs");
    }
    const int r = static_cast<int>((tok.size() - 1) / 2);
    CVector v(r);
    for (int c = 0; c < r; ++c) {
      v(c) = Complex(std::stod(tok[static_cast<size_t>(2 * c + 1)]),
                     std::stod(tok[static_cast<size_t>(2 * c + 2)]));
    }
    image.nodes.push_back(lam);
    image.values.push_back(std::move(v));
  }
  image.validate();
  return image;
}

// --- truncation resolution -------------------------------------------------

// Spectral truncation: explicit when set, otherwise scaled to the finest
// layer (thin layers push structure to higher lambda).
inline double resolve_lambda_max(const QuadratureSpec& quad, const MediumStack& medium) {
  if (quad.lambda_max != 0.0) return quad.lambda_max;
  const double t = medium.min_layer_thickness();
  const double scale = std::isfinite(t) ? std::min(1.0, t) : 1.0;
  return std::min(200.0 / std::max(scale, 1e-3), 1e5);
}

// Spatial truncation from the decay witness: auto mode places x_max so the
// neglected tail mass (C/a) e^{-a (x_max - l_n)} is 1e-10 of the witness
// scale. A pinned x_max is checked against the same bound.
inline double resolve_x_max(const QuadratureSpec& quad, const MediumStack& medium,
                            const DecayWitness& witness) {
  witness.validate();
  const double ln = medium.ln();
  if (quad.x_max != 0.0) {
    if (!(quad.x_max > ln)) {
      throw BadConfig("resolve_x_max: x_max must exceed the last interface");
    }
    const double bound = (witness.C / witness.a) * std::exp(-witness.a * (quad.x_max - ln));
    if (bound > 1e-6 * std::max(1.0, witness.C / witness.a)) {
      std::ostringstream os;
      os << "resolve_x_max: decay witness too weak for x_max=" << quad.x_max
         << " (neglected tail bound " << bound << ")";
      throw TailNotResolved(os.str());
    }
    return quad.x_max;
  }
  if (witness.C == 0.0) return ln + 1.0;
  const double span = std::log(1e10) / witness.a;
  if (!(span < 1e5)) {
    std::ostringstream os;
    os << "resolve_x_max: decay witness too weak (rate a=" << witness.a
       << " needs tail span " << span << ")";
    throw TailNotResolved(os.str());
  }
  return ln + span;
}

namespace detail {

inline bool exactly_zero(const CMatrix& m) { return m.max_abs() == 0.0; }

inline bool corrections_vanish(const InterfaceCoupling& c) {
  for (int j = 0; j < 2; ++j) {
    for (int m = 0; m < 2; ++m) {
      if (!exactly_zero(c.gamma[j][m]) || !exactly_zero(c.delta[j][m])) return false;
    }
  }
  return true;
}

// The 2r jump vector [gamma_{1m} v + delta_{1m} d; gamma_{2m} v + delta_{2m} d]
// for side m of one interface.
inline CVector side_jump(const InterfaceCoupling& c, int m, const CVector& value,
                         const CVector& deriv) {
  const int r = c.r();
  CVector s(2 * r);
  for (int j = 0; j < 2; ++j) {
    s.segment(j * r, r) = c.gamma[j][m - 1].m() * value + c.delta[j][m - 1].m() * deriv;
  }
  return s;
}

inline double max_wave_freq(const SpectralBasis& basis, int layer) {
  return basis.phi(layer).cache->w.cwiseAbs().maxCoeff();
}

}  // namespace detail

// Direct transform at one spectral node, reusing a prebuilt basis:
//   f~(lambda) = int_{l0}^inf u*(xi) f(xi) dxi
//              + gamma0 f_1(l0) + delta0 f_1'(l0)
//              + sum_k (Phi0,Psi0) Omega_k^{-1}(l_k) M_{1k}^{-1}
//                      [S_2^k (f_{k+1}, f_{k+1}')(l_k) - S_1^k (f_k, f_k')(l_k)].
// Correction terms whose gamma/delta blocks are all zero are skipped, so a
// derivative-free coupling takes the bare-integral path bit for bit.
inline CVector forward_with_basis(const PiecewiseField& f, const SpectralBasis& basis,
                                  const CouplingSet& coupling, const QuadratureSpec& quad,
                                  PanelReport* report = nullptr) {
  quad.validate();
  const MediumStack& medium = basis.medium();
  if (&medium != &f.medium()) throw BadConfig("forward: field and basis media differ");
  const SpectralParameter sp(basis.lambda());
  const int r = medium.r();
  const int n = medium.n();
  const double x_max = resolve_x_max(quad, medium, f.witness());

  PanelReport rep;
  PanelIntegrator integ(quad.panel_tol, quad.max_panels);
  CVector total = CVector::Zero(r);
  for (int m = 1; m <= n + 1; ++m) {
    double a = medium.left_endpoint(m);
    double b = (m <= n) ? medium.interface(m) : x_max;
    if (!(b > a)) continue;
    if (!f.clip_to_support(m, a, b)) continue;
    const double max_len = quarter_period_len(detail::max_wave_freq(basis, m), b - a);
    const auto integrand = [&](double xi) {
      return CVector(dual_u_layer(basis, m, xi, 0).m() * f.eval_layer(m, xi, 0));
    };
    PanelReport seg;
    total += integ.integrate(integrand, a, b, max_len, &seg);
    rep.absorb(seg);
  }

  // Analytic bound on the neglected spatial tail, using a sampled envelope of
  // the dual kernel past x_max.
  if (f.witness().C > 0.0) {
    double kernel_scale = 0.0;
    for (double frac : {0.0, 0.5, 1.0}) {
      const double xi = x_max + frac;
      kernel_scale = std::max(kernel_scale, dual_u_layer(basis, n + 1, xi, 0).norm());
    }
    rep.tail_bound = kernel_scale * (f.witness().C / f.witness().a) *
                     std::exp(-f.witness().a * (x_max - medium.ln()));
  }

  const BoundaryQuad& b0 = coupling.boundary;
  if (!detail::exactly_zero(b0.gamma) || !detail::exactly_zero(b0.delta)) {
    const double l0 = medium.l0();
    total += b0.gamma.m() * f.eval_layer(1, l0, 0) + b0.delta.m() * f.eval_layer(1, l0, 1);
  }

  for (int k = 1; k <= n; ++k) {
    const InterfaceCoupling& c = coupling.at_interface(k);
    if (detail::corrections_vanish(c)) continue;
    const double lk = medium.interface(k);
    const Eigen::MatrixXcd row = dual_row(basis, k, lk);  // r x 2r
    const CMatrix M1 = assemble_M(coupling, 1, k, sp);
    Eigen::MatrixXcd row_m1inv;
    try {
      row_m1inv = block_solve(Eigen::MatrixXcd(M1.m().transpose()),
                              Eigen::MatrixXcd(row.transpose()))
                      .transpose();
    } catch (const SingularSystem& e) {
      throw SingularSystem("forward: M_1" + std::to_string(k) + " not invertible at lambda=" +
                           std::to_string(basis.lambda()) + ": " + e.what());
    }
    const CVector s2 = detail::side_jump(c, 2, f.eval_layer(k + 1, lk, 0), f.eval_layer(k + 1, lk, 1));
    const CVector s1 = detail::side_jump(c, 1, f.eval_layer(k, lk, 0), f.eval_layer(k, lk, 1));
    total += row_m1inv * (s2 - s1);
  }

  if (report) *report = rep;
  return total;
}

inline CVector forward(const PiecewiseField& f, double lambda, const MediumStack& medium,
                       const CouplingSet& coupling, const QuadratureSpec& quad,
                       PanelReport* report = nullptr) {
  SpectralBasis basis = build_basis(medium, coupling, lambda);
  return forward_with_basis(f, basis, coupling, quad, report);
}

// Forward image sampled on a uniform grid over [epsilon, lambda_max]; the
// serializable product behind the CLI and the image-based inverse.
inline TransformImage sample_forward(const PiecewiseField& f, const MediumStack& medium,
                                     const CouplingSet& coupling, const QuadratureSpec& quad,
                                     int num_nodes) {
  if (num_nodes < 2) throw BadConfig("sample_forward: need at least two nodes");
  quad.validate();
  const double lam_max = resolve_lambda_max(quad, medium);
  TransformImage image;
  image.nodes.reserve(static_cast<size_t>(num_nodes));
  image.values.reserve(static_cast<size_t>(num_nodes));
  for (int i = 0; i < num_nodes; ++i) {
    const double lam =
        quad.epsilon + (lam_max - quad.epsilon) * static_cast<double>(i) / (num_nodes - 1);
    PanelReport rep;
    CVector v;
    try {
      v = forward(f, lam, medium, coupling, quad, &rep);
    } catch (const SingularBoundaryImage&) {
      continue;  // isolated singular node: drop it, neighbors carry the image
    } catch (const SingularWronskian&) {
      continue;
    }
    image.nodes.push_back(lam);
    image.values.push_back(std::move(v));
    image.quadrature.absorb(rep);
  }
  image.validate();
  return image;
}

// Inverse prefactor -1/(pi i) = i/pi; the sign/scale pair is pinned by the
// classical sine-inversion reduction in the tests.
inline constexpr Complex kInversePrefactor{0.0, 1.0 / M_PI};

// lambda-oscillation rate of u(x, lambda): phases accumulate at most
// (x - l0) + (l_n - l0) of path length over speeds >= min_speed.
inline double inverse_oscillation_rate(const MediumStack& medium, double x) {
  const double path = std::abs(x - medium.l0()) + (medium.ln() - medium.l0());
  return std::max(path, 1e-3) / std::max(medium.min_speed(), 1e-12);
}

// Inverse transform of a continuous image evaluator:
//   f(x) = -(1/(pi i)) int_0^inf lambda u(x, lambda) ftilde(lambda) dlambda,
// truncated to [epsilon, lambda_max] with the last-decade norm reported as
// the truncation estimate.
inline CVector inverse_fn(const std::function<CVector(double)>& ftilde, double x,
                          const MediumStack& medium, const CouplingSet& coupling,
                          const QuadratureSpec& quad, PanelReport* report = nullptr) {
  quad.validate();
  const double lam_max = resolve_lambda_max(quad, medium);
  const double max_len = quarter_period_len(inverse_oscillation_rate(medium, x),
                                            lam_max - quad.epsilon);
  PanelIntegrator integ(quad.panel_tol, quad.max_panels);
  const auto integrand = [&](double lam) {
    SpectralBasis basis = build_basis(medium, coupling, lam);
    return CVector(lam * (spectral_u(basis, x).m() * ftilde(lam)));
  };
  PanelReport rep;
  CVector raw = integ.integrate(integrand, quad.epsilon, lam_max, max_len, &rep);
  if (report) *report = rep;
  return kInversePrefactor * raw;
}

// Inverse of a sampled image: cubic interpolation bridges the nodes, and the
// integration range is clipped to the sampled support.
inline CVector inverse(const TransformImage& image, double x, const MediumStack& medium,
                       const CouplingSet& coupling, const QuadratureSpec& quad,
                       PanelReport* report = nullptr) {
  image.validate();
  auto spline = std::make_shared<detail::ComplexSpline>(image.nodes, image.values);
  QuadratureSpec clipped = quad;
  clipped.epsilon = std::max(quad.epsilon, image.nodes.front());
  clipped.lambda_max = std::min(resolve_lambda_max(quad, medium), image.nodes.back());
  if (!(clipped.epsilon < clipped.lambda_max)) {
    throw BadConfig("inverse: image support does not cover the integration range");
  }
  return inverse_fn([spline](double lam) { return spline->eval(lam, 0); }, x, medium, coupling,
                    clipped, report);
}

// Right-hand side of the operational identity. Pairing B f against the dual
// kernel and integrating by parts twice, the bare-integral part obeys
//   int u* (B f) = -lambda^2 int u* f
//                  - [(beta0 + lambda^2 gamma0) f(l0) + (alpha0 + lambda^2 delta0) f'(l0)]
// through the exact dual traces u*(l0) A_1^2 = alpha0 + lambda^2 delta0,
// u*'(l0) A_1^2 = -(beta0 + lambda^2 gamma0), once the conjugation conditions
// make the concomitant u* A^2 f' - u*' A^2 f continuous at the interfaces.
// Folding in the transform's own gamma/delta correction terms on both sides
// leaves, with g = B f + lambda^2 f,
//   F[B f](lambda) = -lambda^2 f~(lambda) - [beta0 f(l0) + alpha0 f'(l0)]
//                    + gamma0 (B f)(l0) + delta0 (B f)'(l0)
//                    + sum_k (Phi0,Psi0) Omega_k^{-1} M_1k^{-1} [S_2^k(g) - S_1^k(g)],
// the interface sum running over the same jump functionals the transform
// applies to f, here applied to g. Requires f to satisfy the interface
// conjugation conditions; the residual guard rejects fields outside the
// identity's hypotheses.
inline CVector operator_image(const PiecewiseField& f, double lambda, const MediumStack& medium,
                              const CouplingSet& coupling, const QuadratureSpec& quad,
                              PanelReport* report = nullptr) {
  const SpectralParameter sp(lambda);
  const int r = medium.r();
  for (int k = 1; k <= medium.n(); ++k) {
    const double lk = medium.interface(k);
    CVector v1(2 * r), v2(2 * r);
    v1 << f.eval_layer(k, lk, 0), f.eval_layer(k, lk, 1);
    v2 << f.eval_layer(k + 1, lk, 0), f.eval_layer(k + 1, lk, 1);
    const CMatrix M1 = assemble_M(coupling, 1, k, sp);
    const CMatrix M2 = assemble_M(coupling, 2, k, sp);
    const CVector lhs = M1.m() * v1;
    const CVector rhs = M2.m() * v2;
    const double denom = std::max({M1.norm() * v1.norm(), M2.norm() * v2.norm(), 1e-300});
    const double residual = (lhs - rhs).norm() / denom;
    if (residual > 1e-6) {
      std::ostringstream os;
      os << "operator_image: conjugation residual " << residual << " at interface " << k
         << " exceeds 1e-6; identity hypotheses not met";
      throw HypothesisViolated(os.str());
    }
  }

  const SpectralBasis basis = build_basis(medium, coupling, lambda);
  const CVector ft = forward_with_basis(f, basis, coupling, quad, report);
  const double l0 = medium.l0();
  const double l2 = lambda * lambda;
  const Layer& first = medium.layer(1);
  const CVector f0 = f.eval_layer(1, l0, 0);
  const CVector f1 = f.eval_layer(1, l0, 1);
  const CVector bf0 = first.A_sq.m() * f.eval_layer(1, l0, 2) + first.Gamma_sq.m() * f0;
  const CVector bf1 = first.A_sq.m() * f.eval_layer(1, l0, 3) + first.Gamma_sq.m() * f1;
  const BoundaryQuad& b = coupling.boundary;
  CVector total = -l2 * ft - (b.beta.m() * f0 + b.alpha.m() * f1) + b.gamma.m() * bf0 +
                  b.delta.m() * bf1;

  // Interface corrections of the transform, applied to g = B f + lambda^2 f.
  for (int k = 1; k <= medium.n(); ++k) {
    const InterfaceCoupling& c = coupling.at_interface(k);
    if (detail::corrections_vanish(c)) continue;
    const double lk = medium.interface(k);
    const Eigen::MatrixXcd row = dual_row(basis, k, lk);
    const CMatrix M1 = assemble_M(coupling, 1, k, sp);
    const Eigen::MatrixXcd row_m1inv = block_solve(Eigen::MatrixXcd(M1.m().transpose()),
                                                   Eigen::MatrixXcd(row.transpose()))
                                           .transpose();
    const auto g_traces = [&](int side, CVector& gv, CVector& gd) {
      const Layer& lay = medium.layer(side);
      const Eigen::MatrixXcd low =
          l2 * Eigen::MatrixXcd::Identity(r, r) + lay.Gamma_sq.m();
      gv = lay.A_sq.m() * f.eval_layer(side, lk, 2) + low * f.eval_layer(side, lk, 0);
      gd = lay.A_sq.m() * f.eval_layer(side, lk, 3) + low * f.eval_layer(side, lk, 1);
    };
    CVector g1v(r), g1d(r), g2v(r), g2d(r);
    g_traces(k, g1v, g1d);
    g_traces(k + 1, g2v, g2d);
    const CVector s2 = detail::side_jump(c, 2, g2v, g2d);
    const CVector s1 = detail::side_jump(c, 1, g1v, g1d);
    total += row_m1inv * (s2 - s1);
  }
  return total;
}

// Round-trip diagnostics driving the acceptance gate.
struct RoundtripReport {
  std::vector<double> x;
  std::vector<CVector> reference;      // f at each sample
  std::vector<CVector> reconstructed;  // inverse(forward(f)) at each sample
  std::vector<double> abs_error;
  double field_scale = 0.0;    // max ||f(x)|| over the samples
  double max_rel_error = 0.0;  // max abs_error / field_scale
  double truncation_estimate = 0.0;
  PanelReport inverse_quadrature;
  PanelReport forward_quadrature;  // aggregated over every forward evaluation
};

// inverse(forward(f)) compared with f on the sample grid. All samples share
// one lambda integration of the stacked integrand, so the forward image is
// computed once per lambda node and the panel layout is deterministic.
inline RoundtripReport decompose_roundtrip(const PiecewiseField& f,
                                           const std::vector<double>& x_samples,
                                           const MediumStack& medium,
                                           const CouplingSet& coupling,
                                           const QuadratureSpec& quad) {
  if (x_samples.empty()) throw BadConfig("decompose_roundtrip: empty sample grid");
  quad.validate();
  const int r = medium.r();
  const int s = static_cast<int>(x_samples.size());
  const double lam_max = resolve_lambda_max(quad, medium);
  double rate = 1e-3;
  for (double x : x_samples) rate = std::max(rate, inverse_oscillation_rate(medium, x));
  const double max_len = quarter_period_len(rate, lam_max - quad.epsilon);

  RoundtripReport out;
  out.x = x_samples;
  PanelIntegrator integ(quad.panel_tol, quad.max_panels);
  const auto integrand = [&](double lam) {
    SpectralBasis basis = build_basis(medium, coupling, lam);
    PanelReport frep;
    const CVector ft = forward_with_basis(f, basis, coupling, quad, &frep);
    out.forward_quadrature.absorb(frep);
    CVector stacked(r * s);
    for (int i = 0; i < s; ++i) {
      stacked.segment(i * r, r) = lam * (spectral_u(basis, x_samples[static_cast<size_t>(i)]).m() * ft);
    }
    return stacked;
  };
  PanelReport rep;
  const CVector raw = integ.integrate(integrand, quad.epsilon, lam_max, max_len, &rep);
  out.inverse_quadrature = rep;
  out.truncation_estimate = rep.truncation_estimate;

  out.abs_error.resize(static_cast<size_t>(s));
  out.reference.reserve(static_cast<size_t>(s));
  out.reconstructed.reserve(static_cast<size_t>(s));
  for (int i = 0; i < s; ++i) {
    const CVector rec = kInversePrefactor * raw.segment(i * r, r);
    const CVector ref = f.eval(x_samples[static_cast<size_t>(i)], 0);
    out.abs_error[static_cast<size_t>(i)] = (rec - ref).norm();
    out.field_scale = std::max(out.field_scale, ref.norm());
    out.reference.push_back(ref);
    out.reconstructed.push_back(rec);
  }
  for (double e : out.abs_error) {
    out.max_rel_error = std::max(out.max_rel_error, e / std::max(out.field_scale, 1e-300));
  }
  return out;
}

}  // namespace lamtrans
