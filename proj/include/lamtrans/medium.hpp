#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "lamtrans/errors.hpp"
#include "lamtrans/linalg.hpp"

namespace lamtrans {

// Spectral variable of the continuous spectrum; strictly positive.
struct SpectralParameter {
  double lambda;

  explicit SpectralParameter(double l) : lambda(l) {
    if (!(l > 0.0) || !std::isfinite(l)) {
      throw BadConfig("SpectralParameter: lambda must be positive and finite, got " +
                      std::to_string(l));
    }
  }
};

// One homogeneous layer of the vector ODE A^2 y'' + (lambda^2 E + Gamma^2) y = 0.
// A_sq is positive-definite, Gamma_sq positive-semi-definite; both are stored
// complex because the elasticity coupling injects imaginary entries elsewhere
// and a single scalar type keeps one code path.
struct Layer {
  CMatrix A_sq;
  CMatrix Gamma_sq;
  CMatrix A_sq_inv;          // cached
  bool gamma_semidefinite = false;  // true when Gamma^2 has a (near-)zero eigenvalue
};

// The layered half-line: interfaces l_0 < l_1 < ... < l_n and n+1 layers,
// the last one semi-infinite (x > l_n). Layer indices are 1-based to match
// the interface numbering: layer m occupies (l_{m-1}, l_m), layer n+1 the tail.
class MediumStack {
 public:
  MediumStack(int r, std::vector<double> interfaces, std::vector<Layer> layers)
      : r_(r), interfaces_(std::move(interfaces)), layers_(std::move(layers)) {}

  int r() const { return r_; }
  int n() const { return static_cast<int>(interfaces_.size()) - 1; }
  int num_layers() const { return static_cast<int>(layers_.size()); }
  const std::vector<double>& interfaces() const { return interfaces_; }
  double l0() const { return interfaces_.front(); }
  double ln() const { return interfaces_.back(); }
  double interface(int k) const { return interfaces_.at(static_cast<size_t>(k)); }

  const Layer& layer(int m) const { return layers_.at(static_cast<size_t>(m) - 1); }

  // Left endpoint of layer m; every layer's exponential representation is
  // anchored there to keep phases bounded.
  double left_endpoint(int m) const { return interfaces_.at(static_cast<size_t>(m) - 1); }

  // Layer containing x; interface points resolve to the layer on their right
  // so that one-sided limits are requested explicitly by the caller.
  int layer_of(double x) const {
    if (x < l0()) {
      throw BadConfig("MediumStack: x = " + std::to_string(x) + " precedes the boundary l0");
    }
    for (int k = 1; k <= n(); ++k) {
      if (x < interfaces_[static_cast<size_t>(k)]) return k;
    }
    return n() + 1;
  }

  double min_layer_thickness() const {
    double t = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= n(); ++k) {
      t = std::min(t, interfaces_[static_cast<size_t>(k)] - interfaces_[static_cast<size_t>(k - 1)]);
    }
    return t;
  }

  // Slowest propagation speed across layers: sqrt of the smallest eigenvalue
  // of any A^2. Sets the densest oscillation scale the quadrature must track.
  double min_speed() const {
    double s = std::numeric_limits<double>::infinity();
    for (const Layer& lay : layers_) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(lay.A_sq.m());
      s = std::min(s, std::sqrt(std::max(es.eigenvalues().minCoeff(), 0.0)));
    }
    return s;
  }

 private:
  int r_;
  std::vector<double> interfaces_;
  std::vector<Layer> layers_;
};

namespace detail {

inline void require_psd(const CMatrix& M, double strict_floor, int layer_index, const char* name,
                        bool* semidefinite_flag) {
  if (!is_hermitian(M.m(), 1e-10)) {
    throw NotPositiveDefinite(std::string("layer ") + std::to_string(layer_index) + ": " + name +
                              " is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M.m());
  const double scale = std::max(M.norm(), 1.0);
  const double wmin = es.eigenvalues().minCoeff();
  if (wmin < -1e-12 * scale) {
    std::ostringstream os;
    os << "layer " << layer_index << ": " << name << " has eigenvalue " << wmin
       << " below -1e-12*scale";
    throw NotPositiveDefinite(os.str());
  }
  if (strict_floor > 0.0 && wmin <= strict_floor * scale) {
    std::ostringstream os;
    os << "layer " << layer_index << ": " << name << " must be strictly positive-definite, "
       << "min eigenvalue " << wmin;
    throw NotPositiveDefinite(os.str());
  }
  if (semidefinite_flag && wmin <= 1e-12 * scale) *semidefinite_flag = true;
}

}  // namespace detail

// Validate geometry and layer matrices eagerly and cache A^{-2}. Gamma^2 may
// be singular (homogeneous limit); that is flagged on the layer, not rejected.
inline MediumStack build_medium(int r, const std::vector<double>& interfaces,
                                std::vector<Layer> layers) {
  if (r < 1) throw BadConfig("build_medium: r must be >= 1");
  if (interfaces.empty()) throw BadConfig("build_medium: needs at least the boundary point l0");
  for (double l : interfaces) {
    if (!std::isfinite(l)) throw BadConfig("build_medium: non-finite interface abscissa");
  }
  for (size_t i = 1; i < interfaces.size(); ++i) {
    if (!(interfaces[i] > interfaces[i - 1])) {
      std::ostringstream os;
      os << "build_medium: interfaces must be strictly increasing, got l[" << i - 1
         << "]=" << interfaces[i - 1] << ", l[" << i << "]=" << interfaces[i];
      throw NonIncreasingInterfaces(os.str());
    }
  }
  const int n = static_cast<int>(interfaces.size()) - 1;
  if (static_cast<int>(layers.size()) != n + 1) {
    throw DimensionMismatch("build_medium: expected " + std::to_string(n + 1) + " layers, got " +
                            std::to_string(layers.size()));
  }
  for (int m = 1; m <= n + 1; ++m) {
    Layer& lay = layers[static_cast<size_t>(m) - 1];
    if (lay.A_sq.dim() != r || lay.Gamma_sq.dim() != r) {
      throw DimensionMismatch("build_medium: layer " + std::to_string(m) +
                              " matrices must be r x r with r = " + std::to_string(r));
    }
    detail::require_psd(lay.A_sq, 1e-14, m, "A_sq", nullptr);
    detail::require_psd(lay.Gamma_sq, 0.0, m, "Gamma_sq", &lay.gamma_semidefinite);
    lay.A_sq_inv = CMatrix(Eigen::MatrixXcd(lay.A_sq.m().inverse()));
  }
  return MediumStack(r, interfaces, std::move(layers));
}

// Boundary coupling quadruple at l_0: the condition is
// [(alpha + lambda^2 delta) d/dx + (beta + lambda^2 gamma)] y_1 = 0.
struct BoundaryQuad {
  CMatrix alpha, beta, gamma, delta;

  int r() const { return alpha.dim(); }
};

// Conjugation coupling at one interface: for condition j in {1,2} and side
// m in {1 left / layer k, 2 right / layer k+1},
// [(alpha_{j1}+lambda^2 delta_{j1}) d/dx + (beta_{j1}+lambda^2 gamma_{j1})] y_k
//   = [(alpha_{j2}+lambda^2 delta_{j2}) d/dx + (beta_{j2}+lambda^2 gamma_{j2})] y_{k+1}.
struct InterfaceCoupling {
  // Indexed [j-1][m-1].
  CMatrix alpha[2][2], beta[2][2], gamma[2][2], delta[2][2];

  int r() const { return alpha[0][0].dim(); }
};

struct CouplingSet {
  BoundaryQuad boundary;
  std::vector<InterfaceCoupling> interfaces;  // index k-1 for interface k = 1..n

  int r() const { return boundary.r(); }
  int n() const { return static_cast<int>(interfaces.size()); }

  const InterfaceCoupling& at_interface(int k) const {
    if (k < 1 || k > n()) {
      throw BadConfig("CouplingSet: interface index " + std::to_string(k) + " out of range 1.." +
                      std::to_string(n()));
    }
    return interfaces[static_cast<size_t>(k) - 1];
  }

  void validate(int r_expected, int n_expected) const {
    auto check = [&](const CMatrix& m, const std::string& who) {
      if (m.dim() != r_expected) {
        throw DimensionMismatch("CouplingSet: " + who + " must be " + std::to_string(r_expected) +
                                "x" + std::to_string(r_expected));
      }
    };
    check(boundary.alpha, "boundary alpha");
    check(boundary.beta, "boundary beta");
    check(boundary.gamma, "boundary gamma");
    check(boundary.delta, "boundary delta");
    if (n() != n_expected) {
      throw DimensionMismatch("CouplingSet: expected " + std::to_string(n_expected) +
                              " interface couplings, got " + std::to_string(n()));
    }
    for (int k = 1; k <= n(); ++k) {
      const InterfaceCoupling& c = at_interface(k);
      for (int j = 0; j < 2; ++j) {
        for (int m = 0; m < 2; ++m) {
          const std::string who = "interface " + std::to_string(k) + " block (j=" +
                                  std::to_string(j + 1) + ", m=" + std::to_string(m + 1) + ")";
          check(c.alpha[j][m], who + " alpha");
          check(c.beta[j][m], who + " beta");
          check(c.gamma[j][m], who + " gamma");
          check(c.delta[j][m], who + " delta");
        }
      }
    }
  }
};

// The 2r x 2r interface block for side m at interface k:
//   rows: condition j = 1 block on top, j = 2 block below;
//   columns: value coefficients (beta + lambda^2 gamma) first, then
//            derivative coefficients (alpha + lambda^2 delta).
inline CMatrix assemble_M(const CouplingSet& coupling, int m, int k, const SpectralParameter& sp) {
  if (m != 1 && m != 2) throw BadConfig("assemble_M: side m must be 1 or 2");
  const InterfaceCoupling& c = coupling.at_interface(k);
  const int r = c.r();
  const double l2 = sp.lambda * sp.lambda;
  Eigen::MatrixXcd M(2 * r, 2 * r);
  for (int j = 0; j < 2; ++j) {
    M.block(j * r, 0, r, r) = c.beta[j][m - 1].m() + l2 * c.gamma[j][m - 1].m();
    M.block(j * r, r, r, r) = c.alpha[j][m - 1].m() + l2 * c.delta[j][m - 1].m();
  }
  return CMatrix(std::move(M));
}

// Sampled invertibility certificate for the interface blocks.
struct InvertibilityCertificate {
  struct Entry {
    int m = 0;
    int k = 0;
    double min_scaled_det = 0.0;  // min over grid of |det M| / (||M||_F/sqrt(2r))^{2r}
    double lambda_at_min = 0.0;
  };
  std::vector<Entry> entries;
  double threshold = 1e-12;

  double worst() const {
    double w = std::numeric_limits<double>::infinity();
    for (const Entry& e : entries) w = std::min(w, e.min_scaled_det);
    return w;
  }
};

// Sample |det M_mk| over the lambda grid, scaled so the threshold is
// dimensionless. A failure aborts: the transform is undefined for such a
// coupling. A finer grid can only lower the reported minimum.
inline InvertibilityCertificate check_invertibility(const CouplingSet& coupling,
                                                    const MediumStack& medium,
                                                    const std::vector<double>& lambda_grid) {
  if (lambda_grid.empty()) throw BadConfig("check_invertibility: empty lambda grid");
  coupling.validate(medium.r(), medium.n());
  InvertibilityCertificate cert;
  const int two_r = 2 * medium.r();
  for (int k = 1; k <= medium.n(); ++k) {
    for (int m = 1; m <= 2; ++m) {
      InvertibilityCertificate::Entry e;
      e.m = m;
      e.k = k;
      e.min_scaled_det = std::numeric_limits<double>::infinity();
      for (double lam : lambda_grid) {
        const CMatrix M = assemble_M(coupling, m, k, SpectralParameter(lam));
        const double scale = std::max(M.norm() / std::sqrt(static_cast<double>(two_r)), 1e-300);
        const double scaled = std::abs(M.m().determinant()) / std::pow(scale, two_r);
        if (scaled < e.min_scaled_det) {
          e.min_scaled_det = scaled;
          e.lambda_at_min = lam;
        }
      }
      if (!(e.min_scaled_det > cert.threshold)) {
        std::ostringstream os;
        os << "check_invertibility: M_" << m << k << " scaled |det| = " << e.min_scaled_det
           << " at lambda = " << e.lambda_at_min << " is below " << cert.threshold;
        throw InvertibilityViolation(os.str());
      }
      cert.entries.push_back(e);
    }
  }
  return cert;
}

}  // namespace lamtrans
