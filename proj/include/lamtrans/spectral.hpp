#pragma once

#include <cmath>
#include <memory>
#include <sstream>
#include <utility>
#include <vector>

#include "lamtrans/errors.hpp"
#include "lamtrans/linalg.hpp"
#include "lamtrans/medium.hpp"

namespace lamtrans {

namespace detail {

// Shared eigenbasis of q and q^2 for one layer at one lambda. Holding the
// factors lets every exponential evaluation reuse a single decomposition.
struct WaveCache {
  Eigen::MatrixXcd V;
  Eigen::MatrixXcd Vinv;
  Eigen::VectorXcd w;  // eigenvalues of q, principal branch (Re >= 0)

  Eigen::MatrixXcd q_matrix() const { return V * w.asDiagonal() * Vinv; }

  // e^{+-i q dx} from the stored factors; equals exp_iqx(q_matrix(), +-dx)
  // to roundoff but reuses the one decomposition.
  Eigen::MatrixXcd phase(double dx) const {
    Eigen::VectorXcd ph(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) ph(i) = std::exp(kI * w(i) * dx);
    return V * ph.asDiagonal() * Vinv;
  }
};

using WaveCachePtr = std::shared_ptr<const WaveCache>;

// Build the wavenumber factors from q^2 = A^{-2} (lambda^2 E + Gamma^2).
// Identical branch rules to principal_sqrt: reject spectra touching the
// closed negative real axis, reject ill-conditioned eigenbases, and take
// Re(sqrt) >= 0 so the tail pair stays bounded.
inline WaveCachePtr make_wave_cache(const Layer& lay, double lambda) {
  const int r = lay.A_sq.dim();
  const Eigen::MatrixXcd q_sq =
      lay.A_sq_inv.m() * (lambda * lambda * Eigen::MatrixXcd::Identity(r, r) + lay.Gamma_sq.m());
  EigenDecomp ed = eigen_decompose(q_sq, "wavenumber");
  auto cache = std::make_shared<WaveCache>();
  cache->V = ed.vectors;
  cache->Vinv = ed.vec_lu.solve(Eigen::MatrixXcd::Identity(r, r));
  cache->w.resize(r);
  double min_abs = std::numeric_limits<double>::infinity();
  for (int i = 0; i < r; ++i) {
    const Complex mu = ed.values(i);
    if (mu.real() < 0.0 && std::abs(mu.imag()) <= 1e-14 * (1.0 + std::abs(mu))) {
      std::ostringstream os;
      os << "wavenumber: q^2 eigenvalue " << mu << " on the closed negative real axis at lambda="
         << lambda;
      throw NegativeRealEigenvalue(os.str());
    }
    cache->w(i) = std::sqrt(mu);  // principal branch
    min_abs = std::min(min_abs, std::abs(cache->w(i)));
  }
  if (min_abs < 1e-12) {
    std::ostringstream os;
    os << "wavenumber: q numerically singular (min |eigenvalue| = " << min_abs
       << ") at lambda=" << lambda;
    throw SingularWavenumber(os.str());
  }
  return cache;
}

}  // namespace detail

// Exponential-coefficient representation of one matrix solution on one layer:
//   F(x) = e^{i q (x - anchor)} P + e^{-i q (x - anchor)} Q.
// Anchoring at the layer's left endpoint keeps every phase bounded no matter
// how far the layer sits from the origin.
struct LayerExpRep {
  CMatrix q;
  double anchor = 0.0;
  CMatrix P, Q;

  detail::WaveCachePtr cache;
  Eigen::MatrixXcd VinvP, VinvQ;  // precomputed V^{-1} P, V^{-1} Q

  CMatrix eval(double x) const { return CMatrix(raw_eval(x, 0)); }
  CMatrix deriv(double x) const { return CMatrix(raw_eval(x, 1)); }
  CMatrix deriv2(double x) const { return CMatrix(raw_eval(x, 2)); }

  // d^m/dx^m F via the eigenbasis; m-th derivative scales the plus branch by
  // (i w)^m and the minus branch by (-i w)^m.
  Eigen::MatrixXcd raw_eval(double x, int m) const {
    const double dx = x - anchor;
    const int d = static_cast<int>(cache->w.size());
    Eigen::VectorXcd plus(d), minus(d);
    for (int i = 0; i < d; ++i) {
      const Complex iw = kI * cache->w(i);
      const Complex pw = std::pow(iw, m) * std::exp(iw * dx);
      const Complex mw = std::pow(-iw, m) * std::exp(-iw * dx);
      plus(i) = pw;
      minus(i) = mw;
    }
    return cache->V * (plus.asDiagonal() * VinvP + minus.asDiagonal() * VinvQ);
  }
};

namespace detail {

inline LayerExpRep make_rep(WaveCachePtr cache, double anchor, Eigen::MatrixXcd P,
                            Eigen::MatrixXcd Q) {
  LayerExpRep rep;
  rep.q = CMatrix(cache->q_matrix());
  rep.anchor = anchor;
  rep.VinvP = cache->Vinv * P;
  rep.VinvQ = cache->Vinv * Q;
  rep.P = CMatrix(std::move(P));
  rep.Q = CMatrix(std::move(Q));
  rep.cache = std::move(cache);
  return rep;
}

}  // namespace detail

// Layer wavenumber q_m = principal_sqrt(A_m^{-2}(lambda^2 E + Gamma_m^2)).
// Only this form makes e^{+-i q x} solve A^2 y'' + (lambda^2 E + Gamma^2) y = 0.
inline CMatrix wavenumber(const MediumStack& medium, int m, const SpectralParameter& sp) {
  return CMatrix(detail::make_wave_cache(medium.layer(m), sp.lambda)->q_matrix());
}

// The fundamental pair on the semi-infinite tail layer, anchored at l_n but
// equal to the global-phase pair e^{+-i q x}:
//   Phi_{n+1}: P = e^{i q l_n}, Q = 0;  Psi_{n+1}: P = 0, Q = e^{-i q l_n}.
inline std::pair<LayerExpRep, LayerExpRep> tail_pair(const MediumStack& medium,
                                                     const SpectralParameter& sp) {
  const int tail = medium.n() + 1;
  const int r = medium.r();
  detail::WaveCachePtr cache = detail::make_wave_cache(medium.layer(tail), sp.lambda);
  const double ln = medium.ln();
  LayerExpRep phi = detail::make_rep(cache, ln, cache->phase(ln), Eigen::MatrixXcd::Zero(r, r));
  LayerExpRep psi = detail::make_rep(cache, ln, Eigen::MatrixXcd::Zero(r, r), cache->phase(-ln));
  return {std::move(phi), std::move(psi)};
}

// One step of the downward recursion: impose both conjugation conditions at
// l_k, solve the side-1 block system for the layer-k value/derivative of each
// fundamental solution, then re-express those traces in the exponential basis
// anchored at l_{k-1}.
inline std::pair<LayerExpRep, LayerExpRep> descend_interface(int k, const LayerExpRep& phi_next,
                                                             const LayerExpRep& psi_next,
                                                             const MediumStack& medium,
                                                             const CouplingSet& coupling,
                                                             const SpectralParameter& sp) {
  const int r = medium.r();
  const double lk = medium.interface(k);

  // Right-side traces; the next layer is anchored at l_k so these are exact.
  Eigen::MatrixXcd VD2(2 * r, 2 * r);
  VD2.block(0, 0, r, r) = phi_next.raw_eval(lk, 0);
  VD2.block(r, 0, r, r) = phi_next.raw_eval(lk, 1);
  VD2.block(0, r, r, r) = psi_next.raw_eval(lk, 0);
  VD2.block(r, r, r, r) = psi_next.raw_eval(lk, 1);

  const CMatrix M2 = assemble_M(coupling, 2, k, sp);
  const CMatrix M1 = assemble_M(coupling, 1, k, sp);
  Eigen::MatrixXcd VD1;
  try {
    VD1 = block_solve(M1.m(), Eigen::MatrixXcd(M2.m() * VD2));
  } catch (const SingularSystem& e) {
    throw SingularSystem("descend_interface: M_1" + std::to_string(k) + " at lambda=" +
                         std::to_string(sp.lambda) + ": " + e.what());
  }

  // Convert (value, derivative) at l_k into coefficients anchored at l_{k-1}
  // through the exponential-basis block system
  //   [ E+   E- ] [P]   [value     ]        E+- = e^{+-i q h}, h = l_k - l_{k-1}.
  //   [ iqE+ -iqE-] [Q] = [derivative]
  detail::WaveCachePtr cache = detail::make_wave_cache(medium.layer(k), sp.lambda);
  const double h = lk - medium.left_endpoint(k);
  const CMatrix qk(cache->q_matrix());
  const Eigen::MatrixXcd Ep = cache->phase(h);
  const Eigen::MatrixXcd Em = cache->phase(-h);
  Eigen::MatrixXcd basis(2 * r, 2 * r);
  basis.block(0, 0, r, r) = Ep;
  basis.block(0, r, r, r) = Em;
  basis.block(r, 0, r, r) = kI * qk.m() * Ep;
  basis.block(r, r, r, r) = -kI * qk.m() * Em;
  Eigen::MatrixXcd PQ;
  try {
    PQ = block_solve(basis, VD1);
  } catch (const SingularSystem& e) {
    throw SingularWavenumber("descend_interface: exponential basis singular on layer " +
                             std::to_string(k) + " (q not invertible): " + e.what());
  }

  const double anchor = medium.left_endpoint(k);
  LayerExpRep phi = detail::make_rep(cache, anchor, PQ.block(0, 0, r, r), PQ.block(r, 0, r, r));
  LayerExpRep psi = detail::make_rep(cache, anchor, PQ.block(0, r, r, r), PQ.block(r, r, r, r));
  return {std::move(phi), std::move(psi)};
}

// Boundary images: the boundary operator applied to each fundamental solution
// at l_0.
inline std::pair<CMatrix, CMatrix> boundary_images(const LayerExpRep& phi1, const LayerExpRep& psi1,
                                                   const CouplingSet& coupling,
                                                   const SpectralParameter& sp) {
  const double l2 = sp.lambda * sp.lambda;
  const Eigen::MatrixXcd a_bar = coupling.boundary.alpha.m() + l2 * coupling.boundary.delta.m();
  const Eigen::MatrixXcd b_bar = coupling.boundary.beta.m() + l2 * coupling.boundary.gamma.m();
  const double l0 = phi1.anchor;
  CMatrix phi0(Eigen::MatrixXcd(a_bar * phi1.raw_eval(l0, 1) + b_bar * phi1.raw_eval(l0, 0)));
  CMatrix psi0(Eigen::MatrixXcd(a_bar * psi1.raw_eval(l0, 1) + b_bar * psi1.raw_eval(l0, 0)));
  return {std::move(phi0), std::move(psi0)};
}

// Everything the transforms need at one spectral parameter: the per-layer
// fundamental pair, the boundary images, and their inverses. Immutable after
// construction; keeps a pointer to the medium it was built from.
class SpectralBasis {
 public:
  SpectralBasis(const MediumStack& medium, double lambda) : medium_(&medium), lambda_(lambda) {}

  double lambda() const { return lambda_; }
  const MediumStack& medium() const { return *medium_; }

  const LayerExpRep& phi(int layer) const { return phi_.at(static_cast<size_t>(layer) - 1); }
  const LayerExpRep& psi(int layer) const { return psi_.at(static_cast<size_t>(layer) - 1); }
  const CMatrix& phi0() const { return phi0_; }
  const CMatrix& psi0() const { return psi0_; }

  bool boundary_singular() const { return boundary_singular_; }
  const Eigen::MatrixXcd& phi0_inv() const { return phi0_inv_; }
  const Eigen::MatrixXcd& psi0_inv() const { return psi0_inv_; }

  // (Phi0, Psi0) as one r x 2r row block.
  Eigen::MatrixXcd boundary_row() const {
    const int r = medium_->r();
    Eigen::MatrixXcd row(r, 2 * r);
    row.leftCols(r) = phi0_.m();
    row.rightCols(r) = psi0_.m();
    return row;
  }

  friend SpectralBasis build_basis(const MediumStack&, const CouplingSet&, double);

 private:
  const MediumStack* medium_;
  double lambda_;
  std::vector<LayerExpRep> phi_, psi_;
  CMatrix phi0_, psi0_;
  Eigen::MatrixXcd phi0_inv_, psi0_inv_;
  bool boundary_singular_ = true;
};

// Full downward construction at one lambda. Pure function of its inputs;
// distinct lambda nodes build independently.
inline SpectralBasis build_basis(const MediumStack& medium, const CouplingSet& coupling,
                                 double lambda) {
  const SpectralParameter sp(lambda);
  coupling.validate(medium.r(), medium.n());
  SpectralBasis basis(medium, lambda);
  const int n = medium.n();
  basis.phi_.resize(static_cast<size_t>(n) + 1);
  basis.psi_.resize(static_cast<size_t>(n) + 1);
  auto tail = tail_pair(medium, sp);
  basis.phi_[static_cast<size_t>(n)] = std::move(tail.first);
  basis.psi_[static_cast<size_t>(n)] = std::move(tail.second);
  for (int k = n; k >= 1; --k) {
    auto pair = descend_interface(k, basis.phi_[static_cast<size_t>(k)],
                                  basis.psi_[static_cast<size_t>(k)], medium, coupling, sp);
    basis.phi_[static_cast<size_t>(k) - 1] = std::move(pair.first);
    basis.psi_[static_cast<size_t>(k) - 1] = std::move(pair.second);
  }
  auto images = boundary_images(basis.phi_[0], basis.psi_[0], coupling, sp);
  basis.phi0_ = std::move(images.first);
  basis.psi0_ = std::move(images.second);

  // Invert the boundary images eagerly; a singular image only disables the
  // u-side evaluations (the dual side never needs these inverses).
  basis.boundary_singular_ = false;
  for (const CMatrix* img : {&basis.phi0_, &basis.psi0_}) {
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(img->m());
    const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(min_pivot > 1e-12 * std::max(img->norm(), 1e-300))) {
      basis.boundary_singular_ = true;
      break;
    }
  }
  if (!basis.boundary_singular_) {
    basis.phi0_inv_ = basis.phi0_.m().inverse();
    basis.psi0_inv_ = basis.psi0_.m().inverse();
  }
  return basis;
}

namespace detail {

inline void require_regular_boundary(const SpectralBasis& basis, const char* who) {
  if (basis.boundary_singular()) {
    std::ostringstream os;
    os << who << ": boundary image singular at lambda=" << basis.lambda()
       << "; drop this node and re-panel";
    throw SingularBoundaryImage(os.str());
  }
}

}  // namespace detail

// Spectral function on the layer containing x (interfaces resolve right):
//   u_j(x, lambda) = Phi_j(x) Phi0^{-1} - Psi_j(x) Psi0^{-1}.
// Columns are the r independent eigensolutions for this lambda.
inline CMatrix spectral_u_layer(const SpectralBasis& basis, int layer, double x, int deriv = 0) {
  detail::require_regular_boundary(basis, "spectral_u");
  return CMatrix(Eigen::MatrixXcd(basis.phi(layer).raw_eval(x, deriv) * basis.phi0_inv() -
                                  basis.psi(layer).raw_eval(x, deriv) * basis.psi0_inv()));
}

inline CMatrix spectral_u(const SpectralBasis& basis, double x) {
  return spectral_u_layer(basis, basis.medium().layer_of(x), x, 0);
}

inline CMatrix spectral_u_deriv(const SpectralBasis& basis, double x) {
  return spectral_u_layer(basis, basis.medium().layer_of(x), x, 1);
}

// Fundamental block Omega_j(x) = [[Phi, Psi], [Phi', Psi']] on layer j.
inline Eigen::MatrixXcd omega(const SpectralBasis& basis, int layer, double x) {
  const int r = basis.medium().r();
  Eigen::MatrixXcd om(2 * r, 2 * r);
  om.block(0, 0, r, r) = basis.phi(layer).raw_eval(x, 0);
  om.block(0, r, r, r) = basis.psi(layer).raw_eval(x, 0);
  om.block(r, 0, r, r) = basis.phi(layer).raw_eval(x, 1);
  om.block(r, r, r, r) = basis.psi(layer).raw_eval(x, 1);
  return om;
}

// v_j(x) = (Phi0, Psi0) Omega_j^{-1}(x), the r x 2r row block behind the dual
// kernel and the interface correction terms. Its right r columns are
// u* A_j^2; its left r columns are -(u*)' A_j^2.
inline Eigen::MatrixXcd dual_row(const SpectralBasis& basis, int layer, double x) {
  const Eigen::MatrixXcd om = omega(basis, layer, x);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(om.transpose());
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(min_pivot > 1e-13 * std::max(om.norm(), 1e-300))) {
    std::ostringstream os;
    os << "dual_u: fundamental block singular at x=" << x << ", lambda=" << basis.lambda();
    throw SingularWronskian(os.str());
  }
  return lu.solve(basis.boundary_row().transpose()).transpose();
}

// Dual spectral function u*_j(xi, lambda) = (Phi0, Psi0) Omega_j^{-1}(xi) [0; E] A_j^{-2}.
// Rows are the r dual eigensolutions.
inline CMatrix dual_u_layer(const SpectralBasis& basis, int layer, double xi, int deriv = 0) {
  const int r = basis.medium().r();
  const Eigen::MatrixXcd v = dual_row(basis, layer, xi);
  const Eigen::MatrixXcd& a_inv = basis.medium().layer(layer).A_sq_inv.m();
  if (deriv == 0) return CMatrix(Eigen::MatrixXcd(v.rightCols(r) * a_inv));
  // (u*)' = -v_left A^{-2}: differentiating (Phi0,Psi0) Omega^{-1} column
  // blocks swaps in the first-order companion structure of Omega.
  return CMatrix(Eigen::MatrixXcd(-v.leftCols(r) * a_inv));
}

inline CMatrix dual_u(const SpectralBasis& basis, double xi) {
  return dual_u_layer(basis, basis.medium().layer_of(xi), xi, 0);
}

inline CMatrix dual_u_deriv(const SpectralBasis& basis, double xi) {
  return dual_u_layer(basis, basis.medium().layer_of(xi), xi, 1);
}

}  // namespace lamtrans
