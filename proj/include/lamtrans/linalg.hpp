#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <utility>

#include "lamtrans/errors.hpp"

namespace lamtrans {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

// Dense complex square matrix of fixed dimension d (r or 2r in practice).
// Construction rejects non-square shapes and non-finite entries; dimension
// agreement is checked on every binary operation.
class CMatrix {
 public:
  CMatrix() = default;

  explicit CMatrix(Eigen::MatrixXcd m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) {
      throw DimensionMismatch("CMatrix: shape " + shape_str() + " is not square");
    }
    if (!m_.allFinite()) {
      throw NonFiniteEntry("CMatrix: non-finite entry on construction");
    }
  }

  static CMatrix identity(int d) { return CMatrix(Eigen::MatrixXcd::Identity(d, d)); }
  static CMatrix zero(int d) { return CMatrix(Eigen::MatrixXcd::Zero(d, d)); }

  int dim() const { return static_cast<int>(m_.rows()); }

  const Eigen::MatrixXcd& m() const { return m_; }
  Eigen::MatrixXcd& m() { return m_; }

  Complex operator()(int i, int j) const { return m_(i, j); }
  Complex& operator()(int i, int j) { return m_(i, j); }

  CMatrix operator+(const CMatrix& o) const {
    check_same_dim(o, "+");
    return CMatrix(Eigen::MatrixXcd(m_ + o.m_));
  }
  CMatrix operator-(const CMatrix& o) const {
    check_same_dim(o, "-");
    return CMatrix(Eigen::MatrixXcd(m_ - o.m_));
  }
  CMatrix operator*(const CMatrix& o) const {
    check_same_dim(o, "*");
    return CMatrix(Eigen::MatrixXcd(m_ * o.m_));
  }
  friend CMatrix operator*(Complex s, const CMatrix& a) { return CMatrix(Eigen::MatrixXcd(s * a.m_)); }
  friend CMatrix operator*(double s, const CMatrix& a) { return CMatrix(Eigen::MatrixXcd(s * a.m_)); }

  CMatrix adjoint() const { return CMatrix(Eigen::MatrixXcd(m_.adjoint())); }
  double norm() const { return m_.norm(); }
  double max_abs() const { return m_.cwiseAbs().maxCoeff(); }

 private:
  std::string shape_str() const {
    std::ostringstream os;
    os << m_.rows() << "x" << m_.cols();
    return os.str();
  }
  void check_same_dim(const CMatrix& o, const char* op) const {
    if (dim() != o.dim()) {
      throw DimensionMismatch(std::string("CMatrix: dimension mismatch in '") + op + "': " +
                              std::to_string(dim()) + " vs " + std::to_string(o.dim()));
    }
  }

  Eigen::MatrixXcd m_;
};

namespace detail {

inline bool is_hermitian(const Eigen::MatrixXcd& m, double rel = 1e-13) {
  return (m - m.adjoint()).norm() <= rel * (1.0 + m.norm());
}

// Condition number of the eigenvector matrix; d <= 16 so full SVD is cheap.
inline double svd_condition(const Eigen::MatrixXcd& v) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(v);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

struct EigenDecomp {
  Eigen::MatrixXcd vectors;
  Eigen::VectorXcd values;
  Eigen::PartialPivLU<Eigen::MatrixXcd> vec_lu;
};

inline EigenDecomp eigen_decompose(const Eigen::MatrixXcd& m, const char* who) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, /*computeEigenvectors=*/true);
  if (es.info() != Eigen::Success) {
    throw NonDiagonalizable(std::string(who) + ": eigen solver failed to converge");
  }
  EigenDecomp d;
  d.vectors = es.eigenvectors();
  d.values = es.eigenvalues();
  const double cond = svd_condition(d.vectors);
  if (!(cond < 1e12)) {
    std::ostringstream os;
    os << who << ": eigenvector matrix condition " << cond << " exceeds 1e12";
    throw NonDiagonalizable(os.str());
  }
  d.vec_lu = Eigen::PartialPivLU<Eigen::MatrixXcd>(d.vectors);
  return d;
}

}  // namespace detail

// Principal matrix square root: S with S*S = M and Re(eig(S)) >= 0. The
// principal branch pins the wavenumber sign so the tail pair stays a
// bounded/decaying basis. Hermitian PSD inputs take the symmetric path;
// zero eigenvalues are admitted there and reported through zero_flag.
inline CMatrix principal_sqrt(const CMatrix& M, bool* zero_flag = nullptr) {
  const int d = M.dim();
  const double scale = std::max(M.norm(), 1e-300);
  if (detail::is_hermitian(M.m())) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M.m());
    if (es.info() == Eigen::Success) {
      const Eigen::VectorXd w = es.eigenvalues();
      if (w.minCoeff() >= -1e-12 * scale) {
        Eigen::VectorXcd sq(d);
        for (int i = 0; i < d; ++i) {
          const double wi = std::max(w(i), 0.0);
          if (zero_flag && w(i) <= 1e-12 * scale) *zero_flag = true;
          sq(i) = std::sqrt(wi);
        }
        return CMatrix(Eigen::MatrixXcd(es.eigenvectors() * sq.asDiagonal() *
                                        es.eigenvectors().adjoint()));
      }
      // Hermitian but indefinite: a strictly negative real eigenvalue sits on
      // the cut.
      std::ostringstream os;
      os << "principal_sqrt: eigenvalue " << w.minCoeff() << " on the closed negative real axis";
      throw NegativeRealEigenvalue(os.str());
    }
  }
  detail::EigenDecomp ed = detail::eigen_decompose(M.m(), "principal_sqrt");
  Eigen::VectorXcd sq(d);
  for (int i = 0; i < d; ++i) {
    const Complex w = ed.values(i);
    if (w.real() <= 0.0 && std::abs(w.imag()) <= 1e-14 * (1.0 + std::abs(w))) {
      if (std::abs(w) <= 1e-14 * scale) {
        if (zero_flag) *zero_flag = true;
        sq(i) = 0.0;
        continue;
      }
      std::ostringstream os;
      os << "principal_sqrt: eigenvalue " << w << " on the closed negative real axis";
      throw NegativeRealEigenvalue(os.str());
    }
    sq(i) = std::sqrt(w);  // principal branch: Re >= 0
  }
  return CMatrix(Eigen::MatrixXcd(ed.vectors * sq.asDiagonal() * ed.vec_lu.solve(Eigen::MatrixXcd::Identity(d, d))));
}

// e^{i q x} via eigendecomposition of q. Exact inverse relation
// exp_iqx(q,x)*exp_iqx(q,-x) = E holds to roundoff because both use the same
// eigenbasis.
inline CMatrix exp_iqx(const CMatrix& q, double x) {
  if (!std::isfinite(x)) throw NonFiniteEntry("exp_iqx: offset x is not finite");
  const int d = q.dim();
  if (x == 0.0) return CMatrix::identity(d);
  if (detail::is_hermitian(q.m())) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(q.m());
    if (es.info() == Eigen::Success) {
      Eigen::VectorXcd ph(d);
      for (int i = 0; i < d; ++i) ph(i) = std::exp(kI * es.eigenvalues()(i) * x);
      return CMatrix(Eigen::MatrixXcd(es.eigenvectors() * ph.asDiagonal() *
                                      es.eigenvectors().adjoint()));
    }
  }
  detail::EigenDecomp ed = detail::eigen_decompose(q.m(), "exp_iqx");
  Eigen::VectorXcd ph(d);
  for (int i = 0; i < d; ++i) {
    const Complex arg = kI * ed.values(i) * x;
    if (arg.real() > 700.0) {
      std::ostringstream os;
      os << "exp_iqx: exponent real part " << arg.real() << " would overflow; "
         << "anchor phases at the layer endpoint instead of accumulating offsets";
      throw NonFiniteEntry(os.str());
    }
    ph(i) = std::exp(arg);
  }
  return CMatrix(Eigen::MatrixXcd(ed.vectors * ph.asDiagonal() *
                                  ed.vec_lu.solve(Eigen::MatrixXcd::Identity(d, d))));
}

// Partial-pivot LU solve A X = B for the 2r x 2r interface systems (and any
// other small dense solve). Rejects pivots below 1e-14 * ||A||.
inline Eigen::MatrixXcd block_solve(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
  if (A.rows() != A.cols()) throw DimensionMismatch("block_solve: A is not square");
  if (B.rows() != A.rows()) {
    throw DimensionMismatch("block_solve: B row dimension " + std::to_string(B.rows()) +
                            " does not match A dimension " + std::to_string(A.rows()));
  }
  const double scale = std::max(A.norm(), 1e-300);
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(min_pivot > 1e-14 * scale)) {
    std::ostringstream os;
    os << "block_solve: pivot " << min_pivot << " below 1e-14*||A|| = " << 1e-14 * scale;
    throw SingularSystem(os.str());
  }
  return lu.solve(B);
}

inline CMatrix block_solve(const CMatrix& A, const CMatrix& B) {
  return CMatrix(block_solve(A.m(), B.m()));
}

namespace detail {

// Chebyshev fits (generated offline at 50-digit precision) for the amplitude
// functions of the large-argument form
//   J0(z) = sqrt(2/(pi z)) * (P(z) cos(z - pi/4) - Q(z) sin(z - pi/4)),
// with P = sum a_k T_k(v), Q = (8/z) * sum b_k T_k(v), v = 2(8/z)^2 - 1.
static constexpr double kJ0AsymP[16] = {
    0.999460349347518665,    -0.000536522046813211742, 3.07518478751947462e-6,
    -5.1705945376060977e-8,  1.63064646351513831e-9,   -7.86409137723707e-11,
    5.16826238734919246e-12, -4.30457886992539122e-13, 4.32659574315494046e-14,
    -5.06903409593523323e-15, 6.74807221573379599e-16, -1.00115137234656334e-16,
    1.63059192336835812e-17, -2.88086616930926094e-18, 5.46808277819452521e-19,
    -1.10620363462380398e-19,
};
static constexpr double kJ0AsymQ[16] = {
    -0.0155558546053370091,  0.000068385199426116496,  -7.41449841106064726e-7,
    1.79724572479689918e-8,  -7.27191593686631998e-10, 4.22012190466873844e-11,
    -3.20674742099663474e-12, 3.0061451253517063e-13,  -3.33632818532242679e-14,
    4.25522504024545554e-15, -6.09993013163990022e-16, 9.66212897029917738e-17,
    -1.66860652142652711e-17, 3.10824404835624502e-18, -6.19111577826580206e-19,
    1.30914484520621468e-19,
};

inline double cheb_eval(const double* c, int n, double v) {
  double b0 = 0.0, b1 = 0.0;
  for (int k = n - 1; k >= 0; --k) {
    const double t = 2.0 * v * b0 - b1 + c[k];
    b1 = b0;
    b0 = t;
  }
  return b0 - v * b1;
}

}  // namespace detail

// Bessel J0. Even in z, so negative arguments are folded; power series below
// 8, large-argument amplitude/phase form above. Absolute error stays below
// 1e-12 for z <= 1e4.
inline double bessel_j0(double z) {
  z = std::abs(z);
  if (!std::isfinite(z)) throw NonFiniteEntry("bessel_j0: argument is not finite");
  if (z < 8.0) {
    const double w = 0.25 * z * z;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 60; ++k) {
      term *= -w / (static_cast<double>(k) * k);
      sum += term;
      if (std::abs(term) < 1e-18 * (1.0 + std::abs(sum))) break;
    }
    return sum;
  }
  const double t = 8.0 / z;
  const double v = 2.0 * t * t - 1.0;
  const double P = detail::cheb_eval(detail::kJ0AsymP, 16, v);
  const double Q = t * detail::cheb_eval(detail::kJ0AsymQ, 16, v);
  const double chi = z - 0.25 * M_PI;
  return std::sqrt(2.0 / (M_PI * z)) * (P * std::cos(chi) - Q * std::sin(chi));
}

}  // namespace lamtrans
