#pragma once

// Brute-force reference implementations used only by tests and the verify
// command. Deliberately simple and slow; they share no code with the modules
// they check (only the dense linear algebra layer).

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "lamtrans/errors.hpp"
#include "lamtrans/linalg.hpp"

namespace lamtrans {

struct OracleReport {
  std::string name;
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;
  long sample_count = 0;
  double tolerance = 0.0;

  bool pass() const { return max_rel_error <= tolerance; }

  void record(double abs_err, double scale) {
    max_abs_error = std::max(max_abs_error, abs_err);
    max_rel_error = std::max(max_rel_error, abs_err / std::max(scale, 1e-300));
    ++sample_count;
  }

  std::string summary_line() const {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-28s max_abs=%.3e max_rel=%.3e samples=%ld tol=%.1e %s",
                  name.c_str(), max_abs_error, max_rel_error, sample_count, tolerance,
                  pass() ? "PASS" : "FAIL");
    return std::string(buf);
  }
};

// Half-line sine transform int_0^inf sin(lambda x) f(x) dx by composite
// Simpson on [0, x_max]; the caller guarantees f decays by x_max. Node count
// scales with the oscillation so the rule stays in its 4th-order regime.
inline double sine_transform_oracle(const std::function<double(double)>& f, double lambda,
                                    double x_max = 60.0) {
  const int intervals_raw = static_cast<int>(std::ceil(8.0 * x_max * std::max(std::abs(lambda), 1.0)));
  const int intervals = intervals_raw + (intervals_raw % 2);  // Simpson needs even count
  const double h = x_max / intervals;
  double acc = 0.0;
  for (int i = 0; i <= intervals; ++i) {
    const double x = i * h;
    const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * std::sin(lambda * x) * f(x);
  }
  return acc * h / 3.0;
}

// Explicit RK4 march of y'' = -omega^2 y + forcing(t), zero initial data.
// Returns (y, y') at time t. Refuses steps beyond the accuracy precondition
// h <= 0.05 / omega.
inline Eigen::Vector2cd ode_march(double omega, const std::function<Complex(double)>& forcing,
                                  double t, double h_max) {
  if (!(h_max > 0.0)) throw StepTooLarge("ode_march: step must be positive");
  if (t < 0.0) throw StepTooLarge("ode_march: t must be >= 0");
  if (omega > 0.0 && h_max > 0.05 / omega) {
    throw StepTooLarge("ode_march: step exceeds 0.05/omega accuracy bound");
  }
  Eigen::Vector2cd y = Eigen::Vector2cd::Zero();
  if (t == 0.0) return y;
  const int n = std::max(1, static_cast<int>(std::ceil(t / h_max - 1e-12)));
  const double h = t / n;
  const double w2 = omega * omega;
  const auto rhs = [&](double tau, const Eigen::Vector2cd& s) {
    Eigen::Vector2cd d;
    d(0) = s(1);
    d(1) = -w2 * s(0) + forcing(tau);
    return d;
  };
  for (int i = 0; i < n; ++i) {
    const double tau = i * h;
    const Eigen::Vector2cd k1 = rhs(tau, y);
    const Eigen::Vector2cd k2 = rhs(tau + 0.5 * h, y + 0.5 * h * k1);
    const Eigen::Vector2cd k3 = rhs(tau + 0.5 * h, y + 0.5 * h * k2);
    const Eigen::Vector2cd k4 = rhs(tau + h, y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

// Residual of A2 f'' + B f at the given points using a central second-derivative
// stencil with step h. width 5 is the classic 4th-order stencil; width 7 is the
// 6th-order one, useful when f carries evaluation noise: the O(h^6) truncation
// admits a larger h, which shrinks the 1/h^2 noise amplification. Stencils that
// would straddle an interface are rejected rather than silently polluted.
inline OracleReport fd_residual(const std::function<CVector(double)>& f, const CMatrix& A2,
                                const CMatrix& B, const std::vector<double>& points,
                                const std::vector<double>& interfaces, double h,
                                double tolerance, const std::string& name, int width = 5) {
  if (!(h > 0.0)) throw BadConfig("fd_residual: step must be positive");
  if (width != 5 && width != 7) throw BadConfig("fd_residual: width must be 5 or 7");
  // Weights scaled by (12 h^2) resp. (180 h^2).
  static const double w5[5] = {-1.0, 16.0, -30.0, 16.0, -1.0};
  static const double w7[7] = {2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0};
  const double* wt = width == 5 ? w5 : w7;
  const double denom = (width == 5 ? 12.0 : 180.0) * h * h;
  const int half = (width - 1) / 2;
  OracleReport rep;
  rep.name = name;
  rep.tolerance = tolerance;
  for (double x : points) {
    for (double l : interfaces) {
      if (std::abs(x - l) > 1e-14 && std::abs(x - l) < half * h + 1e-14) {
        throw PointTooCloseToInterface("fd_residual: stencil at x=" + std::to_string(x) +
                                       " straddles interface l=" + std::to_string(l));
      }
    }
    CVector acc = CVector::Zero(A2.m().rows());
    CVector f0 = acc;
    for (int k = -half; k <= half; ++k) {
      const CVector fk = f(x + k * h);
      acc += wt[k + half] * fk;
      if (k == 0) f0 = fk;
    }
    const CVector d2 = acc / denom;
    const CVector lhs = A2.m() * d2;
    const CVector rhs = B.m() * f0;
    const double resid = (lhs + rhs).cwiseAbs().maxCoeff();
    const double scale =
        std::max({lhs.cwiseAbs().maxCoeff(), rhs.cwiseAbs().maxCoeff(), 1e-12});
    rep.record(resid, scale);
  }
  return rep;
}

}  // namespace lamtrans
