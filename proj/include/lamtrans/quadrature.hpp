#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "lamtrans/errors.hpp"
#include "lamtrans/linalg.hpp"

namespace lamtrans {

// Truncation and refinement controls shared by every continuous integral.
// The underlying integrals run over (0, inf) in the spectral variable and
// over the half-line in space; finite truncation with a reported estimate is
// the computable realization.
struct QuadratureSpec {
  double epsilon = 1e-6;     // lower spectral cutoff
  double lambda_max = 0.0;   // spectral truncation; 0 = derive from the medium
  double x_max = 0.0;        // spatial tail truncation; 0 = derive from decay witness
  double panel_tol = 1e-6;   // relative panel tolerance
  int max_panels = 40000;    // refinement budget

  void validate() const {
    if (!(epsilon > 0.0)) throw BadConfig("QuadratureSpec: epsilon must be > 0");
    if (lambda_max != 0.0 && !(epsilon < lambda_max)) {
      throw BadConfig("QuadratureSpec: requires epsilon < lambda_max");
    }
    if (!(panel_tol > 0.0 && panel_tol <= 1e-2)) {
      throw BadConfig("QuadratureSpec: panel_tol must lie in (0, 1e-2]");
    }
    if (max_panels < 1) throw BadConfig("QuadratureSpec: max_panels must be >= 1");
  }
};

// Book-keeping the callers surface in reports and summaries.
struct PanelReport {
  int panels = 0;
  int evaluations = 0;
  int singular_nodes_skipped = 0;
  double truncation_estimate = 0.0;  // norm of the last-decade contribution
  double tail_bound = 0.0;           // analytic bound on the neglected spatial tail

  void absorb(const PanelReport& o) {
    panels += o.panels;
    evaluations += o.evaluations;
    singular_nodes_skipped += o.singular_nodes_skipped;
    truncation_estimate = std::max(truncation_estimate, o.truncation_estimate);
    tail_bound = std::max(tail_bound, o.tail_bound);
  }
};

namespace detail {

static constexpr double kGL15Nodes[15] = {
    -0.987992518020485428, -0.937273392400705904, -0.848206583410427216,
    -0.724417731360170047, -0.570972172608538848, -0.39415134707756337,
    -0.201194093997434522, 0.0,                   0.201194093997434522,
    0.39415134707756337,   0.570972172608538848,  0.724417731360170047,
    0.848206583410427216,  0.937273392400705904,  0.987992518020485428,
};
static constexpr double kGL15Weights[15] = {
    0.0307532419961172684, 0.0703660474881081247, 0.107159220467171935,
    0.139570677926154314,  0.166269205816993934,  0.186161000015562211,
    0.198431485327111576,  0.202578241925561273,  0.198431485327111576,
    0.186161000015562211,  0.166269205816993934,  0.139570677926154314,
    0.107159220467171935,  0.0703660474881081247, 0.0307532419961172684,
};

}  // namespace detail

// One quadrature node of a fixed panel layout: abscissa and final weight.
struct QuadNode {
  double x;
  double w;
};

// Partition [a, b] so no panel exceeds max_len, then lay 15-point
// Gauss-Legendre nodes on each panel. Nodes come back strictly ascending,
// which fixes the deterministic summation order used everywhere.
inline std::vector<QuadNode> panel_nodes(double a, double b, double max_len) {
  if (!(b > a)) return {};
  const int n_panels = std::max(1, static_cast<int>(std::ceil((b - a) / max_len)));
  std::vector<QuadNode> nodes;
  nodes.reserve(static_cast<size_t>(n_panels) * 15);
  const double h = (b - a) / n_panels;
  for (int p = 0; p < n_panels; ++p) {
    const double lo = a + p * h;
    const double mid = lo + 0.5 * h;
    for (int k = 0; k < 15; ++k) {
      nodes.push_back({mid + 0.5 * h * detail::kGL15Nodes[k], 0.5 * h * detail::kGL15Weights[k]});
    }
  }
  return nodes;
}

// Panel length that keeps at most a quarter oscillation period of
// e^{i freq x} inside one 15-point panel.
inline double quarter_period_len(double freq, double fallback_len) {
  if (!(freq > 0.0)) return fallback_len;
  return std::min(fallback_len, 0.25 * (2.0 * M_PI) / freq);
}

// Adaptive Gauss-Legendre 15 integrator over complex-vector integrands.
// Refinement bisects a panel whenever the whole-panel estimate disagrees
// with the sum of its halves; isolated integrand failures (singular spectral
// nodes) trigger a bisection that relocates the nodes away from the bad
// point instead of aborting the integral.
class PanelIntegrator {
 public:
  using Integrand = std::function<Eigen::VectorXcd(double)>;

  PanelIntegrator(double rel_tol, int max_panels)
      : rel_tol_(rel_tol), max_panels_(max_panels) {}

  // Integrate over [a, b] starting from period-aware panels of length
  // max_len. scale_hint, when positive, short-circuits the first coarse pass
  // used to establish the magnitude against which tolerances are measured.
  Eigen::VectorXcd integrate(const Integrand& f, double a, double b, double max_len,
                             PanelReport* report = nullptr, double scale_hint = 0.0) const {
    if (!(b > a)) {
      if (report) *report = PanelReport{};
      // Dimension unknown on an empty range; callers pass non-empty ranges.
      return Eigen::VectorXcd();
    }
    const int n_panels = std::max(1, static_cast<int>(std::ceil((b - a) / max_len)));
    PanelReport rep;
    State st{f, &rep, 0.0, b - a};

    // Coarse pass: one GL15 sweep per initial panel to establish scale.
    const double h = (b - a) / n_panels;
    std::vector<Eigen::VectorXcd> coarse(n_panels);
    double max_norm = 0.0;
    for (int p = 0; p < n_panels; ++p) {
      coarse[p] = eval_panel(st, a + p * h, a + (p + 1) * h);
      max_norm = std::max(max_norm, coarse[p].norm());
    }
    Eigen::VectorXcd total = coarse[0];
    for (int p = 1; p < n_panels; ++p) total += coarse[p];
    st.scale = std::max({scale_hint, total.norm(), max_norm});
    if (st.scale <= 0.0) st.scale = 1.0;

    // Refinement pass in ascending order: deterministic regardless of how
    // deep individual panels split.
    Eigen::VectorXcd refined = Eigen::VectorXcd::Zero(total.size());
    Eigen::VectorXcd last_decade = Eigen::VectorXcd::Zero(total.size());
    const double decade_lo = std::max(a, b - 0.9 * (b - a));
    for (int p = 0; p < n_panels; ++p) {
      const double lo = a + p * h;
      const double hi = a + (p + 1) * h;
      const Eigen::VectorXcd part = refine(st, lo, hi, coarse[p], 0);
      refined += part;
      if (lo >= decade_lo) last_decade += part;
    }
    rep.truncation_estimate = last_decade.norm();
    if (report) *report = rep;
    return refined;
  }

 private:
  struct State {
    const Integrand& f;
    PanelReport* rep;
    double scale;
    double total_len;
  };

  Eigen::VectorXcd eval_panel(State& st, double a, double b) const {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    Eigen::VectorXcd sum;
    for (int k = 0; k < 15; ++k) {
      const double x = mid + half * detail::kGL15Nodes[k];
      Eigen::VectorXcd v = eval_point(st, x, half);
      v *= half * detail::kGL15Weights[k];
      if (sum.size() == 0) {
        sum = v;
      } else {
        sum += v;
      }
    }
    st.rep->panels += 1;
    return sum;
  }

  // A spectral node can sit exactly on an isolated singular parameter. The
  // integrand there is skipped by nudging the abscissa by a relative step;
  // the set of bad points has measure zero so the nudged node succeeds.
  Eigen::VectorXcd eval_point(State& st, double x, double half_len) const {
    st.rep->evaluations += 1;
    const char* last = "";
    for (int attempt = 0; attempt < 4; ++attempt) {
      const double shift = attempt == 0 ? 0.0 : attempt * 1e-7 * half_len;
      try {
        return st.f(x + shift);
      } catch (const SingularNode& e) {
        last = e.what();
      }
      st.rep->singular_nodes_skipped += 1;
    }
    throw SingularBoundaryImage(std::string("quadrature: node stayed singular after nudging: ") + last);
  }

  Eigen::VectorXcd refine(State& st, double a, double b, const Eigen::VectorXcd& whole,
                          int depth) const {
    if (st.rep->panels >= max_panels_) {
      throw OscillationBudgetExceeded(
          "quadrature: panel budget " + std::to_string(max_panels_) + " exhausted at [" +
          std::to_string(a) + ", " + std::to_string(b) + "]");
    }
    const double mid = 0.5 * (a + b);
    const Eigen::VectorXcd left = eval_panel(st, a, mid);
    const Eigen::VectorXcd right = eval_panel(st, mid, b);
    const Eigen::VectorXcd halves = left + right;
    const double diff = (whole - halves).norm();
    const double budget = rel_tol_ * st.scale * std::max((b - a) / st.total_len, 1e-6);
    if (diff <= budget || depth >= 28) {
      return halves;
    }
    return refine(st, a, mid, left, depth + 1) + refine(st, mid, b, right, depth + 1);
  }

  double rel_tol_;
  int max_panels_;
};

}  // namespace lamtrans
