#pragma once

// JSON configuration: media, couplings, scenarios, loads, grids, quadrature.
// Schema errors surface as nlohmann exceptions (usage level); domain
// violations surface as lamtrans::Error subclasses.

#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lamtrans/elastodyn.hpp"
#include "lamtrans/errors.hpp"
#include "lamtrans/linalg.hpp"
#include "lamtrans/medium.hpp"
#include "lamtrans/quadrature.hpp"
#include "lamtrans/transform.hpp"

namespace lamtrans {

using Json = nlohmann::json;

namespace detail {

inline Complex parse_complex(const Json& v) {
  if (v.is_number()) return Complex(v.get<double>(), 0.0);
  if (v.is_array() && v.size() == 2) {
    return Complex(v.at(0).get<double>(), v.at(1).get<double>());
  }
  throw BadConfig("config: complex entries are numbers or [re, im] pairs");
}

inline CMatrix parse_matrix(const Json& v) {
  if (!v.is_array() || v.empty()) throw BadConfig("config: matrix must be an array of rows");
  const size_t n = v.size();
  Eigen::MatrixXcd m(n, n);
  for (size_t i = 0; i < n; ++i) {
    const Json& row = v.at(i);
    if (!row.is_array() || row.size() != n) {
      throw BadConfig("config: matrix rows must all have the matrix dimension");
    }
    for (size_t j = 0; j < n; ++j) m(static_cast<long>(i), static_cast<long>(j)) = parse_complex(row.at(j));
  }
  return CMatrix(std::move(m));
}

inline std::vector<double> parse_axis(const Json& v) {
  std::vector<double> out;
  if (v.is_array()) {
    for (const Json& e : v) out.push_back(e.get<double>());
  } else {
    const double lo = v.at("min").get<double>();
    const double hi = v.at("max").get<double>();
    const int count = v.at("count").get<int>();
    if (count < 1 || !(hi >= lo)) throw BadConfig("config: axis needs count >= 1 and max >= min");
    for (int i = 0; i < count; ++i) {
      out.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
    }
  }
  if (out.empty()) throw BadConfig("config: empty axis");
  return out;
}

}  // namespace detail

struct ParsedConfig {
  std::optional<MediumStack> medium;
  std::optional<CouplingSet> coupling;
  std::optional<ElasticScenario> scenario;
  std::optional<LoadSpec> load;
  std::vector<double> grid_x, grid_y, grid_t;
  QuadratureSpec quadrature;
  std::vector<std::string> warnings;
  Json field;  // optional analytic field description for round-trip runs
};

namespace detail {

inline MediumStack parse_medium(const Json& j) {
  const int r = j.at("r").get<int>();
  std::vector<double> interfaces;
  for (const Json& v : j.at("interfaces")) interfaces.push_back(v.get<double>());
  std::vector<Layer> layers;
  for (const Json& v : j.at("layers")) {
    Layer lay;
    lay.A_sq = parse_matrix(v.at("A_sq"));
    lay.Gamma_sq = parse_matrix(v.at("Gamma_sq"));
    layers.push_back(std::move(lay));
  }
  return build_medium(r, interfaces, std::move(layers));
}

inline BoundaryQuad parse_boundary(const Json& j, int r) {
  const auto get = [&](const char* key) {
    if (j.contains(key)) return parse_matrix(j.at(key));
    return CMatrix::zero(r);
  };
  return BoundaryQuad{get("alpha"), get("beta"), get("gamma"), get("delta")};
}

inline CouplingSet parse_coupling(const Json& j, const MediumStack& medium) {
  const int r = medium.r();
  CouplingSet out;
  if (j.is_string()) {
    if (j.get<std::string>() != "dirichlet") {
      throw BadConfig("config: unknown coupling shortcut '" + j.get<std::string>() + "'");
    }
    // Value condition at l0, normalized so the single-layer classical pair
    // comes out with its textbook signs.
    Eigen::MatrixXcd beta = -Eigen::MatrixXcd::Identity(r, r);
    out.boundary = BoundaryQuad{CMatrix::zero(r), CMatrix(std::move(beta)), CMatrix::zero(r),
                                CMatrix::zero(r)};
    for (int k = 1; k <= medium.n(); ++k) {
      // Transparent interfaces: continuity of value and derivative.
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
      out.interfaces.push_back(std::move(ic));
    }
    out.validate(r, medium.n());
    return out;
  }
  out.boundary = parse_boundary(j.at("boundary"), r);
  if (j.contains("interfaces")) {
    // Each interface entry: objects "j1", "j2" (condition family), holding
    // matrices keyed base_m with side m in {1, 2}; omitted blocks are zero.
    for (const Json& v : j.at("interfaces")) {
      InterfaceCoupling ic;
      for (int jj = 0; jj < 2; ++jj) {
        const Json& row = v.at("j" + std::to_string(jj + 1));
        for (int m = 0; m < 2; ++m) {
          const std::string suffix = "_" + std::to_string(m + 1);
          const auto get = [&](const std::string& base) {
            const std::string key = base + suffix;
            if (row.contains(key)) return parse_matrix(row.at(key));
            return CMatrix::zero(r);
          };
          ic.alpha[jj][m] = get("alpha");
          ic.beta[jj][m] = get("beta");
          ic.gamma[jj][m] = get("gamma");
          ic.delta[jj][m] = get("delta");
        }
      }
      out.interfaces.push_back(std::move(ic));
    }
  }
  out.validate(r, medium.n());
  return out;
}

inline ElasticScenario parse_scenario(const Json& j) {
  ElasticScenario sc;
  for (const Json& v : j.at("layers")) {
    ElasticLayer L;
    L.lame_lambda = v.at("lame_lambda").get<double>();
    L.lame_mu = v.at("lame_mu").get<double>();
    L.c1 = v.at("c1").get<double>();
    L.c2 = v.at("c2").get<double>();
    sc.layers.push_back(L);
  }
  for (const Json& v : j.at("interfaces")) sc.interfaces.push_back(v.get<double>());
  sc.validate();
  return sc;
}

inline std::function<double(double)> parse_time_profile(const Json& j, double* time_scale) {
  const std::string type = j.value("type", "pulse");
  if (type == "pulse") {
    const double t0 = j.value("t0", 0.5);
    if (!(t0 > 0.0)) throw BadConfig("config: pulse t0 must be positive");
    *time_scale = t0;
    return [t0](double t) { return t <= 0.0 ? 0.0 : (t / t0) * (t / t0) * std::exp(-t / t0); };
  }
  if (type == "step_sine") {
    const double omega = j.value("omega", 1.0);
    if (!(omega > 0.0)) throw BadConfig("config: step_sine omega must be positive");
    *time_scale = 2.0 * M_PI / omega * 0.25;
    return [omega](double t) { return t <= 0.0 ? 0.0 : std::sin(omega * t); };
  }
  if (type == "constant") {
    *time_scale = 1.0;
    return [](double t) { return t <= 0.0 ? 0.0 : 1.0; };
  }
  throw BadConfig("config: unknown time profile '" + type + "'");
}

inline LoadSpec parse_load(const Json& j) {
  LoadSpec load;
  const std::string type = j.at("type").get<std::string>();
  const double amplitude = j.value("amplitude", 1.0);
  double time_scale = 1.0;
  std::function<double(double)> g = j.contains("time_profile")
                                        ? parse_time_profile(j.at("time_profile"), &time_scale)
                                        : parse_time_profile(Json::object(), &time_scale);
  if (type == "gaussian") {
    const double center = j.value("center", 0.0);
    const double width = j.at("width").get<double>();
    if (!(width > 0.0)) throw BadConfig("config: gaussian width must be positive");
    load.shape = [amplitude, center, width](double y) {
      const double s = (y - center) / width;
      return amplitude * std::exp(-0.5 * s * s);
    };
    load.y_lo = center - 8.0 * width;
    load.y_hi = center + 8.0 * width;
  } else if (type == "box") {
    const double y_lo = j.at("y_lo").get<double>();
    const double y_hi = j.at("y_hi").get<double>();
    load.shape = [amplitude, y_lo, y_hi](double y) {
      return (y >= y_lo && y <= y_hi) ? amplitude : 0.0;
    };
    load.y_lo = y_lo;
    load.y_hi = y_hi;
  } else {
    throw BadConfig("config: unknown load type '" + type + "'");
  }
  load.time_factor = g;
  load.time_scale = time_scale;
  const auto shape = load.shape;
  load.p = [shape, g](double y, double t) { return shape(y) * g(t); };
  load.validate();
  return load;
}

}  // namespace detail

inline ParsedConfig parse_config_json(const Json& j) {
  ParsedConfig out;
  if (j.contains("quadrature")) {
    const Json& q = j.at("quadrature");
    out.quadrature.epsilon = q.value("epsilon", out.quadrature.epsilon);
    out.quadrature.lambda_max = q.value("lambda_max", out.quadrature.lambda_max);
    out.quadrature.x_max = q.value("x_max", out.quadrature.x_max);
    out.quadrature.panel_tol = q.value("panel_tol", out.quadrature.panel_tol);
    out.quadrature.max_panels = q.value("max_panels", out.quadrature.max_panels);
    out.quadrature.validate();
  }
  if (j.contains("medium")) {
    out.medium = detail::parse_medium(j.at("medium"));
    if (j.contains("coupling")) {
      out.coupling = detail::parse_coupling(j.at("coupling"), *out.medium);
    }
  }
  if (j.contains("scenario")) {
    const Json& s = j.at("scenario");
    out.scenario = detail::parse_scenario(s);
    for (const std::string& w : out.scenario->consistency_warnings()) out.warnings.push_back(w);
    if (s.contains("load")) out.load = detail::parse_load(s.at("load"));
    if (s.contains("grid")) {
      const Json& g = s.at("grid");
      out.grid_x = detail::parse_axis(g.at("x"));
      out.grid_y = detail::parse_axis(g.at("y"));
      out.grid_t = detail::parse_axis(g.at("t"));
    }
  }
  if (j.contains("field")) out.field = j.at("field");
  if (!out.medium && !out.scenario) {
    throw BadConfig("config: needs a 'medium' or 'scenario' section");
  }
  return out;
}

inline ParsedConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BadConfig("config: cannot open '" + path + "'");
  Json j = Json::parse(in);  // malformed JSON raises nlohmann parse_error
  return parse_config_json(j);
}

// Analytic field families for round-trip runs. The same profile is applied
// to every component unless per-component profiles are given.
inline PiecewiseField build_field(const Json& j, const MediumStack& medium) {
  const std::string type = j.value("type", "poly_exp");
  if (type == "poly_exp") {
    std::vector<double> coeffs;
    if (j.contains("coeffs")) {
      for (const Json& c : j.at("coeffs")) coeffs.push_back(c.get<double>());
    } else {
      coeffs = {0.0, 1.0};
    }
    const double rate = j.value("rate", 1.0);
    if (!(rate > 0.0)) throw BadConfig("config: poly_exp rate must be positive");
    const int r = medium.r();
    const auto eval = [coeffs, rate, r](double x, int m) {
      // m-th derivative of sum_k c_k x^k e^{-rate x} via product expansion.
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
      const double v = p * std::exp(-rate * x);
      CVector out(r);
      for (int c = 0; c < r; ++c) out(c) = v;
      return out;
    };
    std::vector<PiecewiseField::Piece> pieces(static_cast<size_t>(medium.num_layers()), eval);
    DecayWitness witness;
    double peak = 0.0;
    for (double x = 0.0; x <= 40.0; x += 0.05) {
      peak = std::max(peak, eval(x, 0).cwiseAbs().maxCoeff() * std::exp(0.5 * rate * x));
    }
    witness.C = peak * 1.1 + 1e-12;
    witness.a = 0.5 * rate;
    return PiecewiseField(medium, std::move(pieces), witness);
  }
  throw BadConfig("config: unknown field type '" + type + "'");
}

}  // namespace lamtrans
