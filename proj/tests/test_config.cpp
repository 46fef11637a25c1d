#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "lamtrans/config.hpp"

using namespace lamtrans;

TEST_CASE("complex and matrix entries parse from numbers and pairs") {
  const Json plain = Json::parse(R"([[3]])");
  REQUIRE(detail::parse_matrix(plain).m()(0, 0) == Complex(3.0, 0.0));

  const Json pair = Json::parse(R"([[[1, 2]]])");
  REQUIRE(detail::parse_matrix(pair).m()(0, 0) == Complex(1.0, 2.0));

  const Json full = Json::parse(R"([[1, [0, -1]], [[0, 1], 1]])");
  const CMatrix m = detail::parse_matrix(full);
  REQUIRE(m.dim() == 2);
  REQUIRE(m.m()(0, 1) == Complex(0.0, -1.0));
  REQUIRE(m.m()(1, 0) == Complex(0.0, 1.0));

  REQUIRE_THROWS_AS(detail::parse_matrix(Json::parse(R"([[{}]])")), BadConfig);
  REQUIRE_THROWS_AS(detail::parse_matrix(Json::parse(R"([[1, 2], [3]])")), BadConfig);
  REQUIRE_THROWS_AS(detail::parse_matrix(Json::parse(R"([])")), BadConfig);
  REQUIRE_THROWS_AS(detail::parse_matrix(Json::parse(R"(7)")), BadConfig);
  REQUIRE_THROWS_AS(detail::parse_complex(Json::parse(R"([1, 2, 3])")), BadConfig);
}

TEST_CASE("axes parse from explicit arrays and min/max/count ranges") {
  REQUIRE(detail::parse_axis(Json::parse(R"([0.1, 0.5, 2])")) ==
          std::vector<double>{0.1, 0.5, 2.0});

  const std::vector<double> lin =
      detail::parse_axis(Json::parse(R"({"min": 0, "max": 1, "count": 5})"));
  REQUIRE(lin == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});

  REQUIRE(detail::parse_axis(Json::parse(R"({"min": 3, "max": 3, "count": 1})")) ==
          std::vector<double>{3.0});

  REQUIRE_THROWS_AS(detail::parse_axis(Json::parse(R"({"min": 0, "max": 1, "count": 0})")),
                    BadConfig);
  REQUIRE_THROWS_AS(detail::parse_axis(Json::parse(R"({"min": 1, "max": 0, "count": 3})")),
                    BadConfig);
  REQUIRE_THROWS_AS(detail::parse_axis(Json::parse(R"([])")), BadConfig);
}

namespace {

Json two_layer_medium_json() {
  return Json::parse(R"({
    "r": 1,
    "interfaces": [0.0, 1.0],
    "layers": [
      {"A_sq": [[1]], "Gamma_sq": [[0]]},
      {"A_sq": [[1]], "Gamma_sq": [[0]]}
    ]
  })");
}

}  // namespace

TEST_CASE("the dirichlet shortcut builds the value boundary and transparent interfaces") {
  Json j;
  j["medium"] = two_layer_medium_json();
  j["coupling"] = "dirichlet";
  const ParsedConfig cfg = parse_config_json(j);
  REQUIRE(cfg.medium.has_value());
  REQUIRE(cfg.coupling.has_value());
  REQUIRE(cfg.medium->n() == 1);
  REQUIRE(cfg.coupling->boundary.beta.m()(0, 0) == Complex(-1.0, 0.0));
  REQUIRE(cfg.coupling->boundary.alpha.max_abs() == 0.0);
  REQUIRE(cfg.coupling->interfaces.size() == 1);
  const InterfaceCoupling& ic = cfg.coupling->interfaces[0];
  for (int m = 0; m < 2; ++m) {
    REQUIRE(ic.alpha[0][m].m()(0, 0) == Complex(1.0, 0.0));
    REQUIRE(ic.beta[0][m].max_abs() == 0.0);
    REQUIRE(ic.beta[1][m].m()(0, 0) == Complex(1.0, 0.0));
    REQUIRE(ic.alpha[1][m].max_abs() == 0.0);
  }

  j["coupling"] = "neumann";
  REQUIRE_THROWS_AS(parse_config_json(j), BadConfig);
}

TEST_CASE("explicit coupling blocks parse with omitted matrices defaulting to zero") {
  Json j;
  j["medium"] = two_layer_medium_json();
  j["coupling"] = Json::parse(R"({
    "boundary": {"alpha": [[1]], "gamma": [[0.5]]},
    "interfaces": [
      {"j1": {"alpha_1": [[1]], "alpha_2": [[2]]},
       "j2": {"beta_1": [[1]], "beta_2": [[1]], "delta_2": [[[0, 0.25]]]}}
    ]
  })");
  const ParsedConfig cfg = parse_config_json(j);
  const CouplingSet& cs = *cfg.coupling;
  REQUIRE(cs.boundary.alpha.m()(0, 0) == Complex(1.0, 0.0));
  REQUIRE(cs.boundary.beta.max_abs() == 0.0);
  REQUIRE(cs.boundary.gamma.m()(0, 0) == Complex(0.5, 0.0));
  const InterfaceCoupling& ic = cs.interfaces[0];
  REQUIRE(ic.alpha[0][1].m()(0, 0) == Complex(2.0, 0.0));
  REQUIRE(ic.delta[1][1].m()(0, 0) == Complex(0.0, 0.25));
  REQUIRE(ic.gamma[0][0].max_abs() == 0.0);

  // A coupling without its boundary block is a schema error, not a domain one.
  j["coupling"] = Json::parse(R"({"interfaces": []})");
  REQUIRE_THROWS_AS(parse_config_json(j), nlohmann::json::exception);
}

TEST_CASE("quadrature overrides apply and are validated") {
  Json j;
  j["medium"] = two_layer_medium_json();
  j["coupling"] = "dirichlet";
  j["quadrature"] = Json::parse(R"({"epsilon": 1e-5, "lambda_max": 50, "x_max": 12.5})");
  const ParsedConfig cfg = parse_config_json(j);
  REQUIRE(cfg.quadrature.epsilon == 1e-5);
  REQUIRE(cfg.quadrature.lambda_max == 50.0);
  REQUIRE(cfg.quadrature.x_max == 12.5);

  j["quadrature"] = Json::parse(R"({"panel_tol": 0.5})");
  REQUIRE_THROWS_AS(parse_config_json(j), BadConfig);
}

TEST_CASE("scenario sections parse layers, loads, and grids") {
  const Json j = Json::parse(R"({
    "scenario": {
      "layers": [
        {"lame_lambda": 2.0, "lame_mu": 1.0, "c1": 2.0, "c2": 1.0},
        {"lame_lambda": 1.0, "lame_mu": 2.0, "c1": 3.0, "c2": 1.5}
      ],
      "interfaces": [0.0, 1.0],
      "load": {
        "type": "gaussian",
        "center": 0.5,
        "width": 0.25,
        "amplitude": 2.0,
        "time_profile": {"type": "pulse", "t0": 0.2}
      },
      "grid": {
        "x": [0.0, 0.5, 1.0],
        "y": {"min": -1, "max": 1, "count": 3},
        "t": {"min": 0.1, "max": 0.3, "count": 2}
      }
    }
  })");
  const ParsedConfig cfg = parse_config_json(j);
  REQUIRE(cfg.scenario.has_value());
  REQUIRE(cfg.scenario->layers.size() == 2);
  REQUIRE(cfg.scenario->layers[1].c1 == 3.0);
  // Layer 2's speeds and Lame constants disagree on density.
  REQUIRE(cfg.warnings.size() == 1);

  REQUIRE(cfg.load.has_value());
  const LoadSpec& load = *cfg.load;
  REQUIRE(load.separable());
  REQUIRE(load.y_lo == Catch::Approx(0.5 - 2.0).margin(1e-15));
  REQUIRE(load.y_hi == Catch::Approx(0.5 + 2.0).margin(1e-15));
  REQUIRE(load.time_scale == Catch::Approx(0.2).margin(1e-15));
  REQUIRE(load.shape(0.5) == Catch::Approx(2.0).margin(1e-15));
  REQUIRE(load.shape(0.75) == Catch::Approx(2.0 * std::exp(-0.5)).margin(1e-12));
  REQUIRE(load.time_factor(0.0) == 0.0);
  REQUIRE(load.time_factor(0.2) == Catch::Approx(std::exp(-1.0)).margin(1e-12));
  REQUIRE(load.p(0.5, 0.2) == Catch::Approx(2.0 * std::exp(-1.0)).margin(1e-12));

  REQUIRE(cfg.grid_x == std::vector<double>{0.0, 0.5, 1.0});
  REQUIRE(cfg.grid_y == std::vector<double>{-1.0, 0.0, 1.0});
  REQUIRE(cfg.grid_t == std::vector<double>{0.1, 0.3});
}

TEST_CASE("load and time profile variants parse with their guards") {
  const Json box = Json::parse(R"({
    "type": "box", "y_lo": -0.5, "y_hi": 0.5,
    "time_profile": {"type": "step_sine", "omega": 4.0}
  })");
  const LoadSpec bl = detail::parse_load(box);
  REQUIRE(bl.y_lo == -0.5);
  REQUIRE(bl.shape(0.0) == 1.0);
  REQUIRE(bl.shape(0.6) == 0.0);
  REQUIRE(bl.time_scale == Catch::Approx(2.0 * M_PI / 4.0 * 0.25).margin(1e-15));
  REQUIRE(bl.time_factor(0.3) == Catch::Approx(std::sin(1.2)).margin(1e-15));
  REQUIRE(bl.time_factor(-0.1) == 0.0);

  const Json constant = Json::parse(R"({
    "type": "box", "y_lo": 0.0, "y_hi": 1.0, "time_profile": {"type": "constant"}
  })");
  const LoadSpec cl = detail::parse_load(constant);
  REQUIRE(cl.time_factor(2.0) == 1.0);
  REQUIRE(cl.time_scale == 1.0);

  REQUIRE_THROWS_AS(
      detail::parse_load(Json::parse(R"({"type": "ring", "width": 1})")), BadConfig);
  REQUIRE_THROWS_AS(
      detail::parse_load(Json::parse(R"({"type": "gaussian", "width": -1})")), BadConfig);
  REQUIRE_THROWS_AS(detail::parse_load(Json::parse(R"({"type": "gaussian"})")),
                    nlohmann::json::exception);
  double ts = 0.0;
  REQUIRE_THROWS_AS(detail::parse_time_profile(Json::parse(R"({"type": "pulse", "t0": 0})"), &ts),
                    BadConfig);
  REQUIRE_THROWS_AS(detail::parse_time_profile(Json::parse(R"({"type": "chirp"})"), &ts),
                    BadConfig);
}

TEST_CASE("a config needs a medium or a scenario") {
  REQUIRE_THROWS_AS(parse_config_json(Json::parse(R"({"quadrature": {}})")), BadConfig);
  REQUIRE_THROWS_AS(parse_config_json(Json::object()), BadConfig);
}

TEST_CASE("config files load, reject missing paths, and surface parse errors") {
  const std::string good_path = "test_config_good.json";
  {
    std::ofstream out(good_path);
    out << R"({"medium": {"r": 1, "interfaces": [0.0],
               "layers": [{"A_sq": [[1]], "Gamma_sq": [[0]]}]},
               "coupling": "dirichlet"})";
  }
  const ParsedConfig cfg = parse_config_file(good_path);
  REQUIRE(cfg.medium.has_value());
  REQUIRE(cfg.medium->r() == 1);
  std::remove(good_path.c_str());

  REQUIRE_THROWS_AS(parse_config_file("no_such_config.json"), BadConfig);

  const std::string bad_path = "test_config_bad.json";
  {
    std::ofstream out(bad_path);
    out << "{ not json";
  }
  REQUIRE_THROWS_AS(parse_config_file(bad_path), nlohmann::json::parse_error);
  std::remove(bad_path.c_str());
}

TEST_CASE("poly_exp fields evaluate derivatives and carry an honest witness") {
  Json j;
  j["medium"] = two_layer_medium_json();
  j["coupling"] = "dirichlet";
  const ParsedConfig cfg = parse_config_json(j);

  // Default profile x e^{-x}.
  const PiecewiseField f = build_field(Json::object(), *cfg.medium);
  const double x = 1.3;
  REQUIRE(f.eval_layer(1, x, 0)(0).real() == Catch::Approx(x * std::exp(-x)).margin(1e-14));
  REQUIRE(f.eval_layer(2, x, 1)(0).real() ==
          Catch::Approx((1.0 - x) * std::exp(-x)).margin(1e-14));
  REQUIRE(f.eval_layer(1, x, 2)(0).real() ==
          Catch::Approx((x - 2.0) * std::exp(-x)).margin(1e-14));
  REQUIRE(f.witness().a == 0.5);
  // sup_x |x e^{-x}| e^{x/2} = 2/e, padded by ten percent.
  REQUIRE(f.witness().C == Catch::Approx(1.1 * 2.0 * std::exp(-1.0) + 1e-12).margin(1e-6));

  const Json spec = Json::parse(R"({"type": "poly_exp", "coeffs": [2, 0, 1], "rate": 0.5})");
  const PiecewiseField g = build_field(spec, *cfg.medium);
  REQUIRE(g.eval_layer(1, 1.0, 0)(0).real() == Catch::Approx(3.0 * std::exp(-0.5)).margin(1e-14));
  REQUIRE(g.eval_layer(1, 1.0, 1)(0).real() == Catch::Approx(0.5 * std::exp(-0.5)).margin(1e-14));
  REQUIRE(g.witness().a == 0.25);

  REQUIRE_THROWS_AS(build_field(Json::parse(R"({"rate": -1})"), *cfg.medium), BadConfig);
  REQUIRE_THROWS_AS(build_field(Json::parse(R"({"type": "wavelet"})"), *cfg.medium), BadConfig);
}
