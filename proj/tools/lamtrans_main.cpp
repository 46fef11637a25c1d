// Command-line front end: validate / roundtrip / solve / spectrum / verify.
//
// Exit codes are part of the interface and must stay stable:
//   0  success (all checks passed, outputs written)
//   1  a domain invariant failed or a computation reported failure
//   2  usage or config-parse errors (bad flags, malformed JSON, missing file)
//
// All CSV output is written single-threaded in a fixed order with %.17g
// formatting, so identical configs and seeds produce bit-identical files.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lamtrans/lamtrans.hpp"

namespace {

using lamtrans::Complex;
using lamtrans::Json;

// LAMTRANS_LOG=quiet silences progress notes; LAMTRANS_LOG=debug adds detail.
int log_level() {
  static const int level = [] {
    const char* e = std::getenv("LAMTRANS_LOG");
    if (!e) return 1;
    const std::string v(e);
    if (v == "quiet" || v == "0") return 0;
    if (v == "debug" || v == "2") return 2;
    return 1;
  }();
  return level;
}

void note(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[lamtrans] " << msg << "\n";
}

void debug_note(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[lamtrans:debug] " << msg << "\n";
}

// Usage-level problems that should exit 2 even though they are detected after
// flag parsing (unreadable config path, malformed --criteria list, ...).
struct UsageError {
  std::string message;
};

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  double lambda_max = 0.0;  // 0 keeps the config / derived value
  double epsilon = 0.0;     // 0 keeps the config value
  double panel_tol = 0.0;   // 0 keeps the config value
  int threads = 1;
  unsigned long long seed = 20240817ULL;
  double tolerance = 1e-3;      // roundtrip acceptance threshold
  std::string criteria_spec;    // verify: comma-separated criterion indices
};

void add_common_flags(CLI::App* cmd, CommonOpts* o, bool config_required) {
  auto* cfg = cmd->add_option("--config", o->config_path, "JSON config file");
  if (config_required) cfg->required();
  cmd->add_option("--out", o->out_dir, "output directory (created if absent)");
  cmd->add_option("--lambda-max", o->lambda_max, "override spectral truncation");
  cmd->add_option("--epsilon", o->epsilon, "override lower spectral cutoff");
  cmd->add_option("--panel-tol", o->panel_tol, "override panel tolerance");
  cmd->add_option("--threads", o->threads, "worker threads (output order is fixed)");
  cmd->add_option("--seed", o->seed, "seed for randomized checks");
}

lamtrans::ParsedConfig load_config(const CommonOpts& o) {
  if (!std::filesystem::exists(o.config_path)) {
    throw UsageError{"config file not found: " + o.config_path};
  }
  lamtrans::ParsedConfig cfg = lamtrans::parse_config_file(o.config_path);
  if (o.epsilon > 0.0) cfg.quadrature.epsilon = o.epsilon;
  if (o.lambda_max > 0.0) cfg.quadrature.lambda_max = o.lambda_max;
  if (o.panel_tol > 0.0) cfg.quadrature.panel_tol = o.panel_tol;
  cfg.quadrature.validate();
  for (const auto& w : cfg.warnings) std::cout << "warning: " << w << "\n";
  return cfg;
}

std::filesystem::path ensure_out_dir(const CommonOpts& o) {
  const std::filesystem::path dir(o.out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw UsageError{"cannot open output file: " + path.string()};
  return os;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    out.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (n - 1));
  }
  return out;
}

std::string g17(double v) { return lamtrans::detail::fmt_g17(v); }

// ---------------------------------------------------------------------------
// validate

int run_validate(const CommonOpts& opts) {
  const lamtrans::ParsedConfig cfg = load_config(opts);
  bool all_pass = true;

  const auto line = [](const std::string& name, bool pass, const std::string& detail) {
    std::cout << "check " << name << ": " << (pass ? "PASS" : "FAIL");
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << "\n";
  };

  const auto invertibility = [&](const lamtrans::CouplingSet& coupling,
                                 const lamtrans::MediumStack& medium,
                                 const std::string& name) {
    const double lo = cfg.quadrature.epsilon;
    const double hi = lamtrans::resolve_lambda_max(cfg.quadrature, medium);
    const std::vector<double> grid = linspace(lo, hi, 48);
    try {
      const auto cert = lamtrans::check_invertibility(coupling, medium, grid);
      const lamtrans::InvertibilityCertificate::Entry* w = nullptr;
      for (const auto& e : cert.entries) {
        if (!w || e.min_scaled_det < w->min_scaled_det) w = &e;
      }
      std::ostringstream d;
      if (w) {
        d << "min scaled det " << std::scientific << w->min_scaled_det << " for M_" << w->m
          << w->k << " at lambda=" << w->lambda_at_min;
      } else {
        d << "no interfaces";
      }
      line(name, true, d.str());
    } catch (const lamtrans::InvertibilityViolation& e) {
      line(name, false, e.what());
      all_pass = false;
    }
  };

  if (cfg.medium) {
    {
      std::ostringstream d;
      d << "r=" << cfg.medium->r() << ", layers=" << cfg.medium->num_layers()
        << ", x in [" << cfg.medium->l0() << ", inf)";
      line("medium", true, d.str());
    }
    if (cfg.coupling) {
      line("coupling", true, "boundary quad + " + std::to_string(cfg.medium->n()) + " interface junctions");
      invertibility(*cfg.coupling, cfg.medium.value(), "invertibility");
    } else {
      std::cout << "note: no coupling block; skipping invertibility check\n";
    }
  }

  if (cfg.scenario) {
    {
      std::ostringstream d;
      d << "layers=" << cfg.scenario->n() << ", max speed=" << cfg.scenario->max_speed();
      line("scenario", true, d.str());
    }
    // The reduced system depends on the transform variable; probe a few values.
    for (double xi : {0.0, 0.5, 2.0}) {
      const lamtrans::ElasticSystem sys = lamtrans::build_coupling(*cfg.scenario, xi);
      std::ostringstream name;
      name << "invertibility(xi=" << xi << ")";
      invertibility(sys.coupling, sys.medium, name.str());
    }
    if (cfg.load) {
      std::ostringstream d;
      d << "support [" << cfg.load->y_lo << ", " << cfg.load->y_hi << "], time scale "
        << cfg.load->time_scale;
      line("load", true, d.str());
    }
  }

  std::cout << "validate: " << (all_pass ? "PASS" : "FAIL") << "\n";
  return all_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// roundtrip

int run_roundtrip(const CommonOpts& opts) {
  const lamtrans::ParsedConfig cfg = load_config(opts);
  if (!cfg.medium || !cfg.coupling) {
    throw lamtrans::BadConfig("roundtrip requires a medium config with a coupling block");
  }
  const lamtrans::MediumStack& medium = *cfg.medium;
  const lamtrans::CouplingSet& coupling = *cfg.coupling;

  const lamtrans::PiecewiseField field =
      lamtrans::build_field(cfg.field.is_null() ? Json::object() : cfg.field, medium);

  std::vector<double> xs = cfg.grid_x;
  if (xs.empty()) {
    const double lo = medium.l0();
    const double hi = medium.ln() + 4.0;
    xs = linspace(lo, hi, 80);
  }
  // Drop samples next to an interface: one-sided traces are compared elsewhere.
  std::vector<double> kept;
  for (double x : xs) {
    bool near = false;
    for (int k = 1; k <= medium.n(); ++k) {
      if (std::abs(x - medium.interface(k)) < 1e-3) near = true;
    }
    if (!near && x >= medium.l0()) kept.push_back(x);
  }
  if (kept.empty()) throw lamtrans::BadConfig("roundtrip: sample grid is empty after filtering");

  note("roundtrip: " + std::to_string(kept.size()) + " samples");
  const auto t0 = std::chrono::steady_clock::now();
  const lamtrans::RoundtripReport rep =
      lamtrans::decompose_roundtrip(field, kept, medium, coupling, cfg.quadrature);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::filesystem::path dir = ensure_out_dir(opts);
  {
    std::ofstream os = open_out(dir / "roundtrip.csv");
    os << "x,component,f,reconstructed,abs_error\n";
    for (size_t i = 0; i < rep.x.size(); ++i) {
      for (int c = 0; c < rep.reference[i].size(); ++c) {
        const Complex ref = rep.reference[i](c);
        const Complex rec = rep.reconstructed[i](c);
        os << g17(rep.x[i]) << "," << c << "," << g17(ref.real()) << "," << g17(rec.real())
           << "," << g17(std::abs(rec - ref)) << "\n";
      }
    }
  }

  const bool pass = rep.max_rel_error <= opts.tolerance;
  std::cout << "roundtrip: samples=" << rep.x.size() << " field_scale=" << std::scientific
            << rep.field_scale << " max_rel_error=" << rep.max_rel_error
            << " truncation_estimate=" << rep.truncation_estimate << " tolerance="
            << opts.tolerance << " seconds=" << std::defaultfloat << seconds << " "
            << (pass ? "PASS" : "FAIL") << "\n";
  debug_note("inverse panels=" + std::to_string(rep.inverse_quadrature.panels) +
             " forward panels=" + std::to_string(rep.forward_quadrature.panels));
  return pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// solve

int run_solve(const CommonOpts& opts) {
  const lamtrans::ParsedConfig cfg = load_config(opts);
  if (!cfg.scenario || !cfg.load) {
    throw lamtrans::BadConfig("solve requires a scenario config with a load block");
  }
  if (cfg.grid_x.empty() || cfg.grid_y.empty() || cfg.grid_t.empty()) {
    throw lamtrans::BadConfig("solve requires x, y and t grids in the config");
  }

  note("solve: reconstructing tension on " + std::to_string(cfg.grid_x.size()) + "x" +
       std::to_string(cfg.grid_y.size()) + "x" + std::to_string(cfg.grid_t.size()) + " grid");
  const auto t0 = std::chrono::steady_clock::now();
  const lamtrans::TensionGrid tension = lamtrans::reconstruct_tension_grid(
      *cfg.scenario, *cfg.load, cfg.grid_x, cfg.grid_y, cfg.grid_t, cfg.quadrature);
  const double tension_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const lamtrans::FieldGrid fields = lamtrans::fields_from_tension(tension, *cfg.scenario);
  const lamtrans::InterfaceJumpReport jumps = lamtrans::interface_jumps(fields);
  const double total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::filesystem::path dir = ensure_out_dir(opts);
  for (size_t it = 0; it < fields.t.size(); ++it) {
    std::ofstream os = open_out(dir / ("field_t" + std::to_string(it) + ".csv"));
    lamtrans::write_field_csv(fields, static_cast<int>(it), os);
  }

  Json summary;
  summary["command"] = "solve";
  summary["seed"] = opts.seed;
  summary["times"] = fields.t;
  summary["field_scale"] = tension.field_scale;
  summary["conj_symmetry_residue"] = tension.conj_symmetry_residue;
  summary["seconds"] = Json{{"tension", tension_seconds}, {"total", total_seconds}};
  summary["interface_jumps"] = Json{{"max_jump_displacement", jumps.max_jump_displacement},
                                    {"max_jump_stress", jumps.max_jump_stress},
                                    {"displacement_scale", jumps.displacement_scale},
                                    {"stress_scale", jumps.stress_scale}};
  const auto panel_json = [](const lamtrans::PanelReport& r) {
    return Json{{"panels", r.panels},
                {"evaluations", r.evaluations},
                {"singular_nodes_skipped", r.singular_nodes_skipped},
                {"truncation_estimate", r.truncation_estimate},
                {"tail_bound", r.tail_bound}};
  };
  summary["xi_quadrature"] = panel_json(tension.xi_quadrature);
  summary["eta_quadrature"] = panel_json(tension.eta_quadrature);
  {
    std::ofstream os = open_out(dir / "solve_summary.json");
    os << summary.dump(2) << "\n";
  }

  std::cout << "solve: wrote " << fields.t.size() << " field slices to " << dir.string()
            << " field_scale=" << std::scientific << tension.field_scale
            << " conj_residue=" << tension.conj_symmetry_residue << std::defaultfloat << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// spectrum

int run_spectrum(const CommonOpts& opts) {
  const lamtrans::ParsedConfig cfg = load_config(opts);
  if (!cfg.medium || !cfg.coupling) {
    throw lamtrans::BadConfig("spectrum requires a medium config with a coupling block");
  }
  const lamtrans::MediumStack& medium = *cfg.medium;
  const int r = medium.r();

  std::vector<double> xs = cfg.grid_x;
  if (xs.empty()) xs = linspace(medium.l0(), medium.ln() + 2.0, 21);
  const double hi = lamtrans::resolve_lambda_max(cfg.quadrature, medium);
  const std::vector<double> lambdas = linspace(cfg.quadrature.epsilon, hi, 25);

  const std::filesystem::path dir = ensure_out_dir(opts);
  std::ofstream os = open_out(dir / "spectrum.csv");
  os << "lambda,layer,x";
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) {
      os << ",u_re_" << i << j << ",u_im_" << i << j;
    }
  }
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) {
      os << ",ustar_re_" << i << j << ",ustar_im_" << i << j;
    }
  }
  os << "\n";

  int skipped = 0;
  for (double lambda : lambdas) {
    try {
      const lamtrans::SpectralBasis basis = lamtrans::build_basis(medium, *cfg.coupling, lambda);
      if (basis.boundary_singular()) {
        ++skipped;
        continue;
      }
      for (double x : xs) {
        const int layer = medium.layer_of(x);
        const lamtrans::CMatrix u = lamtrans::spectral_u_layer(basis, layer, x);
        const lamtrans::CMatrix us = lamtrans::dual_u_layer(basis, layer, x);
        os << g17(lambda) << "," << layer << "," << g17(x);
        for (int i = 0; i < r; ++i) {
          for (int j = 0; j < r; ++j) {
            os << "," << g17(u(i, j).real()) << "," << g17(u(i, j).imag());
          }
        }
        for (int i = 0; i < r; ++i) {
          for (int j = 0; j < r; ++j) {
            os << "," << g17(us(i, j).real()) << "," << g17(us(i, j).imag());
          }
        }
        os << "\n";
      }
    } catch (const lamtrans::SingularNode&) {
      ++skipped;
    }
  }
  std::cout << "spectrum: wrote " << (lambdas.size() - static_cast<size_t>(skipped))
            << " lambda rows (" << skipped << " singular nodes skipped) to "
            << (dir / "spectrum.csv").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// verify

std::vector<int> parse_criteria(const std::string& spec) {
  std::vector<int> out;
  if (spec.empty()) return out;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      size_t pos = 0;
      const int v = std::stoi(tok, &pos);
      if (pos != tok.size() || v < 1 || v > 8) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw UsageError{"--criteria expects a comma-separated list of indices 1..8"};
    }
  }
  return out;
}

int run_verify(const CommonOpts& opts) {
  // Config is optional here; when given it only has to parse cleanly.
  if (!opts.config_path.empty()) {
    load_config(opts);
    std::cout << "config: OK (" << opts.config_path << ")\n";
  }
  const std::vector<int> criteria = parse_criteria(opts.criteria_spec);

  bool all_pass = true;

  // Oracle self-checks: the independent references the property suite leans on.
  {
    lamtrans::OracleReport sine;
    sine.name = "oracle sine-transform";
    sine.tolerance = 1e-5;
    for (double lambda : {0.5, 1.0, 2.0, 5.0}) {
      const double got =
          lamtrans::sine_transform_oracle([](double x) { return std::exp(-x); }, lambda);
      const double want = lambda / (1.0 + lambda * lambda);
      sine.record(std::abs(got - want), std::max(std::abs(want), 1e-3));
    }
    std::cout << sine.summary_line() << "\n";
    all_pass = all_pass && sine.pass();

    lamtrans::OracleReport ode;
    ode.name = "oracle ode-march";
    ode.tolerance = 1e-6;
    for (double omega : {0.7, 2.0}) {
      for (double t : {1.0, 2.5}) {
        const auto y = lamtrans::ode_march(
            omega, [](double) { return Complex(1.0, 0.0); }, t, 0.02 / omega);
        const double want = (1.0 - std::cos(omega * t)) / (omega * omega);
        ode.record(std::abs(y(0) - Complex(want, 0.0)), std::max(std::abs(want), 1e-3));
      }
    }
    std::cout << ode.summary_line() << "\n";
    all_pass = all_pass && ode.pass();
  }

  lamtrans::AcceptanceOptions aopt;
  aopt.seed = opts.seed;
  const std::vector<lamtrans::CriterionResult> results = lamtrans::run_acceptance(aopt, criteria);
  for (const auto& res : results) {
    std::printf("criterion %d %-24s %s  (%.1f s)\n", res.index, res.name.c_str(),
                res.pass ? "PASS" : "FAIL", res.seconds);
    for (const auto& d : res.details) std::printf("  - %s\n", d.c_str());
    all_pass = all_pass && res.pass;
  }
  std::cout << "verify: " << (all_pass ? "PASS" : "FAIL") << "\n";
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lambda-transform toolkit for layered media"};
  app.require_subcommand(1);

  CommonOpts vopt, ropt, sopt, popt, yopt;
  CLI::App* validate = app.add_subcommand("validate", "parse a config and check invariants");
  add_common_flags(validate, &vopt, true);
  CLI::App* roundtrip = app.add_subcommand("roundtrip", "inverse(forward(f)) error on a grid");
  add_common_flags(roundtrip, &ropt, true);
  roundtrip->add_option("--tolerance", ropt.tolerance, "max relative error to pass");
  CLI::App* solve = app.add_subcommand("solve", "time-domain field slices for a scenario");
  add_common_flags(solve, &sopt, true);
  CLI::App* spectrum = app.add_subcommand("spectrum", "dump u and dual u samples");
  add_common_flags(spectrum, &popt, true);
  CLI::App* verify = app.add_subcommand("verify", "run the acceptance criteria");
  add_common_flags(verify, &yopt, false);
  verify->add_option("--criteria", yopt.criteria_spec, "subset, e.g. 1,3,5 (default: all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (validate->parsed()) return run_validate(vopt);
    if (roundtrip->parsed()) return run_roundtrip(ropt);
    if (solve->parsed()) return run_solve(sopt);
    if (spectrum->parsed()) return run_spectrum(popt);
    if (verify->parsed()) return run_verify(yopt);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.message << "\n";
    return 2;
  } catch (const Json::parse_error& e) {
    std::cerr << "config parse error: " << e.what() << "\n";
    return 2;
  } catch (const Json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const lamtrans::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
