// Uniform elastic half-plane driven by a Gaussian surface pulse: reconstructs
// the two tension components on a small grid, differentiates them into
// displacements and stresses, and compares the surface normal stress with the
// applied load.

#include <cmath>
#include <cstdio>

#include "lamtrans/lamtrans.hpp"

int main() {
  using namespace lamtrans;

  const ParsedConfig cfg = parse_config_json(Json::parse(R"({
    "scenario": {
      "layers": [{"lame_lambda": 2.0, "lame_mu": 1.0, "c1": 2.0, "c2": 1.0}],
      "interfaces": [0.0],
      "load": {
        "type": "gaussian", "amplitude": 1.0, "center": 0.0, "width": 0.4,
        "time_profile": {"type": "pulse", "t0": 0.3}
      },
      "grid": {
        "x": {"min": 0.0, "max": 1.0, "count": 5},
        "y": {"min": -1.0, "max": 1.0, "count": 5},
        "t": [0.3, 0.6]
      }
    },
    "quadrature": {"lambda_max": 6.0, "panel_tol": 1e-5}
  })"));
  const ElasticScenario& scenario = *cfg.scenario;
  const LoadSpec& load = *cfg.load;

  std::printf("reconstructing tension on a %zux%zux%zu grid...\n", cfg.grid_x.size(),
              cfg.grid_y.size(), cfg.grid_t.size());
  const TensionGrid tension = reconstruct_tension_grid(scenario, load, cfg.grid_x, cfg.grid_y,
                                                       cfg.grid_t, cfg.quadrature);
  std::printf("tension scale %.4e, conjugation residue %.2e\n", tension.field_scale,
              tension.conj_symmetry_residue);

  const FieldGrid fields = fields_from_tension(tension, scenario);

  double field_max = 0.0;
  for (const auto& comp : {fields.u, fields.v, fields.sigma_x, fields.sigma_y, fields.tau_xy}) {
    for (const auto& seg : comp) {
      for (double v : seg) field_max = std::max(field_max, std::abs(v));
    }
  }
  std::printf("max |field| over the grid: %.4e\n", field_max);

  // At the driven surface the normal stress should reproduce -p(y, t).
  std::printf("\nsurface normal stress vs applied load\n");
  std::printf("%8s %8s %14s %14s\n", "y", "t", "sigma_x(0,y,t)", "-p(y,t)");
  double worst = 0.0;
  for (size_t iy = 0; iy < fields.y.size(); ++iy) {
    for (size_t it = 0; it < fields.t.size(); ++it) {
      const double sx = fields.at(fields.sigma_x, 0, 0, static_cast<int>(iy),
                                  static_cast<int>(it));
      const double p = -load.p(fields.y[iy], fields.t[it]);
      std::printf("%8.2f %8.2f %14.6f %14.6f\n", fields.y[iy], fields.t[it], sx, p);
      worst = std::max(worst, std::abs(sx - p));
    }
  }
  std::printf("worst surface mismatch %.3e (load peak %.3f)\n", worst,
              load.p(0.0, cfg.grid_t.back()));
  return 0;
}
