/// Command-line front end: check, run, export, probe-smallness, probe-norms.
#include "flatflow/errors.hpp"
#include "flatflow/fixedpoint.hpp"
#include "flatflow/norms.hpp"
#include "flatflow/run.hpp"
#include "flatflow/run_config.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>

using namespace flatflow;

namespace {

constexpr int kConfigExit = 4;

int do_check(const std::string& path) {
  const RunConfig cfg = load_config(path);
  const CompatibilityReport rep =
      check_compatibility(cfg.phases(), cfg.initial_velocity(), cfg.initial_height(), cfg.solver.compat_tol);
  std::printf("config %s valid (hash %s)\n", path.c_str(), config_hash(cfg).c_str());
  std::printf("tangential stress jump      %.6e  (scale %.6e)  %s\n", rep.tangential_max, rep.stress_scale,
              rep.tangential_pass ? "pass" : "FAIL");
  std::printf("interface-form tangential   %.6e  %s\n", rep.tangential_from_conditions_max,
              rep.conditions_pass ? "pass" : "FAIL");
  std::printf("divergence                  %.6e  %s\n", rep.divergence, rep.divergence_pass ? "pass" : "FAIL");
  std::printf("velocity jump               %.6e  %s\n", rep.velocity_jump, rep.jump_pass ? "pass" : "FAIL");
  std::printf("max induced pressure jump   %.6e\n", rep.theta_jump.max_abs());
  return rep.pass() ? 0 : exit_code(SolveStatus::incompatible);
}

int do_run(const std::string& path, const std::string& dir) {
  const RunConfig cfg = load_config(path);
  const RunOutcome out = run(cfg, dir);
  const ConvergenceReport& rep = out.result.report;
  std::printf("status %s after %zu iterations\n", to_string(out.status).c_str(), rep.iterations.size());
  for (std::size_t m = 0; m < rep.iterations.size(); ++m)
    std::printf("  iter %2zu  residual %.3e  ratio %.3f  |z| %.3e  |N(z)| %.3e\n", m + 1, rep.iterations[m].residual,
                rep.iterations[m].ratio, rep.iterations[m].z_norm, rep.iterations[m].n_norm);
  if (!rep.message.empty()) std::printf("%s\n", rep.message.c_str());
  std::printf("artifacts in %s\n", out.dir.string().c_str());
  return exit_code(out.status);
}

int do_export(const std::string& run_dir, const std::string& quantity, const std::string& format,
              const std::string& out) {
  const auto path = export_series(run_dir, quantity, format, out);
  std::printf("%s\n", path.string().c_str());
  return 0;
}

int do_probe_smallness(const std::string& path, std::vector<double> eps, int directions, unsigned seed) {
  const RunConfig cfg = load_config(path);
  const PhasePair phases = cfg.phases();
  std::sort(eps.begin(), eps.end(), std::greater<>());
  int low = 0;
  for (int d = 0; d < directions; ++d) {
    const StateZ dir = random_direction(cfg.grid, cfg.time, seed + d);
    const SmallnessProbe probe = smallness_probe(phases, dir, eps, cfg.norms, {cfg.solver.dealias});
    std::printf("direction %d:", d);
    for (std::size_t i = 0; i < eps.size(); ++i) std::printf("  |N(%.0e z)| = %.4e", eps[i], probe.norms[i]);
    if (probe.degenerate) {
      std::printf("  slope degenerate\n");
    } else {
      std::printf("  slope %.3f\n", probe.slope);
      if (probe.slope < 1.9) ++low;
    }
  }
  return low == 0 ? 0 : 2;
}

int do_probe_norms(const std::string& path, int pairs, unsigned seed) {
  const RunConfig cfg = load_config(path);
  for (const auto& [name, meaning] : norm_surrogates()) std::printf("%-12s %s\n", name.c_str(), meaning.c_str());
  double max_alg = 0.0, max_f3 = 0.0, max_comp = 0.0;
  for (int q = 0; q < pairs; ++q) {
    const StateZ a = random_direction(cfg.grid, cfg.time, seed + 2 * q);
    const StateZ b = random_direction(cfg.grid, cfg.time, seed + 2 * q + 1);
    const AlgebraRatios r = algebra_inequality_probe(a.h, b.h, cfg.time, cfg.norms);
    max_alg = std::max(max_alg, r.ftilde_algebra);
    max_f3 = std::max(max_f3, r.f3_product);
    max_comp = std::max(max_comp, r.composition);
  }
  std::printf("algebra probe over %d pairs (p = %g): max |fg|~/(|f|~|g|~) = %.4f, max product ratio = %.4f, "
              "max composition ratio = %.4f\n",
              pairs, cfg.norms.p, max_alg, max_f3, max_comp);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-phase generalized Newtonian flow with a flattened interface"};
  app.require_subcommand(1);

  std::string config_path, run_dir, quantity, format = "csv", out_path;
  std::vector<double> eps{1e-1, 3e-2, 1e-2};
  int directions = 5, pairs = 100;
  unsigned seed = 1;

  auto* check = app.add_subcommand("check", "Validate a config and check initial-data compatibility");
  check->add_option("config", config_path, "Run description (JSON)")->required();

  auto* runc = app.add_subcommand("run", "Solve and write artifacts");
  runc->add_option("config", config_path, "Run description (JSON)")->required();
  runc->add_option("-o,--out", run_dir, "Output directory (default: output.dir from the config)");

  auto* exp = app.add_subcommand("export", "Export a stored series of a run");
  exp->add_option("run_dir", run_dir, "Run directory")->required();
  exp->add_option("quantity", quantity, "h, spectrum, first_mode, interface, velocity, convergence")->required();
  exp->add_option("-f,--format", format, "csv, tsv, binary or jsonl");
  exp->add_option("-o,--out", out_path, "Output file");

  auto* smallness = app.add_subcommand("probe-smallness", "Log-log slope of eps -> |N(eps z)|");
  smallness->add_option("config", config_path, "Run description (JSON)")->required();
  smallness->add_option("--eps", eps, "Scalings");
  smallness->add_option("--directions", directions, "Number of random directions");
  smallness->add_option("--seed", seed, "Seed of the first direction");

  auto* pnorms = app.add_subcommand("probe-norms", "Norm surrogates and algebra-inequality constants");
  pnorms->add_option("config", config_path, "Run description (JSON)")->required();
  pnorms->add_option("--pairs", pairs, "Number of random pairs");
  pnorms->add_option("--seed", seed, "Seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*check) return do_check(config_path);
    if (*runc) return do_run(config_path, run_dir);
    if (*exp) return do_export(run_dir, quantity, format, out_path);
    if (*smallness) return do_probe_smallness(config_path, eps, directions, seed);
    if (*pnorms) return do_probe_norms(config_path, pairs, seed);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error:\n";
    for (const auto& r : e.rules()) std::cerr << "  - " << r << '\n';
    return kConfigExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
