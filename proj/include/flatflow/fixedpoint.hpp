/// @file fixedpoint.hpp
/// @brief Compatibility checks, the waveform Picard iteration z -> L^{-1}(N(z), u0, h0)
/// and its diagnostics.
#pragma once

#include "flatflow/constitutive.hpp"
#include "flatflow/geometry.hpp"
#include "flatflow/nonlinear.hpp"
#include "flatflow/norms.hpp"
#include "flatflow/stokes.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace flatflow {

struct SolveConfig {
  int max_iter = 30;
  /// Relative change of the solution norm that stops the iteration.
  double tol = 1e-9;
  /// Iterates whose solution norm exceeds this are declared divergent.
  double delta0_guard = 1e3;
  /// Relative tolerance of the initial-data compatibility checks.
  double compat_tol = 1e-2;
  bool dealias = true;

  std::vector<std::string> errors() const;
  void validate() const;
};

enum class SolveStatus { converged, diverged, max_iter, incompatible };

std::string to_string(SolveStatus s);
/// 0 converged, 2 diverged or out of iterations, 3 incompatible data.
int exit_code(SolveStatus s);

struct CompatibilityReport {
  /// Tangential part of [2 mu(|E|^2) E n] (dim components).
  SurfaceField tangential;
  /// The same quantity recovered from the interface-condition residual.
  SurfaceField tangential_from_conditions;
  /// Residual G(u0, [theta0], h0) minus the left-hand sides of the interface rows.
  SurfaceField condition_residual;
  /// Interface pressure jump implied by the normal stress balance.
  SurfaceField theta_jump;

  double tangential_max = 0.0;
  double tangential_from_conditions_max = 0.0;
  double divergence = 0.0;     // relative to max |grad u0|
  double velocity_jump = 0.0;  // relative to max |u0|
  double stress_scale = 0.0;

  bool tangential_pass = true;
  bool conditions_pass = true;
  bool divergence_pass = true;
  bool jump_pass = true;

  /// Pass/fail of the stress-form conditions.
  bool pass() const { return tangential_pass && divergence_pass && jump_pass; }
  /// Pass/fail of the interface-condition form.
  bool pass_conditions() const { return conditions_pass && divergence_pass && jump_pass; }
};

CompatibilityReport check_compatibility(const PhasePair& phases, const TwoPhaseField& u0, const SurfaceField& h0,
                                        double tol = 1e-2);

struct InterfaceResiduals {
  double tangential = 0.0;
  double normal = 0.0;
  double kinematic = 0.0;
  double max() const;
};

/// Left-hand sides of the interface stress rows minus G at one time node
/// (dim components: tangential rows first, then the normal row).
SurfaceField interface_row_residual(const PhasePair& phases, const TwoPhaseField& u, const SurfaceField& pi,
                                    const SurfaceField& h, const NonlinearOptions& options);

/// Residuals of the nonlinear interface rows at every time node after the first.
InterfaceResiduals interface_residuals(const PhasePair& phases, const StateZ& z, const NonlinearOptions& options);

struct IterationRecord {
  double residual = 0.0;  // |z_{m+1} - z_m| / |z_{m+1}|
  double ratio = 0.0;     // residual_m / residual_{m-1}
  double z_norm = 0.0;
  double n_norm = 0.0;    // |N(z_m)|
};

struct ConvergenceReport {
  SolveStatus status = SolveStatus::max_iter;
  std::vector<IterationRecord> iterations;
  double linv_estimate = 0.0;
  double initial_norm = 0.0;  // |(u0, h0)| in the initial-value norm
  InterfaceResiduals interface;
  double interface_tolerance = 0.0;
  bool interface_consistent = false;
  std::string message;
};

struct PicardResult {
  StateZ z;
  ConvergenceReport report;
  CompatibilityReport compatibility;
};

PicardResult picard_solve(const PhasePair& phases, const TwoPhaseField& u0, const SurfaceField& h0, const TimeGrid& time,
                          const SolveConfig& config, const NormConfig& norms);

struct SmallnessProbe {
  std::vector<double> epsilons;
  std::vector<double> norms;
  double slope = 0.0;
  bool degenerate = false;
};

/// Log-log slope of eps -> |N(eps z)|.
SmallnessProbe smallness_probe(const PhasePair& phases, const StateZ& direction, const std::vector<double>& epsilons,
                               const NormConfig& norms, const NonlinearOptions& options = {});

/// Random smooth trajectory built from modes with |index| <= kmax and
/// polynomial vertical profiles. Heights stay below 0.1 L_v.
StateZ random_direction(const StripGrid& g, const TimeGrid& t, std::uint64_t seed, int kmax = 2);

struct PhysicalSnapshot {
  double t = 0.0;
  HeightField interface;
  PhysicalField velocity;
  PhysicalField pressure;  // theta minus the hydrostatic part rho * gamma_a * x_N
};

/// Physical-coordinate fields at every time node. Throws DomainError if the
/// interface leaves the strip.
std::vector<PhysicalSnapshot> pushforward_solution(const PhasePair& phases, const StateZ& z, double spacing = 0.0);

}  // namespace flatflow
