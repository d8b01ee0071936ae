/// @file run_config.hpp
/// @brief Run description: every solver, model and output knob in one
/// nested JSON document.
#pragma once

#include "flatflow/constitutive.hpp"
#include "flatflow/fixedpoint.hpp"
#include "flatflow/grid.hpp"
#include "flatflow/norms.hpp"

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace flatflow {

struct ViscositySpec {
  std::string family = "newtonian";
  double nu = 1.0;
  double d = 2.0;
  /// Sample points of a "table" law.
  std::vector<double> table_s;
  std::vector<double> table_mu;

  ViscosityModel build() const;
};

struct PhaseSpec {
  double rho = 1.0;
  ViscositySpec viscosity;
};

/// a cos(k.x'/L_h) + b sin(k.x'/L_h) with integer mode indices k.
struct HeightMode {
  std::array<int, 2> k{1, 0};
  double cos_amp = 0.0;
  double sin_amp = 0.0;
};

/// Physical stream function psi = amplitude sin(k.x'/L_h) w(x_N) with a
/// compactly supported vertical profile w. The velocity (d_N psi, 0, -d_0 psi)
/// is divergence free and continuous across the interface.
struct StreamMode {
  std::array<int, 2> k{1, 0};
  double amplitude = 0.0;
};

struct InitialSpec {
  std::vector<HeightMode> h0;
  std::vector<StreamMode> u0;
};

struct OutputSpec {
  std::string dir = "run";
  /// Velocity snapshots are written every `cadence` time nodes.
  int cadence = 1;
  /// Any of "csv", "binary".
  std::vector<std::string> formats{"csv"};
};

struct RunConfig {
  StripGrid grid;
  TimeGrid time;
  PhaseSpec lower;
  PhaseSpec upper;
  double sigma = 1.0;
  double gamma_a = 0.0;
  InitialSpec initial;
  SolveConfig solver;
  NormConfig norms;
  OutputSpec output;

  /// Every violated rule, each naming the offending key.
  std::vector<std::string> errors() const;
  void validate() const;

  PhasePair phases() const;
  SurfaceField initial_height() const;
  TwoPhaseField initial_velocity() const;
};

/// Parses and validates a JSON document. Throws ConfigError carrying every
/// problem found (parse errors, unknown keys, type mismatches, rule violations).
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON form with every field present.
std::string serialize_config(const RunConfig& cfg);

/// Hex SHA-256 of the canonical form.
std::string config_hash(const RunConfig& cfg);

/// Hex SHA-256 of an arbitrary byte string.
std::string sha256_hex(const std::string& bytes);

}  // namespace flatflow
