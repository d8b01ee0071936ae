/// @file norms.hpp
/// @brief Discrete surrogates of the solution, data and initial-value norms.
///
/// Time integrals use the composite midpoint rule: a node series is first
/// reduced to cell values (the mean of the two bounding nodes) and every cell
/// carries weight dt. Horizontal integrals give each torus point weight
/// dx^(dim-1). Singular double integrals skip the diagonal cells and use the
/// minimal-image distance on the torus.
#pragma once

#include "flatflow/grid.hpp"
#include "flatflow/nonlinear.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace flatflow {

struct NormConfig {
  /// Integrability exponent; must satisfy p > dim + 2.
  double p = 5.0;

  /// Rules violated for a given spatial dimension (empty when valid).
  std::vector<std::string> errors(int dim) const;
  /// Throws ConfigError listing every violated rule.
  void validate(int dim) const;
};

using SurfaceSeries = std::vector<SurfaceField>;
using FieldSeries = std::vector<TwoPhaseField>;

/// Node series -> cell series (mean of neighbouring nodes).
SurfaceSeries cell_average(const SurfaceSeries& nodes);
FieldSeries cell_average(const FieldSeries& nodes);
/// Node series -> cell series of (f_{c+1} - f_c) / dt.
SurfaceSeries cell_difference(const SurfaceSeries& nodes, double dt);
FieldSeries cell_difference(const FieldSeries& nodes, double dt);

/// (sum_c dt sum_x dx^m |f|^p)^(1/p) over a cell series, all components.
double lp_norm(const SurfaceSeries& cells, double dt, double p);
/// Same over both phase blocks (trapezoid weights in xi_N).
double lp_norm(const FieldSeries& cells, double dt, double p);

/// Time Slobodeckii seminorm of order s in (0,1): kernel |t - t'|^(1 + s p).
double time_seminorm(const SurfaceSeries& cells, double dt, double s, double p);
/// Horizontal Slobodeckii seminorm of order s in (0,1): kernel |x - y|^(m + s p), m = dim - 1.
double space_seminorm(const SurfaceSeries& cells, double dt, double s, double p);
/// Isotropic seminorm within each phase block at one time: kernel |x - y|^(dim + s p).
double bulk_seminorm(const TwoPhaseField& f, double s, double p);

/// Time part of the interface data seminorm, order 1/2 - 1/(2p), on a node series.
/// Throws DomainError for a single time node.
double seminorm_F3_time(const SurfaceSeries& nodes, const TimeGrid& t, const NormConfig& cfg);
/// Space part, order 1 - 1/p.
double seminorm_F3_space(const SurfaceSeries& nodes, const TimeGrid& t, const NormConfig& cfg);
/// Lp + both seminorms.
double norm_F3(const SurfaceSeries& nodes, const TimeGrid& t, const NormConfig& cfg);
/// Grid maximum + both seminorms.
double norm_Ftilde3(const SurfaceSeries& nodes, const TimeGrid& t, const NormConfig& cfg);

struct ENorms {
  double velocity = 0.0;   // H^1(J, Lp) cap Lp(J, H^2)
  double pressure = 0.0;   // Lp(J, grad-seminorm)
  double jump = 0.0;       // interface pressure jump
  std::array<double, 4> height_parts{};  // four intersected spaces for h
  double height = 0.0;     // max of the parts
  double total() const { return velocity + pressure + jump + height; }
};

struct FNorms {
  double momentum = 0.0;
  double divergence = 0.0;  // Lp(J,H^1) of f_d plus the potential surrogate
  double interface = 0.0;
  double kinematic = 0.0;
  double total() const { return momentum + divergence + interface + kinematic; }
};

struct INorms {
  double velocity = 0.0;
  double height = 0.0;
  double total() const { return velocity + height; }
};

ENorms norm_E_spaces(const StateZ& z, const NormConfig& cfg);
FNorms norm_F_spaces(const DataF& d, const NormConfig& cfg);
INorms norm_I(const TwoPhaseField& u0, const SurfaceField& h0, const NormConfig& cfg);

/// Names and meaning of each surrogate, for reports.
std::vector<std::pair<std::string, std::string>> norm_surrogates();

struct AlgebraRatios {
  double ftilde_algebra = 0.0;  // |fg|~ / (|f|~ |g|~)
  double f3_product = 0.0;      // |fg|_F3 / (|f|_F3 |g|~)
  double composition = 0.0;     // |sin(g)|~ / (1 + |g|_seminorm)
};

AlgebraRatios algebra_inequality_probe(const SurfaceSeries& f, const SurfaceSeries& g, const TimeGrid& t,
                                       const NormConfig& cfg);

}  // namespace flatflow
