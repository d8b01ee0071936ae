/// @file nonlinear.hpp
/// @brief Right-hand sides of the flattened two-phase system and the map N(z).
#pragma once

#include "flatflow/constitutive.hpp"
#include "flatflow/geometry.hpp"
#include "flatflow/grid.hpp"

#include <vector>

namespace flatflow {

/// Space-time trajectory (u, theta, pi, h) on the nodes of a TimeGrid.
struct StateZ {
  StripGrid grid;
  TimeGrid time;
  std::vector<TwoPhaseField> u;      // vector rank
  std::vector<TwoPhaseField> theta;  // scalar
  std::vector<SurfaceField> pi;      // jump of theta
  std::vector<SurfaceField> h;

  static StateZ zero(const StripGrid& g, const TimeGrid& t);

  StateZ& operator+=(const StateZ& o);
  StateZ& operator-=(const StateZ& o);
  StateZ& operator*=(double s);
  double max_abs() const;
};

StateZ operator+(StateZ a, const StateZ& b);
StateZ operator-(StateZ a, const StateZ& b);
StateZ operator*(double s, StateZ a);

/// Data tuple (F, f_d, G, g_h). `f_d_potential` carries phi with f_d = D_N phi.
struct DataF {
  StripGrid grid;
  TimeGrid time;
  std::vector<TwoPhaseField> F;    // vector rank
  std::vector<TwoPhaseField> f_d;  // scalar
  std::vector<TwoPhaseField> f_d_potential;
  std::vector<SurfaceField> G;     // dim components
  std::vector<SurfaceField> g_h;

  static DataF zero(const StripGrid& g, const TimeGrid& t);

  DataF& operator+=(const DataF& o);
  DataF& operator*=(double s);
  double max_abs() const;
};

DataF operator+(DataF a, const DataF& b);
DataF operator*(double s, DataF a);

struct NonlinearOptions {
  /// Apply the 2/3 rule to every output of N.
  bool dealias = true;
};

/// Discrete d_tau of a height series: backward difference, forward at node 0.
std::vector<SurfaceField> time_derivative(const std::vector<SurfaceField>& h, const TimeGrid& t);

/// Viscous remainder: sum (A(E(u,h)) - A(0)) applied to the pulled-back
/// physical second derivatives of u, phase by phase.
TwoPhaseField eval_A(const PhasePair& phases, const TwoPhaseField& u, const HeightField& h);
TwoPhaseField eval_A(const PhasePair& phases, const TwoPhaseField& u, const GeometryJet& jet);

/// Interface stress remainder (dim components) built from one-sided traces.
SurfaceField eval_B(const PhasePair& phases, const TwoPhaseField& u, const HeightField& h);
SurfaceField eval_B(const PhasePair& phases, const TwoPhaseField& u, const GeometryJet& jet);

/// Momentum right-hand side: convection in flattened coordinates, the
/// geometric Laplacian correction, the pressure correction and eval_A.
TwoPhaseField eval_F(const PhasePair& phases, const TwoPhaseField& u, const TwoPhaseField& theta,
                     const HeightField& h, const SurfaceField& dh_dtau);

struct DivergenceData {
  TwoPhaseField value;            // (D_N u') . grad' h
  TwoPhaseField divergence_form;  // D_N (u' . grad' h)
  TwoPhaseField potential;        // u' . grad' h
};

DivergenceData eval_Fd(const TwoPhaseField& u, const HeightField& h);

/// Interface stress right-hand side (dim components).
SurfaceField eval_G(const PhasePair& phases, const TwoPhaseField& u, const SurfaceField& pi, const HeightField& h);

/// Kinematic right-hand side -u'.grad' h at the interface.
SurfaceField eval_Gh(const TwoPhaseField& u, const HeightField& h);

/// N(z) at every time node.
DataF eval_N(const PhasePair& phases, const StateZ& z, const NonlinearOptions& options = {});

}  // namespace flatflow
