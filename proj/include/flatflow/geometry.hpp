/// @file geometry.hpp
/// @brief Interface flattening x_N = xi_N + h(xi') and the operators it induces.
#pragma once

#include "flatflow/grid.hpp"

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace flatflow {

/// Interface height on the horizontal torus. Construction checks that the
/// samples are finite and that the interface stays strictly inside the strip.
class HeightField {
 public:
  HeightField() = default;
  explicit HeightField(SurfaceField h);
  static HeightField zero(const StripGrid& g) { return HeightField(SurfaceField(g, 1)); }

  const StripGrid& grid() const { return h_.grid(); }
  const SurfaceField& field() const { return h_; }
  double operator()(int col) const { return h_(0, col); }
  double max_abs() const { return h_.max_abs(); }

  /// Periodic cubic interpolation at an arbitrary horizontal point.
  double evaluate(std::span<const double> x_h) const;

 private:
  SurfaceField h_;
};

/// Horizontal derivatives of h: gradient (dim-1 comps), Laplacian and the
/// symmetric Hessian stored row-major ((dim-1)^2 comps).
struct GeometryJet {
  SurfaceField grad;
  SurfaceField laplacian;
  SurfaceField hessian;

  /// D_j h for j in [0, dim); zero for the vertical direction.
  double dh(int j, int col) const;
  double ddh(int j, int k, int col) const;
};

GeometryJet geometry_jet(const HeightField& h);

using Point = std::array<double, 3>;

/// (xi', xi_N) -> (xi', xi_N + h(xi')).
Point flatten_map(const HeightField& h, const Point& xi);
/// (x', x_N) -> (x', x_N - h(x')).
Point inverse_map(const HeightField& h, const Point& x);

/// Samples of a field in physical coordinates. Each phase and column holds
/// ascending physical heights with values; the interface point x_N = h is
/// always one of the samples so no interpolation crosses the interface.
class PhysicalField {
 public:
  struct Column {
    std::vector<double> height;
    std::vector<double> values;  // [comp * height.size() + i]
  };

  PhysicalField() = default;
  PhysicalField(const StripGrid& g, int ncomp);

  const StripGrid& grid() const { return grid_; }
  int components() const { return ncomp_; }

  Column& column(Phase p, int col) { return columns_[phase_index(p)][col]; }
  const Column& column(Phase p, int col) const { return columns_[phase_index(p)][col]; }

  /// Cubic interpolation within one phase. Throws DomainError outside the
  /// sampled range.
  double evaluate(Phase p, int col, double x_n, int comp) const;

 private:
  StripGrid grid_{};
  int ncomp_ = 0;
  std::array<std::vector<Column>, 2> columns_;
};

/// Callback filling `out` (ncomp values) for phase p at physical point x.
using PhysicalFunction = std::function<void(Phase p, const Point& x, std::span<double> out)>;

/// Samples `fn` at the interface point, the strip ends mapped through h, and
/// every lattice height m*spacing between them (spacing <= 0 means dz).
PhysicalField sample_physical(const HeightField& h, int ncomp, const PhysicalFunction& fn, double spacing = 0.0);

/// u(xi) := v(Theta(xi)).
TwoPhaseField pullback(const PhysicalField& v, const HeightField& h);
/// v(x) := u(Theta^{-1}(x)) sampled on the lattice of sample_physical.
PhysicalField pushforward(const TwoPhaseField& u, const HeightField& h, double spacing = 0.0);

/// Physical derivative d/dx_j pulled back: D_j u - (D_j h) D_N u.
TwoPhaseField chain_rule_derivative(const TwoPhaseField& u, const HeightField& h, int j);
/// Physical time derivative pulled back: d_tau u - (d_tau h) D_N u.
TwoPhaseField time_chain_rule(const TwoPhaseField& du_dtau, const SurfaceField& dh_dtau, const TwoPhaseField& u);

/// (D_jD_k h)D_N + (D_j h)D_N D_k + (D_k h)D_j D_N - (D_j h)(D_k h)D_N^2 applied to u.
TwoPhaseField f_correction(const HeightField& h, const TwoPhaseField& u, int j, int k);
TwoPhaseField f_correction(const GeometryJet& jet, const TwoPhaseField& u, int j, int k);

/// Symmetric gradient in flattened coordinates, D_xi(u) = (grad u + grad u^T)/2,
/// stored as a rank-2 field with index a*dim + b.
TwoPhaseField symmetric_gradient(const TwoPhaseField& u);

/// E(u,h) = D_xi(u) - (D_N u (x) g + g (x) D_N u)/2 with g = (grad' h, 0),
/// the pull-back of the physical deformation tensor.
TwoPhaseField transformed_deformation(const TwoPhaseField& u, const HeightField& h);
TwoPhaseField transformed_deformation(const TwoPhaseField& u, const GeometryJet& jet);

/// |E|^2 = sum_ij E_ij^2 for a rank-2 field.
TwoPhaseField frobenius_sq(const TwoPhaseField& tensor);
SurfaceField frobenius_sq(const SurfaceField& tensor);

struct CurvatureSplit {
  SurfaceField laplacian;     // Delta' h
  SurfaceField correction;    // the nonlinear remainder H(h)
  SurfaceField mean_curvature;  // Delta' h - H(h)
};

CurvatureSplit curvature_split(const HeightField& h);
CurvatureSplit curvature_split(const GeometryJet& jet);

struct InterfaceKinematics {
  SurfaceField normal;           // (-grad' h, 1)/sqrt(1+|grad' h|^2)
  SurfaceField normal_velocity;  // d_t h / sqrt(1+|grad' h|^2)
};

/// Graph formulas for the unit normal and normal velocity (diagnostics only).
InterfaceKinematics normal_and_velocity(const HeightField& h, const SurfaceField& dh_dt);

}  // namespace flatflow
