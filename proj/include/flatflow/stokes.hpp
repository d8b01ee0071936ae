/// @file stokes.hpp
/// @brief Linear two-phase Stokes evolution with a flat interface, solved by
/// backward Euler and one banded system per horizontal wavenumber.
///
/// Vertical layout: velocity lives on the nodes of each phase block, the
/// pressure on the n_v - 1 cell midpoints of each block. Interface traces of
/// the pressure are linear extrapolations from the two nearest cells.
#pragma once

#include "flatflow/constitutive.hpp"
#include "flatflow/grid.hpp"
#include "flatflow/nonlinear.hpp"

#include <array>
#include <vector>

namespace flatflow {

struct LinearParams {
  double nu1 = 1.0;
  double nu2 = 1.0;
  double rho1 = 1.0;
  double rho2 = 1.0;
  double sigma = 1.0;
  double gamma_a = 0.0;

  /// Viscosities frozen at mu_i(0).
  static LinearParams from(const PhasePair& phases);
  /// Throws ConfigError listing every violated rule.
  void validate() const;

  double nu(Phase p) const { return p == Phase::lower ? nu1 : nu2; }
  double rho(Phase p) const { return p == Phase::lower ? rho1 : rho2; }
};

/// Data of one implicit step restricted to one mode.
struct ModeData {
  std::array<std::vector<cplx>, 2> F;    // [phase][c * n_v + i]
  std::array<std::vector<cplx>, 2> f_d;  // [phase][i]
  std::vector<cplx> G;                   // dim components
  cplx g_h{};
};

/// Unknowns of one mode at one time level.
struct ModeState {
  std::array<std::vector<cplx>, 2> u;      // [phase][c * n_v + i]
  std::array<std::vector<cplx>, 2> theta;  // [phase][cell]
  cplx h{};
};

/// Backward-Euler operator of one horizontal mode, factorized once.
class WavenumberBlock {
 public:
  /// Throws ParameterError if the factorization is singular.
  WavenumberBlock(const StripGrid& g, int mode, double dt, const LinearParams& params);

  int size() const { return size_; }
  int mode() const { return mode_; }
  int lower_bandwidth() const { return kl_; }
  int upper_bandwidth() const { return ku_; }

  int velocity_index(Phase p, int node, int comp) const;
  int cell_index(Phase p, int cell) const;
  int height_index() const { return h_index_; }

  /// Matrix-vector product with the assembled operator.
  std::vector<cplx> apply(std::span<const cplx> x) const;
  std::vector<cplx> solve(std::vector<cplx> rhs) const;

  std::vector<cplx> rhs(const ModeData& data_next, const ModeState& prev) const;
  std::vector<cplx> pack(const ModeState& s) const;
  ModeState unpack(std::span<const cplx> x) const;
  ModeState zero_state() const;

 private:
  struct Entry {
    int row;
    int col;
    cplx value;
  };
  void add(int row, int col, cplx v) { entries_.push_back({row, col, v}); }
  void assemble();
  void factorize();

  StripGrid grid_;
  int mode_ = 0;
  double dt_ = 0.0;
  LinearParams params_;
  int size_ = 0;
  int h_index_ = 0;
  int upper_base_ = 0;
  int kl_ = 0;
  int ku_ = 0;
  std::vector<Entry> entries_;
  std::vector<cplx> band_;
  std::vector<int> pivots_;
};

/// One backward-Euler step of one mode.
ModeState step(const WavenumberBlock& block, const ModeState& prev, const ModeData& data_next);

/// Cell pressures to node values (interior averages, linear end extrapolation).
std::vector<cplx> cells_to_nodes(std::span<const cplx> cells);

struct LinearSolveOptions {
  /// Reject u0 unless div u0 = f_d(0) holds to this relative tolerance.
  bool check_compatibility = true;
  double compat_tol = 1e-2;
};

/// Discrete solution operator: full trajectory for data (F, f_d, G, g_h) and
/// initial values (u0, h0). Throws IncompatibleData when the divergence or
/// velocity-jump compatibility fails.
StateZ solve_linear_evolution(const LinearParams& params, const DataF& data, const TwoPhaseField& u0,
                              const SurfaceField& h0, const LinearSolveOptions& options = {});

/// max|div u0 - f_d0| relative to max|grad u0| (0 when both vanish).
double divergence_compatibility(const TwoPhaseField& u0, const TwoPhaseField& f_d0);

}  // namespace flatflow
