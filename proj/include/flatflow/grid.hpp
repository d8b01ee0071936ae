/// @file grid.hpp
/// @brief Horizontally periodic, vertically truncated strip split at xi_N = 0.
///
/// Layout conventions used throughout the library:
///   - Directions are 0-based: 0 .. dim-2 horizontal, dim-1 vertical.
///   - A horizontal "column" index runs over the n_h^(dim-1) torus points,
///     row-major with the last horizontal direction fastest.
///   - Each phase block holds n_v vertical nodes. The lower block spans
///     [-L_v, 0] (node n_v-1 is the interface), the upper block [0, L_v]
///     (node 0 is the interface). The interface node is stored twice so
///     one-sided traces are independent.
///   - Spectral coefficients use the real-to-complex half spectrum along
///     the last horizontal direction and are normalized so mode 0 is the
///     column mean.
#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace flatflow {

using cplx = std::complex<double>;

enum class Phase : int { lower = 0, upper = 1 };

inline constexpr std::array<Phase, 2> kPhases{Phase::lower, Phase::upper};

inline int phase_index(Phase p) { return static_cast<int>(p); }

enum class Rank { scalar, vector, tensor };

struct StripGrid {
  int dim = 2;
  int n_h = 64;
  double L_h = 1.0;
  int n_v = 32;
  double L_v = 3.0;

  /// Throws ConfigError listing every violated rule.
  void validate() const;

  int horizontal_dims() const { return dim - 1; }
  int columns() const { return dim == 2 ? n_h : n_h * n_h; }
  double dx() const;
  double dz() const { return L_v / (n_v - 1); }
  double period() const;

  /// Horizontal coordinate of column `col` along direction `dir`.
  double column_coord(int col, int dir) const;
  /// Grid index of column `col` along direction `dir`.
  int column_index(int col, int dir) const;
  int column_from_indices(int i0, int i1 = 0) const;

  double xi(Phase p, int i) const;
  int interface_node(Phase p) const { return p == Phase::lower ? n_v - 1 : 0; }

  /// Number of half-spectrum modes per vertical level.
  int modes() const { return dim == 2 ? n_h / 2 + 1 : n_h * (n_h / 2 + 1); }
  /// Signed integer index j of mode `m` along horizontal direction `dir`.
  int mode_index(int m, int dir) const;
  /// Wavenumber k_j = j / L_h along `dir`.
  double wavenumber(int m, int dir) const { return mode_index(m, dir) / L_h; }
  double wavenumber_sq(int m) const;
  /// True if the mode sits on the Nyquist index in any direction.
  bool is_nyquist(int m) const;
  /// Weight of the mode in Parseval sums (2 for modes standing in for their
  /// Hermitian partner, 1 otherwise).
  double hermitian_weight(int m) const;

  bool operator==(const StripGrid&) const = default;
};

struct TimeGrid {
  double a = 1.0;
  int n_t = 20;

  void validate() const;
  double dt() const { return a / n_t; }
  double t(int n) const { return a * n / n_t; }
  int nodes() const { return n_t + 1; }

  bool operator==(const TimeGrid&) const = default;
};

/// Field on the torus x' (interface quantities, heights, traces).
class SurfaceField {
 public:
  SurfaceField() = default;
  SurfaceField(const StripGrid& g, int ncomp);

  const StripGrid& grid() const { return grid_; }
  int components() const { return ncomp_; }
  int columns() const { return grid_.columns(); }

  double& operator()(int c, int col) { return data_[static_cast<std::size_t>(c) * columns() + col]; }
  double operator()(int c, int col) const { return data_[static_cast<std::size_t>(c) * columns() + col]; }

  std::span<double> component(int c) { return {data_.data() + static_cast<std::size_t>(c) * columns(), static_cast<std::size_t>(columns())}; }
  std::span<const double> component(int c) const { return {data_.data() + static_cast<std::size_t>(c) * columns(), static_cast<std::size_t>(columns())}; }
  SurfaceField extract(int c) const;
  void assign(int c, const SurfaceField& s);

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  double max_abs() const;

  SurfaceField& operator+=(const SurfaceField& o);
  SurfaceField& operator-=(const SurfaceField& o);
  SurfaceField& operator*=(double s);
  /// this += s * o
  SurfaceField& axpy(double s, const SurfaceField& o);

 private:
  StripGrid grid_{};
  int ncomp_ = 0;
  std::vector<double> data_;
};

SurfaceField operator+(SurfaceField a, const SurfaceField& b);
SurfaceField operator-(SurfaceField a, const SurfaceField& b);
SurfaceField operator*(double s, SurfaceField a);
/// Pointwise product of scalar fields (component 0 of each).
SurfaceField hadamard(const SurfaceField& a, const SurfaceField& b);

/// Scalar, vector or tensor field on both phase blocks of the strip.
class TwoPhaseField {
 public:
  TwoPhaseField() = default;
  TwoPhaseField(const StripGrid& g, int ncomp);
  static TwoPhaseField make(const StripGrid& g, Rank r);

  const StripGrid& grid() const { return grid_; }
  int components() const { return ncomp_; }
  Rank rank() const;

  std::size_t level_size() const { return static_cast<std::size_t>(grid_.columns()); }
  std::size_t component_size() const { return level_size() * grid_.n_v; }

  double& operator()(Phase p, int c, int i, int col) {
    return blocks_[phase_index(p)][c * component_size() + i * level_size() + col];
  }
  double operator()(Phase p, int c, int i, int col) const {
    return blocks_[phase_index(p)][c * component_size() + i * level_size() + col];
  }

  std::span<double> level(Phase p, int c, int i) {
    return {blocks_[phase_index(p)].data() + c * component_size() + i * level_size(), level_size()};
  }
  std::span<const double> level(Phase p, int c, int i) const {
    return {blocks_[phase_index(p)].data() + c * component_size() + i * level_size(), level_size()};
  }

  std::vector<double>& block(Phase p) { return blocks_[phase_index(p)]; }
  const std::vector<double>& block(Phase p) const { return blocks_[phase_index(p)]; }

  TwoPhaseField extract(int c) const;
  void assign(int c, const TwoPhaseField& s);

  /// One-sided trace at xi_N = 0 from phase `p`.
  SurfaceField trace(Phase p) const;
  /// trace(upper) - trace(lower).
  SurfaceField jump() const;
  /// Mean of the two one-sided traces.
  SurfaceField trace_mean() const;

  double max_abs() const;

  TwoPhaseField& operator+=(const TwoPhaseField& o);
  TwoPhaseField& operator-=(const TwoPhaseField& o);
  TwoPhaseField& operator*=(double s);
  TwoPhaseField& axpy(double s, const TwoPhaseField& o);

 private:
  StripGrid grid_{};
  int ncomp_ = 0;
  std::array<std::vector<double>, 2> blocks_;
};

TwoPhaseField operator+(TwoPhaseField a, const TwoPhaseField& b);
TwoPhaseField operator-(TwoPhaseField a, const TwoPhaseField& b);
TwoPhaseField operator*(double s, TwoPhaseField a);
/// Pointwise product of scalar fields.
TwoPhaseField hadamard(const TwoPhaseField& a, const TwoPhaseField& b);
/// Multiply every component of `f` by the scalar field `s` pointwise.
TwoPhaseField scale_by(const TwoPhaseField& f, const TwoPhaseField& s);
/// Broadcast a torus field (component c) to every vertical level.
TwoPhaseField extend_vertically(const SurfaceField& s, int c = 0);

/// Per-mode vertical profiles of a TwoPhaseField.
class SpectralField {
 public:
  SpectralField() = default;
  SpectralField(const StripGrid& g, int ncomp);

  const StripGrid& grid() const { return grid_; }
  int components() const { return ncomp_; }

  cplx& operator()(Phase p, int c, int i, int m) {
    return blocks_[phase_index(p)][(static_cast<std::size_t>(c) * grid_.n_v + i) * grid_.modes() + m];
  }
  cplx operator()(Phase p, int c, int i, int m) const {
    return blocks_[phase_index(p)][(static_cast<std::size_t>(c) * grid_.n_v + i) * grid_.modes() + m];
  }

  /// Sum over phases, components and levels of Hermitian-weighted |coef|^2.
  double energy() const;

 private:
  StripGrid grid_{};
  int ncomp_ = 0;
  std::array<std::vector<cplx>, 2> blocks_;
};

/// Half-spectrum coefficients of a torus field.
using SurfaceSpectrum = std::vector<std::vector<cplx>>;  // [component][mode]

// Horizontal transforms (FFTW-backed, normalized so mode 0 is the mean).
void forward_columns(const StripGrid& g, std::span<const double> in, std::span<cplx> out);
void inverse_columns(const StripGrid& g, std::span<const cplx> in, std::span<double> out);

SpectralField horizontal_spectrum(const TwoPhaseField& f);
TwoPhaseField horizontal_inverse(const SpectralField& f);
SurfaceSpectrum surface_spectrum(const SurfaceField& f);
SurfaceField surface_inverse(const StripGrid& g, const SurfaceSpectrum& s);

/// Mean of f^2 over the grid, summed over components (physical Parseval side).
double mean_square(const TwoPhaseField& f);

/// Spectral derivative along horizontal direction `dir`.
TwoPhaseField d_horizontal(const TwoPhaseField& f, int dir);
SurfaceField d_horizontal(const SurfaceField& f, int dir);

/// Second-order vertical derivative inside each block; one-sided at block
/// edges, never differencing across xi_N = 0.
TwoPhaseField d_vertical(const TwoPhaseField& f);
/// Second vertical derivative: centered inside, 4-point one-sided at edges.
TwoPhaseField d_vertical2(const TwoPhaseField& f);

/// D_j for j in [0, dim): horizontal spectral or vertical FD.
TwoPhaseField derivative(const TwoPhaseField& f, int j);
/// D_j D_k with the dedicated second-difference stencil for (N, N).
TwoPhaseField second_derivative(const TwoPhaseField& f, int j, int k);

/// Zero every mode with |index| > n_h / 3 in some direction.
void dealias(TwoPhaseField& f);
void dealias(SurfaceField& f);

/// Cyclic shift of all columns by `shift` cells along `dir`.
TwoPhaseField shift_columns(const TwoPhaseField& f, int dir, int shift);

}  // namespace flatflow
