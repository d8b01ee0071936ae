#include "flatflow/grid.hpp"

#include "flatflow/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>

namespace flatflow {

// ---------------------------------------------------------------------------
// StripGrid / TimeGrid
// ---------------------------------------------------------------------------

void StripGrid::validate() const {
  std::vector<std::string> errors;
  if (dim != 2 && dim != 3) errors.push_back("grid.dim must be 2 or 3");
  if (n_h < 8 || n_h % 2 != 0) errors.push_back("grid.n_h must be even and >= 8");
  if (n_v < 8) errors.push_back("grid.n_v must be >= 8");
  if (!(L_h > 0.0) || !std::isfinite(L_h)) errors.push_back("grid.L_h must be positive");
  if (!(L_v > 0.0) || !std::isfinite(L_v)) errors.push_back("grid.L_v must be positive");
  if (!errors.empty()) throw ConfigError(std::move(errors));
}

double StripGrid::period() const { return 2.0 * std::numbers::pi * L_h; }

double StripGrid::dx() const { return period() / n_h; }

int StripGrid::column_index(int col, int dir) const {
  if (dim == 2) return col;
  return dir == 0 ? col / n_h : col % n_h;
}

int StripGrid::column_from_indices(int i0, int i1) const {
  i0 = ((i0 % n_h) + n_h) % n_h;
  if (dim == 2) return i0;
  i1 = ((i1 % n_h) + n_h) % n_h;
  return i0 * n_h + i1;
}

double StripGrid::column_coord(int col, int dir) const { return column_index(col, dir) * dx(); }

double StripGrid::xi(Phase p, int i) const {
  return p == Phase::lower ? -L_v + i * dz() : i * dz();
}

int StripGrid::mode_index(int m, int dir) const {
  const int half = n_h / 2;
  if (dim == 2) return m == half ? -half : m;
  const int last = half + 1;
  if (dir == 0) {
    const int ix = m / last;
    return ix < half ? ix : ix - n_h;
  }
  const int iy = m % last;
  return iy == half ? -half : iy;
}

double StripGrid::wavenumber_sq(int m) const {
  double s = 0.0;
  for (int d = 0; d < horizontal_dims(); ++d) {
    const double k = wavenumber(m, d);
    s += k * k;
  }
  return s;
}

bool StripGrid::is_nyquist(int m) const {
  for (int d = 0; d < horizontal_dims(); ++d)
    if (mode_index(m, d) == -n_h / 2) return true;
  return false;
}

double StripGrid::hermitian_weight(int m) const {
  const int half = n_h / 2;
  const int iy = dim == 2 ? m : m % (half + 1);
  return (iy == 0 || iy == half) ? 1.0 : 2.0;
}

void TimeGrid::validate() const {
  std::vector<std::string> errors;
  if (!(a > 0.0) || !std::isfinite(a)) errors.push_back("time.a must be positive");
  if (n_t < 1) errors.push_back("time.n_t must be >= 1");
  if (!errors.empty()) throw ConfigError(std::move(errors));
}

// ---------------------------------------------------------------------------
// SurfaceField
// ---------------------------------------------------------------------------

SurfaceField::SurfaceField(const StripGrid& g, int ncomp)
    : grid_(g), ncomp_(ncomp), data_(static_cast<std::size_t>(ncomp) * g.columns(), 0.0) {}

SurfaceField SurfaceField::extract(int c) const {
  SurfaceField out(grid_, 1);
  std::ranges::copy(component(c), out.data_.begin());
  return out;
}

void SurfaceField::assign(int c, const SurfaceField& s) {
  std::ranges::copy(s.component(0), component(c).begin());
}

double SurfaceField::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

SurfaceField& SurfaceField::operator+=(const SurfaceField& o) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

SurfaceField& SurfaceField::operator-=(const SurfaceField& o) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

SurfaceField& SurfaceField::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

SurfaceField& SurfaceField::axpy(double s, const SurfaceField& o) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * o.data_[i];
  return *this;
}

SurfaceField operator+(SurfaceField a, const SurfaceField& b) { return a += b; }
SurfaceField operator-(SurfaceField a, const SurfaceField& b) { return a -= b; }
SurfaceField operator*(double s, SurfaceField a) { return a *= s; }

SurfaceField hadamard(const SurfaceField& a, const SurfaceField& b) {
  SurfaceField out(a.grid(), 1);
  for (int col = 0; col < a.columns(); ++col) out(0, col) = a(0, col) * b(0, col);
  return out;
}

// ---------------------------------------------------------------------------
// TwoPhaseField
// ---------------------------------------------------------------------------

TwoPhaseField::TwoPhaseField(const StripGrid& g, int ncomp) : grid_(g), ncomp_(ncomp) {
  for (auto& b : blocks_) b.assign(static_cast<std::size_t>(ncomp) * g.n_v * g.columns(), 0.0);
}

TwoPhaseField TwoPhaseField::make(const StripGrid& g, Rank r) {
  switch (r) {
    case Rank::scalar: return {g, 1};
    case Rank::vector: return {g, g.dim};
    case Rank::tensor: return {g, g.dim * g.dim};
  }
  return {g, 1};
}

Rank TwoPhaseField::rank() const {
  if (ncomp_ == 1) return Rank::scalar;
  if (ncomp_ == grid_.dim) return Rank::vector;
  return Rank::tensor;
}

TwoPhaseField TwoPhaseField::extract(int c) const {
  TwoPhaseField out(grid_, 1);
  for (Phase p : kPhases) {
    auto src = blocks_[phase_index(p)].begin() + c * component_size();
    std::copy(src, src + component_size(), out.block(p).begin());
  }
  return out;
}

void TwoPhaseField::assign(int c, const TwoPhaseField& s) {
  for (Phase p : kPhases)
    std::ranges::copy(s.block(p), blocks_[phase_index(p)].begin() + c * component_size());
}

SurfaceField TwoPhaseField::trace(Phase p) const {
  SurfaceField out(grid_, ncomp_);
  const int i = grid_.interface_node(p);
  for (int c = 0; c < ncomp_; ++c) std::ranges::copy(level(p, c, i), out.component(c).begin());
  return out;
}

SurfaceField TwoPhaseField::jump() const { return trace(Phase::upper) - trace(Phase::lower); }

SurfaceField TwoPhaseField::trace_mean() const {
  return 0.5 * (trace(Phase::upper) + trace(Phase::lower));
}

double TwoPhaseField::max_abs() const {
  double m = 0.0;
  for (const auto& b : blocks_)
    for (double v : b) m = std::max(m, std::abs(v));
  return m;
}

TwoPhaseField& TwoPhaseField::operator+=(const TwoPhaseField& o) {
  for (int p = 0; p < 2; ++p)
    for (std::size_t i = 0; i < blocks_[p].size(); ++i) blocks_[p][i] += o.blocks_[p][i];
  return *this;
}

TwoPhaseField& TwoPhaseField::operator-=(const TwoPhaseField& o) {
  for (int p = 0; p < 2; ++p)
    for (std::size_t i = 0; i < blocks_[p].size(); ++i) blocks_[p][i] -= o.blocks_[p][i];
  return *this;
}

TwoPhaseField& TwoPhaseField::operator*=(double s) {
  for (auto& b : blocks_)
    for (double& v : b) v *= s;
  return *this;
}

TwoPhaseField& TwoPhaseField::axpy(double s, const TwoPhaseField& o) {
  for (int p = 0; p < 2; ++p)
    for (std::size_t i = 0; i < blocks_[p].size(); ++i) blocks_[p][i] += s * o.blocks_[p][i];
  return *this;
}

TwoPhaseField operator+(TwoPhaseField a, const TwoPhaseField& b) { return a += b; }
TwoPhaseField operator-(TwoPhaseField a, const TwoPhaseField& b) { return a -= b; }
TwoPhaseField operator*(double s, TwoPhaseField a) { return a *= s; }

TwoPhaseField hadamard(const TwoPhaseField& a, const TwoPhaseField& b) {
  TwoPhaseField out(a.grid(), 1);
  for (Phase p : kPhases) {
    const auto& x = a.block(p);
    const auto& y = b.block(p);
    auto& o = out.block(p);
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] * y[i];
  }
  return out;
}

TwoPhaseField scale_by(const TwoPhaseField& f, const TwoPhaseField& s) {
  TwoPhaseField out = f;
  const std::size_t n = f.component_size();
  for (Phase p : kPhases) {
    auto& o = out.block(p);
    const auto& w = s.block(p);
    for (int c = 0; c < f.components(); ++c)
      for (std::size_t i = 0; i < n; ++i) o[c * n + i] *= w[i];
  }
  return out;
}

TwoPhaseField extend_vertically(const SurfaceField& s, int c) {
  const StripGrid& g = s.grid();
  TwoPhaseField out(g, 1);
  for (Phase p : kPhases)
    for (int i = 0; i < g.n_v; ++i) std::ranges::copy(s.component(c), out.level(p, 0, i).begin());
  return out;
}

// ---------------------------------------------------------------------------
// FFT plumbing
// ---------------------------------------------------------------------------

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftWorkspace {
  int n_real = 0;
  int n_modes = 0;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;

  FftWorkspace(int dim, int n_h) {
    n_real = dim == 2 ? n_h : n_h * n_h;
    n_modes = dim == 2 ? n_h / 2 + 1 : n_h * (n_h / 2 + 1);
    real = fftw_alloc_real(n_real);
    spec = fftw_alloc_complex(n_modes);
    std::lock_guard lock(planner_mutex());
    if (dim == 2) {
      fwd = fftw_plan_dft_r2c_1d(n_h, real, spec, FFTW_ESTIMATE);
      bwd = fftw_plan_dft_c2r_1d(n_h, spec, real, FFTW_ESTIMATE);
    } else {
      fwd = fftw_plan_dft_r2c_2d(n_h, n_h, real, spec, FFTW_ESTIMATE);
      bwd = fftw_plan_dft_c2r_2d(n_h, n_h, spec, real, FFTW_ESTIMATE);
    }
  }
  ~FftWorkspace() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(real);
    fftw_free(spec);
  }
  FftWorkspace(const FftWorkspace&) = delete;
  FftWorkspace& operator=(const FftWorkspace&) = delete;
};

FftWorkspace& workspace(const StripGrid& g) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<FftWorkspace>> cache;
  auto& slot = cache[{g.dim, g.n_h}];
  if (!slot) slot = std::make_unique<FftWorkspace>(g.dim, g.n_h);
  return *slot;
}

}  // namespace

void forward_columns(const StripGrid& g, std::span<const double> in, std::span<cplx> out) {
  FftWorkspace& w = workspace(g);
  std::copy(in.begin(), in.end(), w.real);
  fftw_execute(w.fwd);
  const double scale = 1.0 / w.n_real;
  for (int m = 0; m < w.n_modes; ++m) out[m] = cplx(w.spec[m][0], w.spec[m][1]) * scale;
}

void inverse_columns(const StripGrid& g, std::span<const cplx> in, std::span<double> out) {
  FftWorkspace& w = workspace(g);
  for (int m = 0; m < w.n_modes; ++m) {
    w.spec[m][0] = in[m].real();
    w.spec[m][1] = in[m].imag();
  }
  fftw_execute(w.bwd);
  std::copy(w.real, w.real + w.n_real, out.begin());
}

SpectralField::SpectralField(const StripGrid& g, int ncomp) : grid_(g), ncomp_(ncomp) {
  for (auto& b : blocks_) b.assign(static_cast<std::size_t>(ncomp) * g.n_v * g.modes(), cplx{});
}

double SpectralField::energy() const {
  double e = 0.0;
  for (Phase p : kPhases)
    for (int c = 0; c < ncomp_; ++c)
      for (int i = 0; i < grid_.n_v; ++i)
        for (int m = 0; m < grid_.modes(); ++m) e += grid_.hermitian_weight(m) * std::norm((*this)(p, c, i, m));
  return e;
}

SpectralField horizontal_spectrum(const TwoPhaseField& f) {
  const StripGrid& g = f.grid();
  SpectralField out(g, f.components());
  std::vector<cplx> buf(g.modes());
  for (Phase p : kPhases)
    for (int c = 0; c < f.components(); ++c)
      for (int i = 0; i < g.n_v; ++i) {
        forward_columns(g, f.level(p, c, i), buf);
        for (int m = 0; m < g.modes(); ++m) out(p, c, i, m) = buf[m];
      }
  return out;
}

TwoPhaseField horizontal_inverse(const SpectralField& f) {
  const StripGrid& g = f.grid();
  TwoPhaseField out(g, f.components());
  std::vector<cplx> buf(g.modes());
  for (Phase p : kPhases)
    for (int c = 0; c < f.components(); ++c)
      for (int i = 0; i < g.n_v; ++i) {
        for (int m = 0; m < g.modes(); ++m) buf[m] = f(p, c, i, m);
        inverse_columns(g, buf, out.level(p, c, i));
      }
  return out;
}

SurfaceSpectrum surface_spectrum(const SurfaceField& f) {
  const StripGrid& g = f.grid();
  SurfaceSpectrum out(f.components(), std::vector<cplx>(g.modes()));
  for (int c = 0; c < f.components(); ++c) forward_columns(g, f.component(c), out[c]);
  return out;
}

SurfaceField surface_inverse(const StripGrid& g, const SurfaceSpectrum& s) {
  SurfaceField out(g, static_cast<int>(s.size()));
  for (int c = 0; c < out.components(); ++c) inverse_columns(g, s[c], out.component(c));
  return out;
}

double mean_square(const TwoPhaseField& f) {
  double s = 0.0;
  for (Phase p : kPhases)
    for (double v : f.block(p)) s += v * v;
  return s / f.grid().columns();
}

// ---------------------------------------------------------------------------
// Spectral operators
// ---------------------------------------------------------------------------

namespace {

template <typename Multiplier>
void apply_multiplier(const StripGrid& g, std::span<double> level, std::vector<cplx>& buf, Multiplier&& mult) {
  forward_columns(g, level, buf);
  for (int m = 0; m < g.modes(); ++m) buf[m] *= mult(m);
  inverse_columns(g, buf, level);
}

cplx derivative_symbol(const StripGrid& g, int m, int dir) {
  if (g.mode_index(m, dir) == -g.n_h / 2) return {};
  return {0.0, g.wavenumber(m, dir)};
}

double dealias_mask(const StripGrid& g, int m) {
  const int cutoff = g.n_h / 3;
  for (int d = 0; d < g.horizontal_dims(); ++d)
    if (std::abs(g.mode_index(m, d)) > cutoff) return 0.0;
  return 1.0;
}

}  // namespace

TwoPhaseField d_horizontal(const TwoPhaseField& f, int dir) {
  const StripGrid& g = f.grid();
  TwoPhaseField out = f;
  std::vector<cplx> buf(g.modes());
  for (Phase p : kPhases)
    for (int c = 0; c < f.components(); ++c)
      for (int i = 0; i < g.n_v; ++i)
        apply_multiplier(g, out.level(p, c, i), buf, [&](int m) { return derivative_symbol(g, m, dir); });
  return out;
}

SurfaceField d_horizontal(const SurfaceField& f, int dir) {
  const StripGrid& g = f.grid();
  SurfaceField out = f;
  std::vector<cplx> buf(g.modes());
  for (int c = 0; c < f.components(); ++c)
    apply_multiplier(g, out.component(c), buf, [&](int m) { return derivative_symbol(g, m, dir); });
  return out;
}

void dealias(TwoPhaseField& f) {
  const StripGrid& g = f.grid();
  std::vector<cplx> buf(g.modes());
  for (Phase p : kPhases)
    for (int c = 0; c < f.components(); ++c)
      for (int i = 0; i < g.n_v; ++i)
        apply_multiplier(g, f.level(p, c, i), buf, [&](int m) { return cplx(dealias_mask(g, m)); });
}

void dealias(SurfaceField& f) {
  const StripGrid& g = f.grid();
  std::vector<cplx> buf(g.modes());
  for (int c = 0; c < f.components(); ++c)
    apply_multiplier(g, f.component(c), buf, [&](int m) { return cplx(dealias_mask(g, m)); });
}

TwoPhaseField d_vertical(const TwoPhaseField& f) {
  const StripGrid& g = f.grid();
  TwoPhaseField out(g, f.components());
  const int n = g.n_v;
  const double inv2h = 1.0 / (2.0 * g.dz());
  const int cols = g.columns();
  for (Phase p : kPhases)
    for (int c = 0; c < f.components(); ++c)
      for (int col = 0; col < cols; ++col) {
        auto v = [&](int i) { return f(p, c, i, col); };
        out(p, c, 0, col) = (-3.0 * v(0) + 4.0 * v(1) - v(2)) * inv2h;
        for (int i = 1; i < n - 1; ++i) out(p, c, i, col) = (v(i + 1) - v(i - 1)) * inv2h;
        out(p, c, n - 1, col) = (3.0 * v(n - 1) - 4.0 * v(n - 2) + v(n - 3)) * inv2h;
      }
  return out;
}

TwoPhaseField d_vertical2(const TwoPhaseField& f) {
  const StripGrid& g = f.grid();
  TwoPhaseField out(g, f.components());
  const int n = g.n_v;
  const double inv_h2 = 1.0 / (g.dz() * g.dz());
  const int cols = g.columns();
  for (Phase p : kPhases)
    for (int c = 0; c < f.components(); ++c)
      for (int col = 0; col < cols; ++col) {
        auto v = [&](int i) { return f(p, c, i, col); };
        out(p, c, 0, col) = (2.0 * v(0) - 5.0 * v(1) + 4.0 * v(2) - v(3)) * inv_h2;
        for (int i = 1; i < n - 1; ++i) out(p, c, i, col) = (v(i + 1) - 2.0 * v(i) + v(i - 1)) * inv_h2;
        out(p, c, n - 1, col) = (2.0 * v(n - 1) - 5.0 * v(n - 2) + 4.0 * v(n - 3) - v(n - 4)) * inv_h2;
      }
  return out;
}

TwoPhaseField derivative(const TwoPhaseField& f, int j) {
  return j == f.grid().dim - 1 ? d_vertical(f) : d_horizontal(f, j);
}

TwoPhaseField second_derivative(const TwoPhaseField& f, int j, int k) {
  const int vert = f.grid().dim - 1;
  if (j == vert && k == vert) return d_vertical2(f);
  return derivative(derivative(f, k), j);
}

TwoPhaseField shift_columns(const TwoPhaseField& f, int dir, int shift) {
  const StripGrid& g = f.grid();
  TwoPhaseField out(g, f.components());
  for (Phase p : kPhases)
    for (int c = 0; c < f.components(); ++c)
      for (int i = 0; i < g.n_v; ++i)
        for (int col = 0; col < g.columns(); ++col) {
          int i0 = g.column_index(col, 0);
          int i1 = g.dim == 3 ? g.column_index(col, 1) : 0;
          if (dir == 0) i0 += shift; else i1 += shift;
          out(p, c, i, g.column_from_indices(i0, i1)) = f(p, c, i, col);
        }
  return out;
}

}  // namespace flatflow
