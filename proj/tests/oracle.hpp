/// @file oracle.hpp
/// @brief Independent reference computations shared by the unit and
/// acceptance tests: closed-form smooth fields, physical-coordinate
/// finite differences and dense double-sum quadratures.
#pragma once

#include "flatflow/geometry.hpp"
#include "flatflow/grid.hpp"
#include "flatflow/norms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using namespace flatflow;

inline StripGrid make_grid(int dim, int n_h, int n_v, double L_h = 1.0, double L_v = 1.0) {
  StripGrid g;
  g.dim = dim;
  g.n_h = n_h;
  g.n_v = n_v;
  g.L_h = L_h;
  g.L_v = L_v;
  return g;
}

inline double max_abs_diff(const TwoPhaseField& a, const TwoPhaseField& b) { return (a - b).max_abs(); }
inline double max_abs_diff(const SurfaceField& a, const SurfaceField& b) { return (a - b).max_abs(); }

inline double rel_error(const TwoPhaseField& a, const TwoPhaseField& ref) {
  const double s = ref.max_abs();
  return (a - ref).max_abs() / (s > 0.0 ? s : 1.0);
}

inline double rel_error(const SurfaceField& a, const SurfaceField& ref) {
  const double s = ref.max_abs();
  return (a - ref).max_abs() / (s > 0.0 ? s : 1.0);
}

/// One separable term (a cos + b sin)(k.x'/L_h) * (c + d sin(w x_N + phi)).
struct Term {
  int k0 = 0;
  int k1 = 0;
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0, w = 0.0, phi = 0.0;
};

/// Closed-form smooth field in physical coordinates, independent per phase
/// and component, band-limited horizontally.
class SmoothField {
 public:
  SmoothField() = default;
  SmoothField(const StripGrid& g, int ncomp, std::uint64_t seed, int kmax = 3, bool continuous = false)
      : grid_(g), ncomp_(ncomp) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int p = 0; p < 2; ++p) {
      terms_[p].resize(ncomp);
      for (int c = 0; c < ncomp; ++c)
        for (int q = 0; q < 3; ++q) {
          Term t;
          t.k0 = static_cast<int>(rng() % (kmax + 1));
          t.k1 = g.dim == 3 ? static_cast<int>(rng() % (kmax + 1)) : 0;
          t.a = uni(rng);
          t.b = uni(rng);
          t.c = uni(rng);
          t.d = uni(rng);
          t.w = (1.0 + std::abs(uni(rng))) / g.L_v;
          t.phi = 3.0 * uni(rng);
          terms_[p][c].push_back(t);
        }
    }
    if (continuous) terms_[1] = terms_[0];
  }

  int components() const { return ncomp_; }

  double value(Phase p, int comp, const Point& x) const {
    const int vert = grid_.dim - 1;
    double sum = 0.0;
    for (const Term& t : terms_[phase_index(p)][comp]) {
      double arg = t.k0 * x[0];
      if (grid_.dim == 3) arg += t.k1 * x[1];
      arg /= grid_.L_h;
      sum += (t.a * std::cos(arg) + t.b * std::sin(arg)) * (t.c + t.d * std::sin(t.w * x[vert] + t.phi));
    }
    return sum;
  }

  /// Fourth-order central difference along physical direction j.
  double fd_derivative(Phase p, int comp, Point x, int j, double delta = 1e-3) const {
    auto at = [&](double s) {
      Point y = x;
      y[j] += s;
      return value(p, comp, y);
    };
    return (-at(2 * delta) + 8.0 * at(delta) - 8.0 * at(-delta) + at(-2 * delta)) / (12.0 * delta);
  }

  /// Fourth-order central second difference (mixed: nested first differences).
  double fd_second(Phase p, int comp, Point x, int j, int k, double delta = 1e-3) const {
    if (j == k) {
      auto at = [&](double s) {
        Point y = x;
        y[j] += s;
        return value(p, comp, y);
      };
      return (-at(2 * delta) + 16.0 * at(delta) - 30.0 * at(0.0) + 16.0 * at(-delta) - at(-2 * delta)) /
             (12.0 * delta * delta);
    }
    auto dk = [&](double s) {
      Point y = x;
      y[j] += s;
      return fd_derivative(p, comp, y, k, delta);
    };
    return (-dk(2 * delta) + 8.0 * dk(delta) - 8.0 * dk(-delta) + dk(-2 * delta)) / (12.0 * delta);
  }

 private:
  StripGrid grid_;
  int ncomp_ = 0;
  std::array<std::vector<std::vector<Term>>, 2> terms_;
};

/// Applies fn(p, comp, physical point) at every pulled-back node xi -> (xi', xi_N + h).
inline TwoPhaseField sample_pulled_back(const StripGrid& g, const SurfaceField& h, int ncomp,
                                        const std::function<double(Phase, int, const Point&)>& fn) {
  TwoPhaseField out(g, ncomp);
  const int vert = g.dim - 1;
  for (Phase p : kPhases)
    for (int i = 0; i < g.n_v; ++i)
      for (int col = 0; col < g.columns(); ++col) {
        Point x{};
        for (int d = 0; d < vert; ++d) x[d] = g.column_coord(col, d);
        x[vert] = g.xi(p, i) + h(0, col);
        for (int c = 0; c < ncomp; ++c) out(p, c, i, col) = fn(p, c, x);
      }
  return out;
}

inline TwoPhaseField pulled_back(const SmoothField& v, const StripGrid& g, const SurfaceField& h) {
  return sample_pulled_back(g, h, v.components(), [&](Phase p, int c, const Point& x) { return v.value(p, c, x); });
}

/// Divergence-free 2D velocity from the stream function
/// amp sin(k x/L_h) (1 - (x_N/ell)^2)^3, cut off for |x_N| >= ell, pulled back.
inline TwoPhaseField stream_velocity(const StripGrid& g, const SurfaceField& h, double amp, int k, double ell) {
  return sample_pulled_back(g, h, 2, [&](Phase, int c, const Point& x) {
    const double s = x[1] / ell;
    if (std::abs(s) >= 1.0) return 0.0;
    const double b = 1.0 - s * s;
    const double arg = k * x[0] / g.L_h;
    if (c == 0) return amp * std::sin(arg) * 3.0 * b * b * (-2.0 * s / ell);
    return -amp * (k / g.L_h) * std::cos(arg) * b * b * b;
  });
}

/// Random band-limited height with modes 1..kmax scaled to max |h| = amplitude.
inline SurfaceField random_height(const StripGrid& g, std::uint64_t seed, double amplitude, int kmax = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  SurfaceField h(g, 1);
  for (int q = 0; q < kmax; ++q) {
    const int k0 = 1 + q;
    const int k1 = g.dim == 3 ? static_cast<int>(rng() % (kmax + 1)) : 0;
    const double a = uni(rng), b = uni(rng);
    for (int col = 0; col < g.columns(); ++col) {
      double arg = k0 * g.column_coord(col, 0);
      if (g.dim == 3) arg += k1 * g.column_coord(col, 1);
      arg /= g.L_h;
      h(0, col) += a * std::cos(arg) + b * std::sin(arg);
    }
  }
  h *= amplitude / h.max_abs();
  return h;
}

/// Torus field from a closed form f(x', comp).
inline SurfaceField sample_surface(const StripGrid& g, int ncomp, const std::function<double(const Point&, int)>& fn) {
  SurfaceField out(g, ncomp);
  for (int col = 0; col < g.columns(); ++col) {
    Point x{};
    for (int d = 0; d < g.dim - 1; ++d) x[d] = g.column_coord(col, d);
    for (int c = 0; c < ncomp; ++c) out(c, col) = fn(x, c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dense double-sum quadratures: every ordered pair, plain std::pow kernels.
// ---------------------------------------------------------------------------

inline double torus_distance(const StripGrid& g, int a, int b) {
  double d2 = 0.0;
  for (int dir = 0; dir < g.dim - 1; ++dir) {
    int o = std::abs(g.column_index(a, dir) - g.column_index(b, dir));
    o = std::min(o, g.n_h - o);
    d2 += (o * g.dx()) * (o * g.dx());
  }
  return std::sqrt(d2);
}

inline double dense_time_seminorm(const SurfaceSeries& cells, double dt, double s, double p) {
  if (cells.size() < 2) return 0.0;
  const StripGrid& g = cells[0].grid();
  const double w = std::pow(g.dx(), g.dim - 1);
  double sum = 0.0;
  for (std::size_t a = 0; a < cells.size(); ++a)
    for (std::size_t b = 0; b < cells.size(); ++b) {
      if (a == b) continue;
      const double kernel = std::pow(std::abs(double(a) - double(b)) * dt, 1.0 + s * p);
      for (std::size_t i = 0; i < cells[a].data().size(); ++i)
        sum += std::pow(std::abs(cells[a].data()[i] - cells[b].data()[i]), p) / kernel * w * dt * dt;
    }
  return std::pow(sum, 1.0 / p);
}

inline double dense_space_seminorm(const SurfaceSeries& cells, double dt, double s, double p) {
  if (cells.empty()) return 0.0;
  const StripGrid& g = cells[0].grid();
  const int m = g.dim - 1;
  const double w = std::pow(g.dx(), m);
  double sum = 0.0;
  for (const auto& f : cells)
    for (int a = 0; a < g.columns(); ++a)
      for (int b = 0; b < g.columns(); ++b) {
        if (a == b) continue;
        const double kernel = std::pow(torus_distance(g, a, b), m + s * p);
        for (int c = 0; c < f.components(); ++c)
          sum += std::pow(std::abs(f(c, a) - f(c, b)), p) / kernel * w * w * dt;
      }
  return std::pow(sum, 1.0 / p);
}

inline double dense_bulk_seminorm(const TwoPhaseField& f, double s, double p) {
  const StripGrid& g = f.grid();
  const double w = std::pow(g.dx(), g.dim - 1) * g.dz();
  double sum = 0.0;
  for (Phase ph : kPhases)
    for (int ia = 0; ia < g.n_v; ++ia)
      for (int ca = 0; ca < g.columns(); ++ca)
        for (int ib = 0; ib < g.n_v; ++ib)
          for (int cb = 0; cb < g.columns(); ++cb) {
            if (ia == ib && ca == cb) continue;
            const double dh = torus_distance(g, ca, cb);
            const double dv = (ia - ib) * g.dz();
            const double kernel = std::pow(std::sqrt(dh * dh + dv * dv), g.dim + s * p);
            for (int c = 0; c < f.components(); ++c)
              sum += std::pow(std::abs(f(ph, c, ia, ca) - f(ph, c, ib, cb)), p) / kernel * w * w;
          }
  return std::pow(sum, 1.0 / p);
}

inline double rel_diff(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

}  // namespace oracle
