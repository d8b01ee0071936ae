#include "flatflow/geometry.hpp"

#include "flatflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace flatflow {

namespace {

struct Stencil {
  int first = 0;
  int count = 0;
  std::array<double, 4> w{};
};

// Lagrange weights on up to four nodes surrounding x (nodes ascending).
Stencil cubic_stencil(std::span<const double> nodes, double x) {
  const int n = static_cast<int>(nodes.size());
  Stencil s;
  s.count = std::min(n, 4);
  int idx = static_cast<int>(std::upper_bound(nodes.begin(), nodes.end(), x) - nodes.begin()) - 1;
  idx = std::clamp(idx, 0, n - 1);
  s.first = std::clamp(idx - 1, 0, n - s.count);
  for (int a = 0; a < s.count; ++a) {
    double w = 1.0;
    const double xa = nodes[s.first + a];
    for (int b = 0; b < s.count; ++b) {
      if (b == a) continue;
      const double xb = nodes[s.first + b];
      w *= (x - xb) / (xa - xb);
    }
    s.w[a] = w;
  }
  return s;
}

std::array<double, 4> periodic_cubic_weights(double t) {
  return {-t * (t - 1.0) * (t - 2.0) / 6.0, (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
          -(t + 1.0) * t * (t - 2.0) / 2.0, (t + 1.0) * t * (t - 1.0) / 6.0};
}

// f * s(col) for every level and component.
TwoPhaseField times_surface(const TwoPhaseField& f, std::span<const double> s) {
  TwoPhaseField out = f;
  for (Phase p : kPhases)
    for (int c = 0; c < f.components(); ++c)
      for (int i = 0; i < f.grid().n_v; ++i) {
        auto lvl = out.level(p, c, i);
        for (std::size_t col = 0; col < lvl.size(); ++col) lvl[col] *= s[col];
      }
  return out;
}

std::vector<double> lattice_heights(double lo, double hi, double spacing) {
  std::vector<double> out{lo};
  const double eps = 1e-9 * spacing;
  for (long m = static_cast<long>(std::ceil(lo / spacing)); m * spacing < hi; ++m) {
    const double z = m * spacing;
    if (z > lo + eps && z < hi - eps) out.push_back(z);
  }
  out.push_back(hi);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// HeightField
// ---------------------------------------------------------------------------

HeightField::HeightField(SurfaceField h) : h_(std::move(h)) {
  const double L_v = h_.grid().L_v;
  for (double v : h_.data()) {
    if (!std::isfinite(v)) throw DomainError("height field: non-finite sample");
    if (std::abs(v) >= L_v) {
      std::ostringstream os;
      os << "height field: |h| = " << std::abs(v) << " reaches the strip half-height L_v = " << L_v;
      throw DomainError(os.str());
    }
  }
}

double HeightField::evaluate(std::span<const double> x_h) const {
  const StripGrid& g = grid();
  const double dx = g.dx();
  auto locate = [&](double x, int& i0, std::array<double, 4>& w) {
    const double s = x / dx;
    const double fl = std::floor(s);
    i0 = static_cast<int>(fl);
    w = periodic_cubic_weights(s - fl);
  };
  int ix = 0;
  std::array<double, 4> wx{};
  locate(x_h[0], ix, wx);
  if (g.dim == 2) {
    double v = 0.0;
    for (int a = 0; a < 4; ++a) v += wx[a] * h_(0, g.column_from_indices(ix - 1 + a));
    return v;
  }
  int iy = 0;
  std::array<double, 4> wy{};
  locate(x_h[1], iy, wy);
  double v = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) v += wx[a] * wy[b] * h_(0, g.column_from_indices(ix - 1 + a, iy - 1 + b));
  return v;
}

double GeometryJet::dh(int j, int col) const {
  if (j >= grad.components()) return 0.0;
  return grad(j, col);
}

double GeometryJet::ddh(int j, int k, int col) const {
  const int m = grad.components();
  if (j >= m || k >= m) return 0.0;
  return hessian(j * m + k, col);
}

GeometryJet geometry_jet(const HeightField& h) {
  const StripGrid& g = h.grid();
  const int m = g.horizontal_dims();
  GeometryJet jet{SurfaceField(g, m), SurfaceField(g, 1), SurfaceField(g, m * m)};
  std::vector<SurfaceField> first;
  for (int j = 0; j < m; ++j) {
    first.push_back(d_horizontal(h.field(), j));
    jet.grad.assign(j, first.back());
  }
  for (int j = 0; j < m; ++j)
    for (int k = j; k < m; ++k) {
      SurfaceField hjk = d_horizontal(first[k], j);
      jet.hessian.assign(j * m + k, hjk);
      jet.hessian.assign(k * m + j, hjk);
      if (j == k) jet.laplacian += hjk;
    }
  return jet;
}

Point flatten_map(const HeightField& h, const Point& xi) {
  const int vert = h.grid().dim - 1;
  Point x = xi;
  x[vert] = xi[vert] + h.evaluate(std::span<const double>(xi.data(), vert));
  return x;
}

Point inverse_map(const HeightField& h, const Point& x) {
  const int vert = h.grid().dim - 1;
  Point xi = x;
  xi[vert] = x[vert] - h.evaluate(std::span<const double>(x.data(), vert));
  return xi;
}

// ---------------------------------------------------------------------------
// Physical sampling, pull-back and push-forward
// ---------------------------------------------------------------------------

PhysicalField::PhysicalField(const StripGrid& g, int ncomp) : grid_(g), ncomp_(ncomp) {
  for (auto& cols : columns_) cols.resize(g.columns());
}

double PhysicalField::evaluate(Phase p, int col, double x_n, int comp) const {
  const Column& c = column(p, col);
  const double tol = 1e-12 * (1.0 + std::abs(x_n));
  if (c.height.empty() || x_n < c.height.front() - tol || x_n > c.height.back() + tol) {
    std::ostringstream os;
    os << "physical field: x_N = " << x_n << " outside sampled range of column " << col;
    throw DomainError(os.str());
  }
  const Stencil s = cubic_stencil(c.height, x_n);
  const std::size_t n = c.height.size();
  double v = 0.0;
  for (int a = 0; a < s.count; ++a) v += s.w[a] * c.values[comp * n + s.first + a];
  return v;
}

PhysicalField sample_physical(const HeightField& h, int ncomp, const PhysicalFunction& fn, double spacing) {
  const StripGrid& g = h.grid();
  if (spacing <= 0.0) spacing = g.dz();
  PhysicalField out(g, ncomp);
  const int vert = g.dim - 1;
  std::vector<double> buf(ncomp);
  for (Phase p : kPhases)
    for (int col = 0; col < g.columns(); ++col) {
      const double hc = h(col);
      auto& column = out.column(p, col);
      column.height = p == Phase::lower ? lattice_heights(hc - g.L_v, hc, spacing)
                                        : lattice_heights(hc, hc + g.L_v, spacing);
      const std::size_t n = column.height.size();
      column.values.assign(ncomp * n, 0.0);
      Point x{};
      for (int d = 0; d < vert; ++d) x[d] = g.column_coord(col, d);
      for (std::size_t i = 0; i < n; ++i) {
        x[vert] = column.height[i];
        fn(p, x, buf);
        for (int c = 0; c < ncomp; ++c) column.values[c * n + i] = buf[c];
      }
    }
  return out;
}

TwoPhaseField pullback(const PhysicalField& v, const HeightField& h) {
  const StripGrid& g = v.grid();
  TwoPhaseField out(g, v.components());
  for (Phase p : kPhases)
    for (int col = 0; col < g.columns(); ++col)
      for (int i = 0; i < g.n_v; ++i) {
        const double x_n = g.xi(p, i) + h(col);
        for (int c = 0; c < v.components(); ++c) out(p, c, i, col) = v.evaluate(p, col, x_n, c);
      }
  return out;
}

PhysicalField pushforward(const TwoPhaseField& u, const HeightField& h, double spacing) {
  const StripGrid& g = u.grid();
  if (spacing <= 0.0) spacing = g.dz();
  PhysicalField out(g, u.components());
  std::array<std::vector<double>, 2> nodes;
  for (Phase p : kPhases) {
    nodes[phase_index(p)].resize(g.n_v);
    for (int i = 0; i < g.n_v; ++i) nodes[phase_index(p)][i] = g.xi(p, i);
  }
  for (Phase p : kPhases)
    for (int col = 0; col < g.columns(); ++col) {
      const double hc = h(col);
      auto& column = out.column(p, col);
      column.height = p == Phase::lower ? lattice_heights(hc - g.L_v, hc, spacing)
                                        : lattice_heights(hc, hc + g.L_v, spacing);
      const std::size_t n = column.height.size();
      column.values.assign(u.components() * n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const Stencil s = cubic_stencil(nodes[phase_index(p)], column.height[i] - hc);
        for (int c = 0; c < u.components(); ++c) {
          double v = 0.0;
          for (int a = 0; a < s.count; ++a) v += s.w[a] * u(p, c, s.first + a, col);
          column.values[c * n + i] = v;
        }
      }
    }
  return out;
}

// ---------------------------------------------------------------------------
// Transformed differential operators
// ---------------------------------------------------------------------------

TwoPhaseField chain_rule_derivative(const TwoPhaseField& u, const HeightField& h, int j) {
  const int vert = u.grid().dim - 1;
  if (j == vert) return d_vertical(u);
  const SurfaceField dh = d_horizontal(h.field(), j);
  return d_horizontal(u, j) - times_surface(d_vertical(u), dh.component(0));
}

TwoPhaseField time_chain_rule(const TwoPhaseField& du_dtau, const SurfaceField& dh_dtau, const TwoPhaseField& u) {
  return du_dtau - times_surface(d_vertical(u), dh_dtau.component(0));
}

TwoPhaseField f_correction(const HeightField& h, const TwoPhaseField& u, int j, int k) {
  return f_correction(geometry_jet(h), u, j, k);
}

TwoPhaseField f_correction(const GeometryJet& jet, const TwoPhaseField& u, int j, int k) {
  const StripGrid& g = u.grid();
  const int vert = g.dim - 1;
  const int cols = g.columns();
  std::vector<double> hj(cols), hk(cols), hjk(cols), hjhk(cols);
  for (int col = 0; col < cols; ++col) {
    hj[col] = jet.dh(j, col);
    hk[col] = jet.dh(k, col);
    hjk[col] = jet.ddh(j, k, col);
    hjhk[col] = hj[col] * hk[col];
  }
  const TwoPhaseField dn = d_vertical(u);
  TwoPhaseField out = times_surface(dn, hjk);
  if (j != vert) out += times_surface(second_derivative(u, vert, k), hj);
  if (k != vert) out += times_surface(second_derivative(u, j, vert), hk);
  if (j != vert && k != vert) out -= times_surface(d_vertical2(u), hjhk);
  return out;
}

TwoPhaseField symmetric_gradient(const TwoPhaseField& u) {
  const StripGrid& g = u.grid();
  const int N = g.dim;
  std::vector<TwoPhaseField> grad;  // grad[a*N + b] = D_b u_a
  grad.reserve(N * N);
  for (int a = 0; a < N; ++a) {
    const TwoPhaseField ua = u.extract(a);
    for (int b = 0; b < N; ++b) grad.push_back(derivative(ua, b));
  }
  TwoPhaseField out(g, N * N);
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) out.assign(a * N + b, 0.5 * (grad[a * N + b] + grad[b * N + a]));
  return out;
}

TwoPhaseField transformed_deformation(const TwoPhaseField& u, const HeightField& h) {
  return transformed_deformation(u, geometry_jet(h));
}

TwoPhaseField transformed_deformation(const TwoPhaseField& u, const GeometryJet& jet) {
  const StripGrid& g = u.grid();
  const int N = g.dim;
  TwoPhaseField E = symmetric_gradient(u);
  const TwoPhaseField dn = d_vertical(u);
  const std::size_t csize = E.component_size();
  const std::size_t lsize = E.level_size();
  for (Phase p : kPhases) {
    auto& e = E.block(p);
    const auto& d = dn.block(p);
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b)
        for (int i = 0; i < g.n_v; ++i)
          for (std::size_t col = 0; col < lsize; ++col) {
            const std::size_t off = i * lsize + col;
            const double ga = jet.dh(a, static_cast<int>(col));
            const double gb = jet.dh(b, static_cast<int>(col));
            e[(a * N + b) * csize + off] -= 0.5 * (d[a * csize + off] * gb + ga * d[b * csize + off]);
          }
  }
  return E;
}

TwoPhaseField frobenius_sq(const TwoPhaseField& tensor) {
  TwoPhaseField out(tensor.grid(), 1);
  const std::size_t n = tensor.component_size();
  for (Phase p : kPhases) {
    const auto& t = tensor.block(p);
    auto& o = out.block(p);
    for (int c = 0; c < tensor.components(); ++c)
      for (std::size_t i = 0; i < n; ++i) o[i] += t[c * n + i] * t[c * n + i];
  }
  return out;
}

SurfaceField frobenius_sq(const SurfaceField& tensor) {
  SurfaceField out(tensor.grid(), 1);
  for (int c = 0; c < tensor.components(); ++c)
    for (int col = 0; col < tensor.columns(); ++col) out(0, col) += tensor(c, col) * tensor(c, col);
  return out;
}

CurvatureSplit curvature_split(const HeightField& h) { return curvature_split(geometry_jet(h)); }

CurvatureSplit curvature_split(const GeometryJet& jet) {
  const StripGrid& g = jet.laplacian.grid();
  const int m = g.horizontal_dims();
  CurvatureSplit out{jet.laplacian, SurfaceField(g, 1), SurfaceField(g, 1)};
  for (int col = 0; col < g.columns(); ++col) {
    double grad_sq = 0.0;
    double hess_term = 0.0;
    for (int j = 0; j < m; ++j) {
      grad_sq += jet.grad(j, col) * jet.grad(j, col);
      for (int k = 0; k < m; ++k) hess_term += jet.grad(j, col) * jet.grad(k, col) * jet.hessian(j * m + k, col);
    }
    const double q = std::sqrt(1.0 + grad_sq);
    const double corr = grad_sq * jet.laplacian(0, col) / ((1.0 + q) * q) + hess_term / (q * q * q);
    out.correction(0, col) = corr;
    out.mean_curvature(0, col) = jet.laplacian(0, col) - corr;
  }
  return out;
}

InterfaceKinematics normal_and_velocity(const HeightField& h, const SurfaceField& dh_dt) {
  const StripGrid& g = h.grid();
  const int m = g.horizontal_dims();
  const GeometryJet jet = geometry_jet(h);
  InterfaceKinematics out{SurfaceField(g, g.dim), SurfaceField(g, 1)};
  for (int col = 0; col < g.columns(); ++col) {
    double grad_sq = 0.0;
    for (int j = 0; j < m; ++j) grad_sq += jet.grad(j, col) * jet.grad(j, col);
    const double q = std::sqrt(1.0 + grad_sq);
    for (int j = 0; j < m; ++j) out.normal(j, col) = -jet.grad(j, col) / q;
    out.normal(m, col) = 1.0 / q;
    out.normal_velocity(0, col) = dh_dt(0, col) / q;
  }
  return out;
}

}  // namespace flatflow
