#include "flatflow/norms.hpp"

#include "flatflow/errors.hpp"
#include "flatflow/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace flatflow {

namespace {

/// |x|^p with repeated multiplication when p is a small integer.
class PowP {
 public:
  explicit PowP(double p) : p_(p), ip_(static_cast<int>(p)), integer_(p == std::floor(p) && p >= 1.0 && p <= 64.0) {}
  double operator()(double x) const {
    x = std::abs(x);
    if (!integer_) return std::pow(x, p_);
    double r = 1.0;
    double b = x;
    for (int e = ip_; e > 0; e >>= 1) {
      if (e & 1) r *= b;
      b *= b;
    }
    return r;
  }

 private:
  double p_;
  int ip_;
  bool integer_;
};

double ordered_sum(const std::vector<double>& parts) { return std::accumulate(parts.begin(), parts.end(), 0.0); }

int horizontal_offset(int a, int b, int n) {
  const int o = ((b - a) % n + n) % n;
  return std::min(o, n - o);
}

double torus_cell_weight(const StripGrid& g) { return std::pow(g.dx(), g.dim - 1); }

SurfaceSeries gradient_series(const SurfaceSeries& f) {
  SurfaceSeries out;
  out.reserve(f.size());
  for (const auto& s : f) {
    const StripGrid& g = s.grid();
    const int m = g.horizontal_dims();
    SurfaceField gr(g, m * s.components());
    for (int c = 0; c < s.components(); ++c)
      for (int j = 0; j < m; ++j) gr.assign(c * m + j, d_horizontal(s.extract(c), j));
    out.push_back(std::move(gr));
  }
  return out;
}

FieldSeries gradient_series(const FieldSeries& f) {
  FieldSeries out;
  out.reserve(f.size());
  for (const auto& s : f) {
    const StripGrid& g = s.grid();
    TwoPhaseField gr(g, g.dim * s.components());
    for (int c = 0; c < s.components(); ++c) {
      const TwoPhaseField sc = s.extract(c);
      for (int j = 0; j < g.dim; ++j) gr.assign(c * g.dim + j, derivative(sc, j));
    }
    out.push_back(std::move(gr));
  }
  return out;
}

SurfaceSeries stack(const SurfaceSeries& a, const SurfaceSeries& b) {
  SurfaceSeries out;
  for (std::size_t n = 0; n < a.size(); ++n) {
    const StripGrid& g = a[n].grid();
    SurfaceField s(g, a[n].components() + b[n].components());
    for (int c = 0; c < a[n].components(); ++c) s.assign(c, a[n].extract(c));
    for (int c = 0; c < b[n].components(); ++c) s.assign(a[n].components() + c, b[n].extract(c));
    out.push_back(std::move(s));
  }
  return out;
}

SurfaceSeries scalar_sin(const SurfaceSeries& g) {
  SurfaceSeries out = g;
  for (auto& s : out)
    for (double& v : s.data()) v = std::sin(v);
  return out;
}

SurfaceSeries product(const SurfaceSeries& f, const SurfaceSeries& g) {
  SurfaceSeries out = f;
  for (std::size_t n = 0; n < f.size(); ++n)
    for (std::size_t i = 0; i < out[n].data().size(); ++i) out[n].data()[i] *= g[n].data()[i];
  return out;
}

double max_abs(const SurfaceSeries& f) {
  double m = 0.0;
  for (const auto& s : f) m = std::max(m, s.max_abs());
  return m;
}

}  // namespace

std::vector<std::string> NormConfig::errors(int dim) const {
  std::vector<std::string> errs;
  if (!std::isfinite(p) || !(p > dim + 2.0)) {
    std::ostringstream os;
    os << "norms.p = " << p << " must satisfy p > N + 2 = " << dim + 2 << " (strictly)";
    errs.push_back(os.str());
  }
  if (p == 1.5 || p == 3.0) errs.push_back("norms.p must differ from 3/2 and 3");
  return errs;
}

void NormConfig::validate(int dim) const {
  if (auto e = errors(dim); !e.empty()) throw ConfigError(e);
}

// ---------------------------------------------------------------------------
// Series helpers
// ---------------------------------------------------------------------------

SurfaceSeries cell_average(const SurfaceSeries& nodes) {
  SurfaceSeries out;
  for (std::size_t c = 0; c + 1 < nodes.size(); ++c) out.push_back(0.5 * (nodes[c] + nodes[c + 1]));
  return out;
}

FieldSeries cell_average(const FieldSeries& nodes) {
  FieldSeries out;
  for (std::size_t c = 0; c + 1 < nodes.size(); ++c) out.push_back(0.5 * (nodes[c] + nodes[c + 1]));
  return out;
}

SurfaceSeries cell_difference(const SurfaceSeries& nodes, double dt) {
  SurfaceSeries out;
  for (std::size_t c = 0; c + 1 < nodes.size(); ++c) out.push_back((1.0 / dt) * (nodes[c + 1] - nodes[c]));
  return out;
}

FieldSeries cell_difference(const FieldSeries& nodes, double dt) {
  FieldSeries out;
  for (std::size_t c = 0; c + 1 < nodes.size(); ++c) out.push_back((1.0 / dt) * (nodes[c + 1] - nodes[c]));
  return out;
}

double lp_norm(const SurfaceSeries& cells, double dt, double p) {
  if (cells.empty()) return 0.0;
  const PowP pw(p);
  const double w = torus_cell_weight(cells[0].grid());
  double sum = 0.0;
  for (const auto& s : cells)
    for (double v : s.data()) sum += pw(v);
  return std::pow(sum * w * dt, 1.0 / p);
}

double lp_norm(const FieldSeries& cells, double dt, double p) {
  if (cells.empty()) return 0.0;
  const PowP pw(p);
  const StripGrid& g = cells[0].grid();
  const double w = torus_cell_weight(g) * g.dz();
  double sum = 0.0;
  for (const auto& f : cells)
    for (Phase ph : kPhases)
      for (int c = 0; c < f.components(); ++c)
        for (int i = 0; i < g.n_v; ++i) {
          const double wi = (i == 0 || i == g.n_v - 1) ? 0.5 : 1.0;
          double level = 0.0;
          for (double v : f.level(ph, c, i)) level += pw(v);
          sum += wi * level;
        }
  return std::pow(sum * w * dt, 1.0 / p);
}

double time_seminorm(const SurfaceSeries& cells, double dt, double s, double p) {
  const int nc = static_cast<int>(cells.size());
  if (nc < 2) return 0.0;
  const PowP pw(p);
  const double w = torus_cell_weight(cells[0].grid());
  std::vector<double> kernel(nc);
  for (int d = 1; d < nc; ++d) kernel[d] = 1.0 / std::pow(d * dt, 1.0 + s * p);
  std::vector<double> parts(nc, 0.0);
  parallel_for(nc, [&](int c) {
    const auto& a = cells[c].data();
    double acc = 0.0;
    for (int c2 = c + 1; c2 < nc; ++c2) {
      const auto& b = cells[c2].data();
      double diff = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) diff += pw(a[i] - b[i]);
      acc += diff * kernel[c2 - c];
    }
    parts[c] = acc;
  });
  return std::pow(2.0 * ordered_sum(parts) * w * dt * dt, 1.0 / p);
}

double space_seminorm(const SurfaceSeries& cells, double dt, double s, double p) {
  if (cells.empty()) return 0.0;
  const StripGrid& g = cells[0].grid();
  const int m = g.horizontal_dims();
  const int cols = g.columns();
  const int n = g.n_h;
  const PowP pw(p);
  const double dx = g.dx();
  const double expo = m + s * p;
  // Kernel by per-direction minimal offsets.
  std::vector<double> kernel(static_cast<std::size_t>(m == 1 ? n / 2 + 1 : (n / 2 + 1) * (n / 2 + 1)), 0.0);
  for (int ox = 0; ox <= n / 2; ++ox)
    for (int oy = 0; oy <= (m == 1 ? 0 : n / 2); ++oy) {
      if (ox == 0 && oy == 0) continue;
      const double d = dx * std::sqrt(double(ox) * ox + double(oy) * oy);
      kernel[ox * (m == 1 ? 1 : n / 2 + 1) + oy] = 1.0 / std::pow(d, expo);
    }
  auto kernel_of = [&](int i, int j) {
    if (m == 1) return kernel[horizontal_offset(i, j, n)];
    const int ox = horizontal_offset(g.column_index(i, 0), g.column_index(j, 0), n);
    const int oy = horizontal_offset(g.column_index(i, 1), g.column_index(j, 1), n);
    return kernel[ox * (n / 2 + 1) + oy];
  };
  const int ncell = static_cast<int>(cells.size());
  const int ncomp = cells[0].components();
  std::vector<double> parts(static_cast<std::size_t>(ncell) * cols, 0.0);
  parallel_for(ncell * cols, [&](int task) {
    const int c = task / cols;
    const int i = task % cols;
    const SurfaceField& f = cells[c];
    double acc = 0.0;
    for (int j = i + 1; j < cols; ++j) {
      double diff = 0.0;
      for (int q = 0; q < ncomp; ++q) diff += pw(f(q, i) - f(q, j));
      acc += diff * kernel_of(i, j);
    }
    parts[task] = acc;
  });
  const double w = torus_cell_weight(g);
  return std::pow(2.0 * ordered_sum(parts) * w * w * dt, 1.0 / p);
}

double bulk_seminorm(const TwoPhaseField& f, double s, double p) {
  const StripGrid& g = f.grid();
  const int m = g.horizontal_dims();
  const int cols = g.columns();
  const int n = g.n_h;
  const int nv = g.n_v;
  const PowP pw(p);
  const double dx = g.dx();
  const double dz = g.dz();
  const double expo = g.dim + s * p;
  const int hw = n / 2 + 1;
  const int hsize = m == 1 ? hw : hw * hw;
  std::vector<double> kernel(static_cast<std::size_t>(hsize) * nv, 0.0);
  for (int oh = 0; oh < hsize; ++oh) {
    const int ox = m == 1 ? oh : oh / hw;
    const int oy = m == 1 ? 0 : oh % hw;
    for (int di = 0; di < nv; ++di) {
      if (oh == 0 && di == 0) continue;
      const double h2 = dx * dx * (double(ox) * ox + double(oy) * oy);
      kernel[static_cast<std::size_t>(oh) * nv + di] = 1.0 / std::pow(std::sqrt(h2 + dz * dz * di * di), expo);
    }
  }
  auto hoff = [&](int a, int b) {
    if (m == 1) return horizontal_offset(a, b, n);
    return horizontal_offset(g.column_index(a, 0), g.column_index(b, 0), n) * hw +
           horizontal_offset(g.column_index(a, 1), g.column_index(b, 1), n);
  };
  const int npts = cols * nv;
  const int ncomp = f.components();
  double total = 0.0;
  for (Phase ph : kPhases) {
    std::vector<double> parts(npts, 0.0);
    parallel_for(npts, [&](int a) {
      const int ia = a / cols;
      const int ca = a % cols;
      double acc = 0.0;
      for (int b = a + 1; b < npts; ++b) {
        const int ib = b / cols;
        const int cb = b % cols;
        double diff = 0.0;
        for (int q = 0; q < ncomp; ++q) diff += pw(f(ph, q, ia, ca) - f(ph, q, ib, cb));
        acc += diff * kernel[static_cast<std::size_t>(hoff(ca, cb)) * nv + std::abs(ib - ia)];
      }
      parts[a] = acc;
    });
    total += ordered_sum(parts);
  }
  const double w = torus_cell_weight(g) * dz;
  return std::pow(2.0 * total * w * w, 1.0 / p);
}

// ---------------------------------------------------------------------------
// Interface data seminorms
// ---------------------------------------------------------------------------

namespace {

void require_series(const SurfaceSeries& nodes) {
  if (nodes.size() < 2) throw DomainError("time seminorm undefined for a single time node");
}

double s_time(const NormConfig& cfg) { return 0.5 - 0.5 / cfg.p; }
double s_space(const NormConfig& cfg) { return 1.0 - 1.0 / cfg.p; }

}  // namespace

double seminorm_F3_time(const SurfaceSeries& nodes, const TimeGrid& t, const NormConfig& cfg) {
  require_series(nodes);
  return time_seminorm(cell_average(nodes), t.dt(), s_time(cfg), cfg.p);
}

double seminorm_F3_space(const SurfaceSeries& nodes, const TimeGrid& t, const NormConfig& cfg) {
  require_series(nodes);
  return space_seminorm(cell_average(nodes), t.dt(), s_space(cfg), cfg.p);
}

double norm_F3(const SurfaceSeries& nodes, const TimeGrid& t, const NormConfig& cfg) {
  require_series(nodes);
  const SurfaceSeries cells = cell_average(nodes);
  return lp_norm(cells, t.dt(), cfg.p) + time_seminorm(cells, t.dt(), s_time(cfg), cfg.p) +
         space_seminorm(cells, t.dt(), s_space(cfg), cfg.p);
}

double norm_Ftilde3(const SurfaceSeries& nodes, const TimeGrid& t, const NormConfig& cfg) {
  require_series(nodes);
  const SurfaceSeries cells = cell_average(nodes);
  return max_abs(nodes) + time_seminorm(cells, t.dt(), s_time(cfg), cfg.p) +
         space_seminorm(cells, t.dt(), s_space(cfg), cfg.p);
}

// ---------------------------------------------------------------------------
// Space norms
// ---------------------------------------------------------------------------

ENorms norm_E_spaces(const StateZ& z, const NormConfig& cfg) {
  const double p = cfg.p;
  const double dt = z.time.dt();
  ENorms out;
  if (z.u.size() < 2) return out;

  const FieldSeries u = cell_average(z.u);
  const FieldSeries du = gradient_series(u);
  const FieldSeries ddu = gradient_series(du);
  out.velocity = lp_norm(u, dt, p) + lp_norm(cell_difference(z.u, dt), dt, p) + lp_norm(du, dt, p) +
                 lp_norm(ddu, dt, p);

  out.pressure = lp_norm(gradient_series(cell_average(z.theta)), dt, p);

  const SurfaceSeries pi = cell_average(z.pi);
  out.jump = lp_norm(pi, dt, p) + time_seminorm(pi, dt, s_time(cfg), p) + space_seminorm(pi, dt, s_space(cfg), p);

  const SurfaceSeries h = cell_average(z.h);
  const SurfaceSeries ht = cell_difference(z.h, dt);
  const SurfaceSeries gh = gradient_series(h);
  const SurfaceSeries ggh = gradient_series(gh);
  const SurfaceSeries ght = gradient_series(ht);
  const double lh = lp_norm(h, dt, p);
  const double lht = lp_norm(ht, dt, p);
  const double lgh = lp_norm(gh, dt, p);
  const double lggh = lp_norm(ggh, dt, p);
  const double s2 = s_space(cfg);
  // W^{2-1/(2p)}(J, Lp)
  out.height_parts[0] = lh + lht + time_seminorm(ht, dt, 1.0 - 0.5 / p, p);
  // H^1(J, W^{2-1/p})
  out.height_parts[1] = lh + lgh + space_seminorm(gh, dt, s2, p) + lht + lp_norm(ght, dt, p) +
                        space_seminorm(ght, dt, s2, p);
  // W^{1/2-1/(2p)}(J, H^2)
  out.height_parts[2] = lh + lgh + lggh + time_seminorm(stack(stack(h, gh), ggh), dt, s_time(cfg), p);
  // Lp(J, W^{3-1/p})
  out.height_parts[3] = lh + lgh + lggh + space_seminorm(ggh, dt, s2, p);
  out.height = *std::max_element(out.height_parts.begin(), out.height_parts.end());
  return out;
}

FNorms norm_F_spaces(const DataF& d, const NormConfig& cfg) {
  const double p = cfg.p;
  const double dt = d.time.dt();
  FNorms out;
  if (d.F.size() < 2) return out;
  out.momentum = lp_norm(cell_average(d.F), dt, p);

  const FieldSeries fd = cell_average(d.f_d);
  out.divergence = lp_norm(fd, dt, p) + lp_norm(gradient_series(fd), dt, p) +
                   lp_norm(cell_average(d.f_d_potential), dt, p) +
                   lp_norm(cell_difference(d.f_d_potential, dt), dt, p);

  const SurfaceSeries G = cell_average(d.G);
  out.interface = lp_norm(G, dt, p) + time_seminorm(G, dt, s_time(cfg), p) + space_seminorm(G, dt, s_space(cfg), p);

  const SurfaceSeries gh = cell_average(d.g_h);
  const SurfaceSeries ggh = gradient_series(gh);
  out.kinematic = lp_norm(gh, dt, p) + time_seminorm(gh, dt, 1.0 - 0.5 / p, p) + lp_norm(ggh, dt, p) +
                  space_seminorm(ggh, dt, s_space(cfg), p);
  return out;
}

INorms norm_I(const TwoPhaseField& u0, const SurfaceField& h0, const NormConfig& cfg) {
  const double p = cfg.p;
  INorms out;
  const FieldSeries u{u0};
  const FieldSeries du = gradient_series(u);
  out.velocity = lp_norm(u, 1.0, p) + lp_norm(du, 1.0, p) + bulk_seminorm(du[0], 1.0 - 2.0 / p, p);
  const SurfaceSeries h{h0};
  const SurfaceSeries gh = gradient_series(h);
  const SurfaceSeries ggh = gradient_series(gh);
  out.height = lp_norm(h, 1.0, p) + lp_norm(gh, 1.0, p) + lp_norm(ggh, 1.0, p) +
               space_seminorm(ggh, 1.0, 1.0 - 2.0 / p, p);
  return out;
}

std::vector<std::pair<std::string, std::string>> norm_surrogates() {
  return {
      {"E1", "Lp(J,Lp) of u, d_t u, grad u and grad^2 u on cell averages"},
      {"E2", "Lp(J,Lp) of grad theta"},
      {"E3", "Lp(J,Lp) of pi + time seminorm of order 1/2-1/(2p) + space seminorm of order 1-1/p"},
      {"E4a", "W^{2-1/(2p)}(J,Lp): Lp of h and d_t h + time seminorm of d_t h"},
      {"E4b", "H^1(J,W^{2-1/p}): W^{2-1/p} norm of h and d_t h"},
      {"E4c", "W^{1/2-1/(2p)}(J,H^2): H^2 norm + time seminorm of (h, grad h, grad^2 h)"},
      {"E4d", "Lp(J,W^{3-1/p}): H^2 norm + space seminorm of grad^2 h"},
      {"F1", "Lp(J,Lp) of F"},
      {"F2", "Lp(J,H^1) of f_d + Lp of the potential phi and of d_t phi (f_d = D_N phi), "
             "standing in for the negative-order time-derivative norm"},
      {"F3", "Lp + time seminorm of order 1/2-1/(2p) + space seminorm of order 1-1/p of G"},
      {"F4", "Lp + time seminorm of order 1-1/(2p) + Lp of grad + space seminorm of grad g_h"},
      {"I", "W^{2-2/p} of u0 (isotropic seminorm within each phase) + W^{3-2/p} of h0"},
  };
}

AlgebraRatios algebra_inequality_probe(const SurfaceSeries& f, const SurfaceSeries& g, const TimeGrid& t,
                                       const NormConfig& cfg) {
  AlgebraRatios out;
  const SurfaceSeries fg = product(f, g);
  const double ft = norm_Ftilde3(f, t, cfg);
  const double gt = norm_Ftilde3(g, t, cfg);
  const double fgt = norm_Ftilde3(fg, t, cfg);
  out.ftilde_algebra = ft * gt > 0.0 ? fgt / (ft * gt) : 0.0;
  const double f3 = norm_F3(f, t, cfg);
  const double fg3 = norm_F3(fg, t, cfg);
  out.f3_product = f3 * gt > 0.0 ? fg3 / (f3 * gt) : 0.0;
  const double gsemi = seminorm_F3_time(g, t, cfg) + seminorm_F3_space(g, t, cfg);
  out.composition = norm_Ftilde3(scalar_sin(g), t, cfg) / (1.0 + gsemi);
  return out;
}

}  // namespace flatflow
