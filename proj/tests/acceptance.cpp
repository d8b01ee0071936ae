/// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include "flatflow/errors.hpp"
#include "flatflow/fixedpoint.hpp"
#include "flatflow/run.hpp"
#include "flatflow/run_config.hpp"
#include "manufactured.hpp"
#include "oracle.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>

using namespace flatflow;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string sci(double v) { return fmt("%.3e", v); }

/// Closed-form band-limited height a_q cos(q x) + b_q sin(q x), q = 1..3, with L_h = 1.
struct SmoothHeight {
  double a[3]{}, b[3]{};
  double value(double x) const {
    double s = 0.0;
    for (int q = 0; q < 3; ++q) s += a[q] * std::cos((q + 1) * x) + b[q] * std::sin((q + 1) * x);
    return s;
  }
  double d1(double x) const {
    double s = 0.0;
    for (int q = 0; q < 3; ++q) s += (q + 1) * (-a[q] * std::sin((q + 1) * x) + b[q] * std::cos((q + 1) * x));
    return s;
  }
  double d2(double x) const {
    double s = 0.0;
    for (int q = 0; q < 3; ++q) s -= (q + 1) * (q + 1) * (a[q] * std::cos((q + 1) * x) + b[q] * std::sin((q + 1) * x));
    return s;
  }
  SurfaceField sample(const StripGrid& g) const {
    return oracle::sample_surface(g, 1, [&](const Point& x, int) { return value(x[0]); });
  }
};

SmoothHeight random_smooth_height(std::uint64_t seed, double amplitude) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  SmoothHeight h;
  for (int q = 0; q < 3; ++q) {
    h.a[q] = uni(rng) / (q + 1);
    h.b[q] = uni(rng) / (q + 1);
  }
  double m = 0.0;
  for (int i = 0; i < 2048; ++i) m = std::max(m, std::abs(h.value(2.0 * M_PI * i / 2048)));
  for (int q = 0; q < 3; ++q) {
    h.a[q] *= amplitude / m;
    h.b[q] *= amplitude / m;
  }
  return h;
}

// ---------------------------------------------------------------------------
// 1. Transform fidelity
// ---------------------------------------------------------------------------

struct TransformErrors {
  double chain = 0.0, fcorr = 0.0, deform = 0.0;
};

TransformErrors transform_errors(int n, std::uint64_t seed) {
  const StripGrid g = oracle::make_grid(2, n, n, 1.0, 1.0);
  std::mt19937_64 rng(seed);
  const double amp = 0.05 + 0.15 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const SmoothHeight hs = random_smooth_height(seed + 1000, amp * g.L_v);
  const SurfaceField hf = hs.sample(g);
  const HeightField h(hf);
  const oracle::SmoothField v(g, 2, seed, 3);
  const TwoPhaseField u = oracle::pulled_back(v, g, hf);
  TransformErrors e;

  for (int j = 0; j < 2; ++j) {
    const TwoPhaseField ref =
        oracle::sample_pulled_back(g, hf, 2, [&](Phase p, int c, const Point& x) { return v.fd_derivative(p, c, x, j); });
    e.chain = std::max(e.chain, oracle::rel_error(chain_rule_derivative(u, h, j), ref));
  }

  const TwoPhaseField fref = oracle::sample_pulled_back(g, hf, 2, [&](Phase p, int c, const Point& x) {
    const double h1 = hs.d1(x[0]), h2 = hs.d2(x[0]);
    return h2 * v.fd_derivative(p, c, x, 1) + 2.0 * h1 * v.fd_second(p, c, x, 0, 1) + h1 * h1 * v.fd_second(p, c, x, 1, 1);
  });
  e.fcorr = oracle::rel_error(f_correction(h, u, 0, 0), fref);

  const TwoPhaseField dref = oracle::sample_pulled_back(g, hf, 4, [&](Phase p, int c, const Point& x) {
    const int a = c / 2, b = c % 2;
    return 0.5 * (v.fd_derivative(p, a, x, b) + v.fd_derivative(p, b, x, a));
  });
  e.deform = oracle::rel_error(transformed_deformation(u, h), dref);
  return e;
}

Verdict check_transform() {
  const int ns[3] = {32, 64, 128};
  TransformErrors worst[3];
  double member_min = 1e9;
  for (std::uint64_t s = 0; s < 20; ++s) {
    TransformErrors lv[3];
    for (int k = 0; k < 3; ++k) {
      lv[k] = transform_errors(ns[k], 11 + s);
      worst[k].chain = std::max(worst[k].chain, lv[k].chain);
      worst[k].fcorr = std::max(worst[k].fcorr, lv[k].fcorr);
      worst[k].deform = std::max(worst[k].deform, lv[k].deform);
    }
    for (int k = 0; k < 2; ++k)
      member_min = std::min({member_min, std::log2(lv[k].chain / lv[k + 1].chain),
                             std::log2(lv[k].fcorr / lv[k + 1].fcorr), std::log2(lv[k].deform / lv[k + 1].deform)});
  }
  double order = 1e9;
  for (int k = 0; k < 2; ++k)
    order = std::min({order, std::log2(worst[k].chain / worst[k + 1].chain),
                      std::log2(worst[k].fcorr / worst[k + 1].fcorr), std::log2(worst[k].deform / worst[k + 1].deform)});
  const TransformErrors& w = worst[2];
  const bool pass = w.chain < 1e-3 && w.fcorr < 1e-3 && w.deform < 1e-3 && order >= 2.0;
  return {pass, "max rel err at 128x128: chain " + sci(w.chain) + ", F-correction " + sci(w.fcorr) + ", deformation " +
                    sci(w.deform) + " (limit 1e-3); order of the ensemble error " + fmt("%.3f", order) +
                    " (>= 2), smallest single-member order " + fmt("%.3f", member_min)};
}

// ---------------------------------------------------------------------------
// 2. Curvature split
// ---------------------------------------------------------------------------

Verdict check_curvature() {
  const StripGrid g = oracle::make_grid(2, 256, 9, 1.0, 1.0);
  double worst = 0.0, worst_split = 0.0;
  for (double A : {0.05, 0.2, 0.5}) {
    const SurfaceField h = oracle::sample_surface(g, 1, [&](const Point& x, int) { return A * std::sin(x[0]); });
    const SurfaceField ref = oracle::sample_surface(g, 1, [&](const Point& x, int) {
      const double h1 = A * std::cos(x[0]), h2 = -A * std::sin(x[0]);
      return h2 / std::pow(1.0 + h1 * h1, 1.5);
    });
    const CurvatureSplit c = curvature_split(HeightField(h));
    worst = std::max(worst, oracle::max_abs_diff(c.mean_curvature, ref));
    worst_split = std::max(worst_split, oracle::max_abs_diff(c.laplacian - c.correction, ref));
  }
  return {worst < 1e-6 && worst_split < 1e-6, "max |split - divergence form| = " + sci(std::max(worst, worst_split)) +
                                                  " over A in {0.05, 0.2, 0.5} at n_h = 256 (limit 1e-6)"};
}

// ---------------------------------------------------------------------------
// 3. Constitutive identities
// ---------------------------------------------------------------------------

PhasePair same_model(const ViscosityModel& m) {
  PhasePair pp;
  pp.model1 = m;
  pp.model2 = m;
  return pp;
}

TwoPhaseField fd_stress_divergence(const oracle::SmoothField& v, const StripGrid& g, const ViscosityModel& model) {
  auto flux = [&](Phase p, Point x, int i, int j) {
    double D[4], s = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        D[a * 2 + b] = 0.5 * (v.fd_derivative(p, a, x, b, 1e-4) + v.fd_derivative(p, b, x, a, 1e-4));
        s += D[a * 2 + b] * D[a * 2 + b];
      }
    return model.mu(s) * D[i * 2 + j];
  };
  return oracle::sample_pulled_back(g, SurfaceField(g, 1), 2, [&](Phase p, int i, const Point& x) {
    double div = 0.0;
    const double d = 1e-3;
    for (int j = 0; j < 2; ++j) {
      auto at = [&](double s) {
        Point y = x;
        y[j] += s;
        return flux(p, y, i, j);
      };
      div += (-at(2 * d) + 8 * at(d) - 8 * at(-d) + at(-2 * d)) / (12 * d);
    }
    return -div;
  });
}

Verdict check_constitutive() {
  // Clause 1 on the discrete level: A(0)u against -mu0 (Laplacian + grad div) built from the same stencils.
  const StripGrid g1 = oracle::make_grid(2, 32, 33);
  const TwoPhaseField u1 = oracle::pulled_back(oracle::SmoothField(g1, 2, 5, 3), g1, SurfaceField(g1, 1));
  const double nu = 1.3;
  const PhasePair pn = same_model(ViscosityModel::power_shift(nu, 3.0));
  const double mu0 = pn.mu0(Phase::lower);
  TwoPhaseField lit(g1, 2);
  for (int i = 0; i < 2; ++i) {
    TwoPhaseField r(g1, 1);
    for (int j = 0; j < 2; ++j) {
      r += second_derivative(u1.extract(i), j, j);
      r += second_derivative(u1.extract(j), i, j);
    }
    lit.assign(i, -mu0 * r);
  }
  const TwoPhaseField a0 = frozen_stress_operator(pn, u1);
  const double lit_err = oracle::rel_error(a0, lit);
  const double half_err = oracle::rel_error(a0, 0.5 * lit);
  double ratio = 0.0;
  {
    double num = 0.0, den = 0.0;
    for (Phase p : kPhases)
      for (std::size_t k = 0; k < a0.block(p).size(); ++k) {
        num += a0.block(p)[k] * lit.block(p)[k];
        den += lit.block(p)[k] * lit.block(p)[k];
      }
    ratio = num / den;
  }
  const bool clause1 = lit_err < 1e-12;

  // Clause 2: stress divergence against the nested finite-difference oracle.
  const StripGrid g2 = oracle::make_grid(2, 32, 257, 1.0, 1.0);
  const oracle::SmoothField v(g2, 2, 17, 2);
  const TwoPhaseField u2 = oracle::pulled_back(v, g2, SurfaceField(g2, 1));
  double worst = 0.0;
  for (const ViscosityModel& m : {ViscosityModel::power_shift(1.0, 1.5), ViscosityModel::power_shift(1.0, 3.0),
                                  ViscosityModel::power_sum(1.0, 4.0), ViscosityModel::power_sum(1.0, 6.0)})
    worst = std::max(worst, oracle::rel_error(stress_divergence(same_model(m), u2), fd_stress_divergence(v, g2, m)));
  const bool clause2 = worst < 1e-4;
  return {clause1 && clause2, std::string("A(0)u = -mu0(Lap u + grad div u): ") + (clause1 ? "holds" : "does NOT hold") +
                                  ", rel err " + sci(lit_err) + ", measured ratio " + fmt("%.15f", ratio) +
                                  " (with factor 1/2: rel err " + sci(half_err) +
                                  "); stress_divergence vs FD oracle max rel err " + sci(worst) + " (limit 1e-4)"};
}

// ---------------------------------------------------------------------------
// 4. Nonlinearity smallness
// ---------------------------------------------------------------------------

PhasePair nonnewtonian_pair() {
  PhasePair pp;
  pp.rho1 = 1.0;
  pp.rho2 = 1.3;
  pp.model1 = ViscosityModel::power_shift(1.0, 3.0);
  pp.model2 = ViscosityModel::power_sum(0.8, 4.0);
  pp.gamma_a = 0.5;
  pp.sigma = 1.0;
  return pp;
}

Verdict check_smallness() {
  const StripGrid g = oracle::make_grid(2, 32, 33, 1.0, 1.0);
  const TimeGrid t{0.5, 10};
  const PhasePair pp = nonnewtonian_pair();
  const double zero = eval_N(pp, StateZ::zero(g, t)).max_abs();
  double min_slope = 1e9;
  bool degenerate = false;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const SmallnessProbe p = smallness_probe(pp, random_direction(g, t, s), {1e-1, 3e-2, 1e-2}, {});
    degenerate = degenerate || p.degenerate;
    min_slope = std::min(min_slope, p.slope);
  }
  return {zero == 0.0 && !degenerate && min_slope >= 1.9,
          "max|N(0)| = " + sci(zero) + "; min log-log slope over 5 directions " + fmt("%.4f", min_slope) + " (>= 1.9)"};
}

// ---------------------------------------------------------------------------
// 5. Linear solver
// ---------------------------------------------------------------------------

DataF random_data(const StripGrid& g, const TimeGrid& t, std::uint64_t seed) {
  DataF d = DataF::zero(g, t);
  const SurfaceField flat(g, 1);
  for (int n = 0; n < t.nodes(); ++n) {
    d.F[n] = oracle::pulled_back(oracle::SmoothField(g, g.dim, seed + 10 * n), g, flat);
    d.f_d[n] = oracle::pulled_back(oracle::SmoothField(g, 1, seed + 10 * n + 1), g, flat);
    for (int c = 0; c < g.dim; ++c) d.G[n].assign(c, oracle::random_height(g, seed + 10 * n + 2 + c, 0.5, 2));
    d.g_h[n] = oracle::random_height(g, seed + 10 * n + 7, 0.3, 2);
  }
  return d;
}

Verdict check_linear() {
  const LinearParams params = manufactured::default_params();
  double discrete = 0.0;
  for (int dim : {2, 3}) {
    const StripGrid g = oracle::make_grid(dim, dim == 2 ? 32 : 8, 33, 1.0, 1.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int m = 0; m < g.modes(); ++m) {
      if (g.is_nyquist(m)) continue;
      const WavenumberBlock block(g, m, 0.02, params);
      std::vector<cplx> x(block.size());
      for (auto& c : x) c = {uni(rng), uni(rng)};
      const std::vector<cplx> b = block.apply(x);
      const std::vector<cplx> r = block.apply(block.solve(b));
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < b.size(); ++i) {
        num = std::max(num, std::abs(r[i] - b[i]));
        den = std::max(den, std::abs(b[i]));
      }
      discrete = std::max(discrete, num / den);
    }
  }

  const manufactured::Solution sc = manufactured::space_case();
  double es[3];
  const int nv[3] = {17, 33, 65};
  for (int k = 0; k < 3; ++k) es[k] = sc.error(sc.solve(oracle::make_grid(2, 8, nv[k]), TimeGrid{0.5, 5}));
  const double os1 = std::log2(es[0] / es[1]), os2 = std::log2(es[1] / es[2]);

  const manufactured::Solution tc = manufactured::time_case();
  double et[3];
  const int nt[3] = {10, 20, 40};
  for (int k = 0; k < 3; ++k) et[k] = tc.error(tc.solve(oracle::make_grid(2, 8, 9), TimeGrid{0.5, nt[k]}));
  const double ot1 = std::log2(et[0] / et[1]), ot2 = std::log2(et[1] / et[2]);

  const StripGrid g = oracle::make_grid(2, 32, 33);
  const TimeGrid t{0.5, 10};
  LinearSolveOptions opt;
  opt.check_compatibility = false;
  const double zero =
      solve_linear_evolution(params, DataF::zero(g, t), TwoPhaseField(g, 2), SurfaceField(g, 1), opt).max_abs();
  const DataF a = random_data(g, t, 1), b = random_data(g, t, 500);
  const SurfaceField ha = oracle::random_height(g, 3, 0.1), hb = oracle::random_height(g, 4, 0.1);
  const TwoPhaseField u0(g, 2);
  const StateZ za = solve_linear_evolution(params, a, u0, ha, opt);
  const StateZ zb = solve_linear_evolution(params, b, u0, hb, opt);
  const StateZ zab = solve_linear_evolution(params, 1.7 * a + (-0.6) * b, u0, 1.7 * ha + (-0.6) * hb, opt);
  const double sup = (zab - (1.7 * za + (-0.6) * zb)).max_abs() / zab.max_abs();

  auto near = [](double o, double target) { return std::abs(o - target) <= 0.2; };
  const bool pass = discrete < 1e-12 && near(os1, 2.0) && near(os2, 2.0) && near(ot1, 1.0) && near(ot2, 1.0) &&
                    zero <= 1e-14 && sup < 1e-10;
  return {pass, "discrete residual " + sci(discrete) + "; space orders " + fmt("%.3f", os1) + ", " + fmt("%.3f", os2) +
                    "; time orders " + fmt("%.3f", ot1) + ", " + fmt("%.3f", ot2) + "; zero data -> " + sci(zero) +
                    "; superposition defect " + sci(sup)};
}

// ---------------------------------------------------------------------------
// 6. Physical sanity
// ---------------------------------------------------------------------------

RunConfig load_named(const std::string& name) { return load_config(fs::path(FLATFLOW_CONFIG_DIR) / name); }

double mode_magnitude(const SurfaceField& h, int mode) { return std::abs(surface_spectrum(h)[0][mode]); }

double mean_of(const SurfaceField& h) {
  double s = 0.0;
  for (double v : h.data()) s += v;
  return s / h.data().size();
}

double energy(const LinearParams& lp, const TwoPhaseField& u, const SurfaceField& h) {
  const StripGrid& g = u.grid();
  const double w = std::pow(g.dx(), g.dim - 1);
  double e = 0.0;
  for (Phase p : kPhases)
    for (int c = 0; c < g.dim; ++c)
      for (int i = 0; i < g.n_v; ++i) {
        const double wi = (i == 0 || i == g.n_v - 1) ? 0.5 : 1.0;
        for (double v : u.level(p, c, i)) e += lp.rho(p) * wi * v * v * w * g.dz();
      }
  for (int j = 0; j < g.dim - 1; ++j) {
    const SurfaceField dh = d_horizontal(h, j);
    for (double v : dh.data()) e += lp.sigma * v * v * w;
  }
  return e;
}

Verdict check_physical() {
  const RunConfig cfg = load_named("small_sine.json");
  const PicardResult res =
      picard_solve(cfg.phases(), cfg.initial_velocity(), cfg.initial_height(), cfg.time, cfg.solver, cfg.norms);
  bool monotone = res.report.status == SolveStatus::converged;
  double first = mode_magnitude(res.z.h[0], 1), last = first;
  for (std::size_t n = 1; n < res.z.h.size(); ++n) {
    const double m = mode_magnitude(res.z.h[n], 1);
    monotone = monotone && m < last;
    last = m;
  }

  const StripGrid g = oracle::make_grid(2, 32, 33, 1.0, 1.0);
  const TimeGrid t{1.0, 20};
  LinearParams lp = manufactured::default_params();
  lp.gamma_a = 0.0;
  SurfaceField h0 = oracle::random_height(g, 21, 0.1);
  for (double& v : h0.data()) v += 0.05;
  const StateZ z = solve_linear_evolution(lp, DataF::zero(g, t), TwoPhaseField(g, 2), h0);
  double drift = 0.0;
  for (const SurfaceField& h : z.h) drift = std::max(drift, std::abs(mean_of(h) - mean_of(h0)));
  double max_rise = -std::numeric_limits<double>::infinity();
  bool decreasing = true;
  for (std::size_t n = 1; n < z.u.size(); ++n) {
    const double e0 = energy(lp, z.u[n - 1], z.h[n - 1]), e1 = energy(lp, z.u[n], z.h[n]);
    max_rise = std::max(max_rise, (e1 - e0) / e0);
    decreasing = decreasing && e1 <= e0 * (1.0 + 1e-12);
  }
  return {monotone && drift < 1e-10 && decreasing,
          std::string("first mode ") + sci(first) + " -> " + sci(last) + (monotone ? " strictly decreasing" : " NOT monotone") +
              "; mean drift " + sci(drift) + " (limit 1e-10); max relative energy change per step " + sci(max_rise)};
}

// ---------------------------------------------------------------------------
// 7. Contraction
// ---------------------------------------------------------------------------

RunConfig with_viscosity(RunConfig c, const std::string& family, double d) {
  for (PhaseSpec* p : {&c.lower, &c.upper}) {
    p->viscosity.family = family;
    p->viscosity.d = d;
  }
  return c;
}

PicardResult solve_config(const RunConfig& c) {
  return picard_solve(c.phases(), c.initial_velocity(), c.initial_height(), c.time, c.solver, c.norms);
}

Verdict check_contraction() {
  const RunConfig base = load_named("small_sine.json");
  const RunConfig ps = with_viscosity(base, "power-shift", 3.0);
  const PicardResult r = solve_config(ps);
  double max_ratio = 0.0;
  for (std::size_t m = 1; m < r.report.iterations.size(); ++m) max_ratio = std::max(max_ratio, r.report.iterations[m].ratio);
  const double iface = r.report.interface.max();
  const bool conv = r.report.status == SolveStatus::converged;

  const PicardResult coarse = solve_config(base);
  RunConfig fine_cfg = base;
  fine_cfg.grid.n_v = 2 * base.grid.n_v - 1;
  fine_cfg.time.n_t = 2 * base.time.n_t;
  const PicardResult fine = solve_config(fine_cfg);
  const double hc = coarse.z.h.back().max_abs(), hf = fine.z.h.back().max_abs();
  const double rel = std::abs(hc - hf) / hf;
  const bool pass = conv && max_ratio < 0.5 && iface < 10.0 * ps.solver.tol &&
                    coarse.report.status == SolveStatus::converged && fine.report.status == SolveStatus::converged &&
                    rel < 0.01;
  return {pass, std::string("power-shift d = 3: ") + to_string(r.report.status) + " in " +
                    std::to_string(r.report.iterations.size()) + " iterations, max ratio " + fmt("%.4f", max_ratio) +
                    ", interface residual " + sci(iface) + " (limit " + sci(10.0 * ps.solver.tol) +
                    "); Newtonian |h(a)|inf " + sci(hc) + " vs fine " + sci(hf) + ", rel diff " + sci(rel)};
}

// ---------------------------------------------------------------------------
// 8. Compatibility forms
// ---------------------------------------------------------------------------

Verdict check_compatibility_forms() {
  const StripGrid g = oracle::make_grid(2, 32, 65, 1.0, 1.0);
  int agree = 0, total = 0, classified = 0;
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    std::mt19937_64 rng(100 + s);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const SurfaceField h0 = oracle::random_height(g, 200 + s, 0.02 + 0.08 * uni(rng));
    const double nu = 0.5 + uni(rng), amp = 0.005 + 0.02 * uni(rng);
    PhasePair equal;
    equal.model1 = ViscosityModel::newtonian(nu);
    equal.model2 = ViscosityModel::newtonian(nu);
    PhasePair unequal = equal;
    unequal.model2 = ViscosityModel::newtonian(3.0 * nu);
    const TwoPhaseField stream = oracle::stream_velocity(g, h0, amp, 1 + static_cast<int>(s % 2), 0.85);
    const TwoPhaseField jumpy = oracle::pulled_back(oracle::SmoothField(g, 2, 300 + s, 2), g, h0);
    struct Case {
      const PhasePair* pp;
      const TwoPhaseField u;
      bool compatible;
    };
    const Case cases[] = {{&equal, TwoPhaseField(g, 2), true},
                          {&equal, stream, true},
                          {&unequal, stream, false},
                          {&equal, jumpy, false}};
    for (const Case& c : cases) {
      const CompatibilityReport r = check_compatibility(*c.pp, c.u, h0);
      ++total;
      worst = std::max(worst, oracle::max_abs_diff(r.tangential, r.tangential_from_conditions));
      if (r.pass() == r.pass_conditions()) ++agree;
      if (r.pass() == c.compatible) ++classified;
    }
  }
  return {agree == total && classified == total && worst < 1e-10,
          "pass/fail agree " + std::to_string(agree) + "/" + std::to_string(total) + ", expected verdict " +
              std::to_string(classified) + "/" + std::to_string(total) + ", max |stress form - condition form| " +
              sci(worst) + " (limit 1e-10)"};
}

// ---------------------------------------------------------------------------
// 9. Norm diagnostics
// ---------------------------------------------------------------------------

/// Closed-form space-time series sum (a cos + b sin)(q x) (1 + c t + d t^2) + e.
struct SeriesForm {
  double a[3]{}, b[3]{}, c[3]{}, d[3]{}, e = 0.0;
  SurfaceSeries sample(const StripGrid& g, const TimeGrid& t) const {
    SurfaceSeries out;
    for (int n = 0; n < t.nodes(); ++n) {
      const double tt = t.t(n);
      out.push_back(oracle::sample_surface(g, 1, [&](const Point& x, int) {
        double s = e;
        for (int q = 0; q < 3; ++q)
          s += (a[q] * std::cos((q + 1) * x[0]) + b[q] * std::sin((q + 1) * x[0])) * (1.0 + c[q] * tt + d[q] * tt * tt);
        return s;
      }));
    }
    return out;
  }
};

SeriesForm random_form(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  SeriesForm f;
  for (int q = 0; q < 3; ++q) {
    f.a[q] = uni(rng) / (q + 1);
    f.b[q] = uni(rng) / (q + 1);
    f.c[q] = uni(rng);
    f.d[q] = uni(rng);
  }
  f.e = uni(rng);
  return f;
}

Verdict check_norms() {
  double worst = 0.0;
  for (double p : {5.0, 5.5}) {
    const StripGrid g2 = oracle::make_grid(2, 32, 32);
    std::mt19937_64 rng(3);
    const SurfaceSeries s = random_form(rng).sample(g2, TimeGrid{1.0, 32});
    const SurfaceSeries cells = cell_average(s);
    const double dt = 1.0 / 32;
    worst = std::max(worst, oracle::rel_diff(time_seminorm(cells, dt, 0.4, p), oracle::dense_time_seminorm(cells, dt, 0.4, p)));
    worst = std::max(worst, oracle::rel_diff(space_seminorm(cells, dt, 0.8, p), oracle::dense_space_seminorm(cells, dt, 0.8, p)));
    const StripGrid g3 = oracle::make_grid(3, 32, 8);
    SurfaceSeries s3;
    for (int k = 0; k < 3; ++k) s3.push_back(oracle::random_height(g3, 40 + k, 1.0));
    worst = std::max(worst, oracle::rel_diff(space_seminorm(s3, dt, 0.8, p), oracle::dense_space_seminorm(s3, dt, 0.8, p)));
    const TwoPhaseField f = oracle::pulled_back(oracle::SmoothField(g2, 2, 9), g2, SurfaceField(g2, 1));
    worst = std::max(worst, oracle::rel_diff(bulk_seminorm(f, 0.6, p), oracle::dense_bulk_seminorm(f, 0.6, p)));
  }

  const NormConfig cfg{5.0};
  double Ca[2] = {0, 0}, Cb[2] = {0, 0}, Cc[2] = {0, 0};
  bool finite = true;
  for (int level = 0; level < 2; ++level) {
    const StripGrid g = oracle::make_grid(2, 32 << level, 5);
    const TimeGrid t{1.0, 16 << level};
    std::mt19937_64 rng(77);
    for (int k = 0; k < 100; ++k) {
      const SeriesForm f = random_form(rng), h = random_form(rng);
      const AlgebraRatios r = algebra_inequality_probe(f.sample(g, t), h.sample(g, t), t, cfg);
      finite = finite && std::isfinite(r.ftilde_algebra) && std::isfinite(r.f3_product) && std::isfinite(r.composition);
      Ca[level] = std::max(Ca[level], r.ftilde_algebra);
      Cb[level] = std::max(Cb[level], r.f3_product);
      Cc[level] = std::max(Cc[level], r.composition);
    }
  }
  const double da = std::abs(Ca[1] / Ca[0] - 1.0), dc = std::abs(Cc[1] / Cc[0] - 1.0);
  return {worst <= 1e-13 && finite && da < 0.1 && dc < 0.1,
          "max rel diff to dense sums " + sci(worst) + " (round-off); algebra constant " + fmt("%.4f", Ca[0]) + " -> " +
              fmt("%.4f", Ca[1]) + ", product constant " + fmt("%.4f", Cb[0]) + " -> " + fmt("%.4f", Cb[1]) +
              ", composition constant " + fmt("%.4f", Cc[0]) + " -> " + fmt("%.4f", Cc[1]) + " (change limit 10%)"};
}

// ---------------------------------------------------------------------------
// 10. Determinism and CLI
// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool same_artifacts(const fs::path& a, const fs::path& b, std::string& why) {
  std::vector<std::string> na, nb;
  for (const auto& e : fs::directory_iterator(a)) na.push_back(e.path().filename().string());
  for (const auto& e : fs::directory_iterator(b)) nb.push_back(e.path().filename().string());
  std::sort(na.begin(), na.end());
  std::sort(nb.begin(), nb.end());
  if (na != nb) {
    why = "file sets differ";
    return false;
  }
  for (const std::string& n : na) {
    if (n == "manifest.json") {
      auto ma = nlohmann::json::parse(slurp(a / n)), mb = nlohmann::json::parse(slurp(b / n));
      ma.erase("timestamps");
      mb.erase("timestamps");
      if (ma != mb) {
        why = n;
        return false;
      }
    } else if (slurp(a / n) != slurp(b / n)) {
      why = n;
      return false;
    }
  }
  return true;
}

std::vector<std::string> rules_for(const std::function<void(nlohmann::json&)>& edit) {
  auto j = nlohmann::json::parse(slurp(fs::path(FLATFLOW_CONFIG_DIR) / "small_sine.json"));
  edit(j);
  try {
    parse_config(j.dump());
  } catch (const ConfigError& e) {
    return e.rules();
  }
  return {};
}

Verdict check_determinism() {
  const fs::path root = fs::temp_directory_path() / "flatflow_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg = fs::path(FLATFLOW_CONFIG_DIR) / "small_sine.json";
  bool ok = true;
  std::string why;
  for (const char* d : {"a", "b"}) {
    const std::string cmd = std::string(FLATFLOW_CLI) + " run " + cfg.string() + " -o " + (root / d).string() +
                            " > " + (root / (std::string(d) + ".log")).string() + " 2>&1";
    ok = ok && std::system(cmd.c_str()) == 0;
  }
  const bool identical = ok && same_artifacts(root / "a", root / "b", why);

  const auto p_rules = rules_for([](nlohmann::json& j) { j["norms"]["p"] = 4; });
  const auto h_rules = rules_for([](nlohmann::json& j) { j["initial"]["h0"][0]["sin"] = 3.0; });
  auto named = [](const std::vector<std::string>& r, const std::string& key) {
    return r.size() == 1 && r[0].find(key) != std::string::npos;
  };
  const bool rejected = named(p_rules, "norms.p") && named(h_rules, "initial.h0");
  return {identical && rejected,
          std::string("CLI runs ") + (identical ? "byte-identical" : "differ (" + why + ")") +
              "; p = 4 rejected: " + (p_rules.empty() ? "no" : "'" + p_rules[0] + "'") +
              "; h0 >= L_v rejected: " + (h_rules.empty() ? "no" : "'" + h_rules[0] + "'")};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Verdict (*fn)();
  };
  const Criterion criteria[] = {
      {"transform fidelity", check_transform},       {"curvature split", check_curvature},
      {"constitutive identities", check_constitutive}, {"nonlinearity smallness", check_smallness},
      {"linear solver", check_linear},               {"physical sanity", check_physical},
      {"contraction", check_contraction},            {"compatibility forms", check_compatibility_forms},
      {"norm diagnostics", check_norms},             {"determinism and CLI", check_determinism},
  };
  int failed = 0;
  int index = 1;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2d %-24s %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", index++, c.name, v.detail.c_str(), secs);
    std::fflush(stdout);
    if (!v.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
