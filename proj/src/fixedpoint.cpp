#include "flatflow/fixedpoint.hpp"

#include "flatflow/errors.hpp"
#include "flatflow/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace flatflow {

std::vector<std::string> SolveConfig::errors() const {
  std::vector<std::string> errs;
  if (max_iter < 1) errs.push_back("solver.max_iter must be >= 1");
  if (!(tol > 0.0)) errs.push_back("solver.tol must be > 0");
  if (!(delta0_guard > 0.0)) errs.push_back("solver.delta0_guard must be > 0");
  if (!(compat_tol > 0.0)) errs.push_back("solver.compat_tol must be > 0");
  return errs;
}

void SolveConfig::validate() const {
  if (auto e = errors(); !e.empty()) throw ConfigError(e);
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::diverged: return "diverged";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::incompatible: return "incompatible";
  }
  return "unknown";
}

int exit_code(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return 0;
    case SolveStatus::diverged:
    case SolveStatus::max_iter: return 2;
    case SolveStatus::incompatible: return 3;
  }
  return 2;
}

double InterfaceResiduals::max() const { return std::max({tangential, normal, kinematic}); }

namespace {

/// Left-hand sides of the linear interface rows: tangential stress jumps and
/// the normal balance with the restoring term.
SurfaceField interface_lhs(const PhasePair& phases, const TwoPhaseField& u, const SurfaceField& pi,
                           const SurfaceField& h) {
  const StripGrid& g = u.grid();
  const int N = g.dim;
  const int vert = N - 1;
  const TwoPhaseField dn = d_vertical(u);
  const TwoPhaseField un = u.extract(vert);
  SurfaceField out(g, N);
  for (Phase p : kPhases) {
    const double sign = p == Phase::upper ? 1.0 : -1.0;
    const double mu0 = phases.mu0(p);
    const SurfaceField dn_tr = dn.trace(p);
    for (int j = 0; j < vert; ++j) {
      const SurfaceField dj_un = d_horizontal(un, j).trace(p);
      for (int col = 0; col < g.columns(); ++col) out(j, col) -= sign * mu0 * (dn_tr(j, col) + dj_un(0, col));
    }
    for (int col = 0; col < g.columns(); ++col) out(vert, col) -= 2.0 * sign * mu0 * dn_tr(vert, col);
  }
  const SurfaceField lap = [&] {
    SurfaceField l(g, 1);
    for (int j = 0; j < vert; ++j) l += d_horizontal(d_horizontal(h, j), j);
    return l;
  }();
  const double jr = phases.jump_rho() * phases.gamma_a;
  for (int col = 0; col < g.columns(); ++col)
    out(vert, col) += pi(0, col) - (jr * h(0, col) + phases.sigma * lap(0, col));
  return out;
}

double relative_or_zero(double resid, double scale) {
  if (resid == 0.0) return 0.0;
  return resid / std::max(scale, std::numeric_limits<double>::min());
}

}  // namespace

CompatibilityReport check_compatibility(const PhasePair& phases, const TwoPhaseField& u0, const SurfaceField& h0,
                                        double tol) {
  const StripGrid& g = u0.grid();
  const int N = g.dim;
  const int vert = N - 1;
  const int cols = g.columns();
  const HeightField h(h0);
  const GeometryJet jet = geometry_jet(h);
  const CurvatureSplit curv = curvature_split(jet);
  const TwoPhaseField E = transformed_deformation(u0, jet);

  CompatibilityReport rep;
  rep.tangential = SurfaceField(g, N);
  rep.theta_jump = SurfaceField(g, 1);

  // T = [2 mu(|E|^2) E n] with the unit normal n.
  SurfaceField normal(g, N);
  SurfaceField q(g, 1);
  for (int col = 0; col < cols; ++col) {
    double s = 1.0;
    for (int j = 0; j < vert; ++j) s += jet.dh(j, col) * jet.dh(j, col);
    q(0, col) = std::sqrt(s);
    for (int j = 0; j < vert; ++j) normal(j, col) = -jet.dh(j, col) / q(0, col);
    normal(vert, col) = 1.0 / q(0, col);
  }
  SurfaceField T(g, N);
  double grad_scale = 0.0;
  for (Phase p : kPhases) {
    const double sign = p == Phase::upper ? 1.0 : -1.0;
    const SurfaceField Et = E.trace(p);
    const SurfaceField esq = frobenius_sq(Et);
    for (int col = 0; col < cols; ++col) {
      const double mu = phases.model(p).mu(esq(0, col));
      for (int a = 0; a < N; ++a) {
        double v = 0.0;
        for (int b = 0; b < N; ++b) v += Et(a * N + b, col) * normal(b, col);
        T(a, col) += sign * 2.0 * mu * v;
      }
    }
  }
  for (int a = 0; a < N; ++a) {
    const TwoPhaseField ua = u0.extract(a);
    for (int b = 0; b < N; ++b) grad_scale = std::max(grad_scale, derivative(ua, b).max_abs());
  }
  rep.stress_scale = 2.0 * std::max(phases.mu0(Phase::lower), phases.mu0(Phase::upper)) * grad_scale;

  const double jr = phases.jump_rho() * phases.gamma_a;
  for (int col = 0; col < cols; ++col) {
    double nT = 0.0;
    for (int a = 0; a < N; ++a) nT += normal(a, col) * T(a, col);
    for (int a = 0; a < N; ++a) rep.tangential(a, col) = T(a, col) - nT * normal(a, col);
    rep.theta_jump(0, col) = nT + jr * h0(0, col) + phases.sigma * curv.laplacian(0, col) -
                             phases.sigma * curv.correction(0, col);
  }
  rep.tangential_max = rep.tangential.max_abs();

  // Interface-condition form: R = G - lhs, tangential part recovered as R/q.
  rep.condition_residual = eval_G(phases, u0, rep.theta_jump, h) - interface_lhs(phases, u0, rep.theta_jump, h0);
  rep.tangential_from_conditions = SurfaceField(g, N);
  for (int col = 0; col < cols; ++col) {
    for (int j = 0; j < vert; ++j) rep.tangential_from_conditions(j, col) = rep.condition_residual(j, col) / q(0, col);
    rep.tangential_from_conditions(vert, col) = rep.condition_residual(vert, col) / q(0, col);
  }
  rep.tangential_from_conditions_max = rep.tangential_from_conditions.max_abs();

  const double roundoff =
      1e-12 * (1.0 + rep.theta_jump.max_abs() + phases.sigma * curv.laplacian.max_abs() + std::abs(jr) * h0.max_abs());
  rep.tangential_pass = rep.tangential_max <= tol * rep.stress_scale + roundoff;
  rep.conditions_pass = rep.tangential_from_conditions_max <= tol * rep.stress_scale + roundoff;

  rep.divergence = divergence_compatibility(u0, eval_Fd(u0, h).value);
  rep.divergence_pass = rep.divergence <= tol;
  rep.velocity_jump = relative_or_zero(u0.jump().max_abs(), u0.max_abs());
  rep.jump_pass = rep.velocity_jump <= tol;
  return rep;
}

SurfaceField interface_row_residual(const PhasePair& phases, const TwoPhaseField& u, const SurfaceField& pi,
                                    const SurfaceField& h, const NonlinearOptions& options) {
  SurfaceField G = eval_G(phases, u, pi, HeightField(h));
  if (options.dealias) dealias(G);
  return interface_lhs(phases, u, pi, h) - G;
}

InterfaceResiduals interface_residuals(const PhasePair& phases, const StateZ& z, const NonlinearOptions& options) {
  const StripGrid& g = z.grid;
  const int vert = g.dim - 1;
  const std::vector<SurfaceField> dh = time_derivative(z.h, z.time);
  const int nodes = z.time.nodes();
  std::vector<InterfaceResiduals> per(nodes);
  parallel_for(nodes - 1, [&](int q) {
    const int n = q + 1;
    const SurfaceField R = interface_row_residual(phases, z.u[n], z.pi[n], z.h[n], options);
    SurfaceField gh = eval_Gh(z.u[n], HeightField(z.h[n]));
    if (options.dealias) dealias(gh);
    InterfaceResiduals r;
    for (int col = 0; col < g.columns(); ++col) {
      for (int j = 0; j < vert; ++j) r.tangential = std::max(r.tangential, std::abs(R(j, col)));
      r.normal = std::max(r.normal, std::abs(R(vert, col)));
    }
    const SurfaceField un = z.u[n].extract(vert).trace(Phase::lower);
    r.kinematic = (dh[n] - un - gh).max_abs();
    per[n] = r;
  });
  InterfaceResiduals out;
  for (const auto& r : per) {
    out.tangential = std::max(out.tangential, r.tangential);
    out.normal = std::max(out.normal, r.normal);
    out.kinematic = std::max(out.kinematic, r.kinematic);
  }
  return out;
}

PicardResult picard_solve(const PhasePair& phases, const TwoPhaseField& u0, const SurfaceField& h0, const TimeGrid& time,
                          const SolveConfig& config, const NormConfig& norms) {
  config.validate();
  phases.validate();
  const StripGrid& g = u0.grid();
  PicardResult res{StateZ::zero(g, time), {}, check_compatibility(phases, u0, h0, config.compat_tol)};
  ConvergenceReport& rep = res.report;
  rep.initial_norm = norm_I(u0, h0, norms).total();
  if (!res.compatibility.pass()) {
    rep.status = SolveStatus::incompatible;
    std::ostringstream os;
    os << "initial data incompatible: tangential " << res.compatibility.tangential_max << ", divergence "
       << res.compatibility.divergence << ", velocity jump " << res.compatibility.velocity_jump;
    rep.message = os.str();
    return res;
  }

  const LinearParams lp = LinearParams::from(phases);
  const LinearSolveOptions lin{false, config.compat_tol};
  const NonlinearOptions nl{config.dealias};

  StateZ z = solve_linear_evolution(lp, DataF::zero(g, time), u0, h0, lin);
  double z_norm = norm_E_spaces(z, norms).total();
  double last_n_norm = 0.0;
  int growth = 0;
  rep.status = SolveStatus::max_iter;
  for (int m = 0; m < config.max_iter; ++m) {
    DataF Nz;
    try {
      Nz = eval_N(phases, z, nl);
    } catch (const DomainError& e) {
      rep.status = SolveStatus::diverged;
      rep.message = std::string("nonlinear map left its domain: ") + e.what();
      break;
    }
    last_n_norm = norm_F_spaces(Nz, norms).total();
    StateZ next = solve_linear_evolution(lp, Nz, u0, h0, lin);
    const double next_norm = norm_E_spaces(next, norms).total();
    const double diff = norm_E_spaces(next - z, norms).total();
    IterationRecord rec;
    rec.residual = relative_or_zero(diff, next_norm);
    rec.z_norm = next_norm;
    rec.n_norm = last_n_norm;
    if (!rep.iterations.empty()) {
      const double prev = rep.iterations.back().residual;
      rec.ratio = prev > 0.0 ? rec.residual / prev : 0.0;
      growth = rec.residual > prev ? growth + 1 : 0;
    }
    rep.iterations.push_back(rec);
    z = std::move(next);
    z_norm = next_norm;
    if (!std::isfinite(next_norm) || next_norm > config.delta0_guard) {
      rep.status = SolveStatus::diverged;
      std::ostringstream os;
      os << "iterate norm " << next_norm << " left the ball of radius " << config.delta0_guard;
      rep.message = os.str();
      break;
    }
    if (rec.residual < config.tol) {
      rep.status = SolveStatus::converged;
      break;
    }
    if (growth >= 3) {
      rep.status = SolveStatus::diverged;
      rep.message = "residual grew for 3 consecutive iterations";
      break;
    }
  }
  const double data_norm = last_n_norm + rep.initial_norm;
  rep.linv_estimate = data_norm > 0.0 ? z_norm / data_norm : 0.0;
  rep.interface = interface_residuals(phases, z, nl);
  rep.interface_tolerance = 10.0 * config.tol * (1.0 + z_norm);
  rep.interface_consistent = rep.interface.max() <= rep.interface_tolerance;
  if (rep.status == SolveStatus::max_iter && rep.message.empty()) rep.message = "iteration limit reached";
  res.z = std::move(z);
  return res;
}

SmallnessProbe smallness_probe(const PhasePair& phases, const StateZ& direction, const std::vector<double>& epsilons,
                               const NormConfig& norms, const NonlinearOptions& options) {
  SmallnessProbe out;
  out.epsilons = epsilons;
  for (double eps : epsilons) {
    const DataF Nz = eval_N(phases, eps * StateZ(direction), options);
    out.norms.push_back(norm_F_spaces(Nz, norms).total());
  }
  const std::size_t n = epsilons.size();
  bool any_zero = n < 2;
  for (double v : out.norms)
    if (!(v > 0.0)) any_zero = true;
  if (any_zero) {
    out.degenerate = true;
    return out;
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(epsilons[i]);
    const double y = std::log(out.norms[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) {
    out.degenerate = true;
    return out;
  }
  out.slope = (n * sxy - sx * sy) / denom;
  return out;
}

StateZ random_direction(const StripGrid& g, const TimeGrid& t, std::uint64_t seed, int kmax) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  struct Term {
    int k0, k1;
    double c, s, tilt, slope, curve;
  };
  auto draw = [&](int count) {
    std::vector<Term> terms;
    for (int q = 0; q < count; ++q) {
      Term term{};
      term.k0 = 1 + static_cast<int>(rng() % kmax);
      term.k1 = g.dim == 3 ? static_cast<int>(rng() % (kmax + 1)) : 0;
      term.c = uni(rng);
      term.s = uni(rng);
      term.tilt = uni(rng);
      term.slope = uni(rng);
      term.curve = uni(rng);
      terms.push_back(term);
    }
    return terms;
  };
  auto horizontal = [&](const Term& term, int col) {
    double arg = term.k0 * g.column_coord(col, 0);
    if (g.dim == 3) arg += term.k1 * g.column_coord(col, 1);
    arg /= g.L_h;
    return term.c * std::cos(arg) + term.s * std::sin(arg);
  };
  auto time_factor = [&](const Term& term, double tau) {
    const double x = tau / t.a;
    return 1.0 + 0.5 * term.slope * x + 0.25 * term.curve * x * x;
  };

  StateZ z = StateZ::zero(g, t);
  std::vector<std::vector<Term>> u_terms;
  for (int c = 0; c < g.dim; ++c) u_terms.push_back(draw(2));
  const auto theta_terms = draw(2);
  const auto pi_terms = draw(2);
  const auto h_terms = draw(2);
  for (int n = 0; n < t.nodes(); ++n) {
    const double tau = t.t(n);
    for (Phase p : kPhases)
      for (int i = 0; i < g.n_v; ++i) {
        const double s = g.xi(p, i) / g.L_v;
        const double bump = 1.0 - s * s;
        for (int col = 0; col < g.columns(); ++col) {
          for (int c = 0; c < g.dim; ++c)
            for (const auto& term : u_terms[c])
              z.u[n](p, c, i, col) += horizontal(term, col) * bump * (1.0 + 0.5 * term.tilt * s) * time_factor(term, tau);
          for (const auto& term : theta_terms)
            z.theta[n](p, 0, i, col) += horizontal(term, col) * bump * (1.0 + 0.5 * term.tilt * s) * time_factor(term, tau);
        }
      }
    for (int col = 0; col < g.columns(); ++col) {
      for (const auto& term : pi_terms) z.pi[n](0, col) += horizontal(term, col) * time_factor(term, tau);
      for (const auto& term : h_terms) z.h[n](0, col) += horizontal(term, col) * time_factor(term, tau);
    }
  }
  double h_abs = 0.0;
  for (const auto& h : z.h) h_abs = std::max(h_abs, h.max_abs());
  if (h_abs > 0.0)
    for (auto& h : z.h) h *= 0.1 * g.L_v / h_abs;
  return z;
}

std::vector<PhysicalSnapshot> pushforward_solution(const PhasePair& phases, const StateZ& z, double spacing) {
  std::vector<PhysicalSnapshot> out;
  out.reserve(z.h.size());
  for (std::size_t n = 0; n < z.h.size(); ++n) {
    PhysicalSnapshot snap;
    snap.t = z.time.t(static_cast<int>(n));
    snap.interface = HeightField(z.h[n]);
    snap.velocity = pushforward(z.u[n], snap.interface, spacing);
    snap.pressure = pushforward(z.theta[n], snap.interface, spacing);
    for (Phase p : kPhases) {
      const double rg = phases.rho(p) * phases.gamma_a;
      for (int col = 0; col < z.grid.columns(); ++col) {
        auto& c = snap.pressure.column(p, col);
        for (std::size_t i = 0; i < c.height.size(); ++i) c.values[i] -= rg * c.height[i];
      }
    }
    out.push_back(std::move(snap));
  }
  return out;
}

}  // namespace flatflow
