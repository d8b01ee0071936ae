#include "flatflow/nonlinear.hpp"

#include "flatflow/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace flatflow {

namespace {

TwoPhaseField scale_phases(TwoPhaseField f, double lower, double upper) {
  for (double& v : f.block(Phase::lower)) v *= lower;
  for (double& v : f.block(Phase::upper)) v *= upper;
  return f;
}

TwoPhaseField times_column(const TwoPhaseField& f, const SurfaceField& s, int c = 0) {
  return scale_by(f, extend_vertically(s, c));
}

}  // namespace

// ---------------------------------------------------------------------------
// StateZ / DataF arithmetic
// ---------------------------------------------------------------------------

StateZ StateZ::zero(const StripGrid& g, const TimeGrid& t) {
  StateZ z{g, t, {}, {}, {}, {}};
  const int n = t.nodes();
  z.u.assign(n, TwoPhaseField(g, g.dim));
  z.theta.assign(n, TwoPhaseField(g, 1));
  z.pi.assign(n, SurfaceField(g, 1));
  z.h.assign(n, SurfaceField(g, 1));
  return z;
}

StateZ& StateZ::operator+=(const StateZ& o) {
  for (std::size_t n = 0; n < u.size(); ++n) {
    u[n] += o.u[n];
    theta[n] += o.theta[n];
    pi[n] += o.pi[n];
    h[n] += o.h[n];
  }
  return *this;
}

StateZ& StateZ::operator-=(const StateZ& o) {
  for (std::size_t n = 0; n < u.size(); ++n) {
    u[n] -= o.u[n];
    theta[n] -= o.theta[n];
    pi[n] -= o.pi[n];
    h[n] -= o.h[n];
  }
  return *this;
}

StateZ& StateZ::operator*=(double s) {
  for (std::size_t n = 0; n < u.size(); ++n) {
    u[n] *= s;
    theta[n] *= s;
    pi[n] *= s;
    h[n] *= s;
  }
  return *this;
}

double StateZ::max_abs() const {
  double m = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n)
    m = std::max({m, u[n].max_abs(), theta[n].max_abs(), pi[n].max_abs(), h[n].max_abs()});
  return m;
}

StateZ operator+(StateZ a, const StateZ& b) { return a += b; }
StateZ operator-(StateZ a, const StateZ& b) { return a -= b; }
StateZ operator*(double s, StateZ a) { return a *= s; }

DataF DataF::zero(const StripGrid& g, const TimeGrid& t) {
  DataF d{g, t, {}, {}, {}, {}, {}};
  const int n = t.nodes();
  d.F.assign(n, TwoPhaseField(g, g.dim));
  d.f_d.assign(n, TwoPhaseField(g, 1));
  d.f_d_potential.assign(n, TwoPhaseField(g, 1));
  d.G.assign(n, SurfaceField(g, g.dim));
  d.g_h.assign(n, SurfaceField(g, 1));
  return d;
}

DataF& DataF::operator+=(const DataF& o) {
  for (std::size_t n = 0; n < F.size(); ++n) {
    F[n] += o.F[n];
    f_d[n] += o.f_d[n];
    f_d_potential[n] += o.f_d_potential[n];
    G[n] += o.G[n];
    g_h[n] += o.g_h[n];
  }
  return *this;
}

DataF& DataF::operator*=(double s) {
  for (std::size_t n = 0; n < F.size(); ++n) {
    F[n] *= s;
    f_d[n] *= s;
    f_d_potential[n] *= s;
    G[n] *= s;
    g_h[n] *= s;
  }
  return *this;
}

double DataF::max_abs() const {
  double m = 0.0;
  for (std::size_t n = 0; n < F.size(); ++n)
    m = std::max({m, F[n].max_abs(), f_d[n].max_abs(), G[n].max_abs(), g_h[n].max_abs()});
  return m;
}

DataF operator+(DataF a, const DataF& b) { return a += b; }
DataF operator*(double s, DataF a) { return a *= s; }

std::vector<SurfaceField> time_derivative(const std::vector<SurfaceField>& h, const TimeGrid& t) {
  const double dt = t.dt();
  std::vector<SurfaceField> out;
  out.reserve(h.size());
  for (std::size_t n = 0; n < h.size(); ++n) {
    if (h.size() == 1) {
      out.emplace_back(h[0].grid(), h[0].components());
      continue;
    }
    const std::size_t a = n == 0 ? 0 : n - 1;
    const std::size_t b = n == 0 ? 1 : n;
    out.push_back((1.0 / dt) * (h[b] - h[a]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bulk operators
// ---------------------------------------------------------------------------

TwoPhaseField eval_A(const PhasePair& phases, const TwoPhaseField& u, const HeightField& h) {
  return eval_A(phases, u, geometry_jet(h));
}

TwoPhaseField eval_A(const PhasePair& phases, const TwoPhaseField& u, const GeometryJet& jet) {
  const StripGrid& g = u.grid();
  const int N = g.dim;
  if (phases.model1.is_constant() && phases.model2.is_constant()) return TwoPhaseField(g, N);
  const TwoPhaseField E = transformed_deformation(u, jet);
  TwoPhaseField hess = hessian_field(u);
  for (int j = 0; j < N; ++j)
    for (int k = j; k < N; ++k) {
      const TwoPhaseField corr = f_correction(jet, u, j, k);
      for (int l = 0; l < N; ++l) {
        TwoPhaseField cl = corr.extract(l);
        TwoPhaseField hjk = hess.extract((j * N + k) * N + l) - cl;
        hess.assign((j * N + k) * N + l, hjk);
        if (k != j) hess.assign((k * N + j) * N + l, hjk);
      }
    }
  TwoPhaseField out = contract_a_tensor(phases, E, hess, true);
  out *= -1.0;
  return out;
}

TwoPhaseField eval_F(const PhasePair& phases, const TwoPhaseField& u, const TwoPhaseField& theta,
                     const HeightField& h, const SurfaceField& dh_dtau) {
  const StripGrid& g = u.grid();
  const int N = g.dim;
  const int vert = N - 1;
  const GeometryJet jet = geometry_jet(h);
  const TwoPhaseField dn_u = d_vertical(u);

  // rho * { (d_tau h) D_N u - (u . grad) u + (u' . grad' h) D_N u }
  TwoPhaseField conv = times_column(dn_u, dh_dtau);
  for (int j = 0; j < N; ++j) conv -= scale_by(derivative(u, j), u.extract(j));
  TwoPhaseField tangential_flux(g, 1);
  for (int j = 0; j < vert; ++j) tangential_flux += times_column(u.extract(j), jet.grad, j);
  conv += scale_by(dn_u, tangential_flux);
  TwoPhaseField out = scale_phases(std::move(conv), phases.rho1, phases.rho2);

  // -mu(0) sum_j F_jj(h) u
  TwoPhaseField lap_corr(g, N);
  for (int j = 0; j < N; ++j) lap_corr += f_correction(jet, u, j, j);
  out -= scale_phases(std::move(lap_corr), phases.mu0(Phase::lower), phases.mu0(Phase::upper));

  // (D_i h) D_N theta
  const TwoPhaseField dn_theta = d_vertical(theta);
  for (int i = 0; i < vert; ++i) {
    TwoPhaseField comp = out.extract(i);
    comp += times_column(dn_theta, jet.grad, i);
    out.assign(i, comp);
  }

  out += eval_A(phases, u, jet);
  return out;
}

DivergenceData eval_Fd(const TwoPhaseField& u, const HeightField& h) {
  const StripGrid& g = u.grid();
  const int vert = g.dim - 1;
  const GeometryJet jet = geometry_jet(h);
  DivergenceData out{TwoPhaseField(g, 1), TwoPhaseField(g, 1), TwoPhaseField(g, 1)};
  const TwoPhaseField dn_u = d_vertical(u);
  for (int j = 0; j < vert; ++j) {
    out.value += times_column(dn_u.extract(j), jet.grad, j);
    out.potential += times_column(u.extract(j), jet.grad, j);
  }
  out.divergence_form = d_vertical(out.potential);
  return out;
}

// ---------------------------------------------------------------------------
// Interface operators
// ---------------------------------------------------------------------------

SurfaceField eval_B(const PhasePair& phases, const TwoPhaseField& u, const HeightField& h) {
  return eval_B(phases, u, geometry_jet(h));
}

SurfaceField eval_B(const PhasePair& phases, const TwoPhaseField& u, const GeometryJet& jet) {
  const StripGrid& g = u.grid();
  const int N = g.dim;
  const int vert = N - 1;
  const int cols = g.columns();

  // Traces of D_b u_a and |E|^2 from each side.
  std::vector<SurfaceField> grad_tr[2];
  SurfaceField e_sq_tr[2];
  const TwoPhaseField E = transformed_deformation(u, jet);
  std::vector<TwoPhaseField> grad;
  for (int a = 0; a < N; ++a) {
    const TwoPhaseField ua = u.extract(a);
    for (int b = 0; b < N; ++b) grad.push_back(derivative(ua, b));
  }
  for (Phase p : kPhases) {
    const int pi = phase_index(p);
    for (const auto& d : grad) grad_tr[pi].push_back(d.trace(p));
    e_sq_tr[pi] = frobenius_sq(E.trace(p));
  }

  SurfaceField out(g, N);
  for (int col = 0; col < cols; ++col) {
    double grad_sq = 0.0;
    for (int k = 0; k < vert; ++k) grad_sq += jet.dh(k, col) * jet.dh(k, col);
    std::array<double, 3> Bj_side[2]{};
    double BN_side[2] = {0.0, 0.0};
    for (Phase p : kPhases) {
      const int pi = phase_index(p);
      auto du = [&](int a, int b) { return grad_tr[pi][a * N + b](0, col); };
      const double mu = phases.model(p).mu(e_sq_tr[pi](0, col));
      const double mu0 = phases.mu0(p);
      for (int j = 0; j < vert; ++j) {
        double v = -mu * du(vert, vert) * jet.dh(j, col);
        v += (mu - mu0) * (du(j, vert) + du(vert, j));
        for (int k = 0; k < vert; ++k) {
          v -= mu * (du(j, k) + du(k, j)) * jet.dh(k, col);
          v += mu * (du(j, vert) * jet.dh(k, col) + du(k, vert) * jet.dh(j, col)) * jet.dh(k, col);
        }
        Bj_side[pi][j] = v;
      }
      double v = 2.0 * (mu - mu0) * du(vert, vert) + mu * du(vert, vert) * grad_sq;
      for (int k = 0; k < vert; ++k) v -= mu * (du(k, vert) + du(vert, k)) * jet.dh(k, col);
      BN_side[pi] = v;
    }
    for (int j = 0; j < vert; ++j) out(j, col) = Bj_side[1][j] - Bj_side[0][j];
    out(vert, col) = BN_side[1] - BN_side[0];
  }
  return out;
}

SurfaceField eval_G(const PhasePair& phases, const TwoPhaseField& u, const SurfaceField& pi, const HeightField& h) {
  const StripGrid& g = u.grid();
  const int N = g.dim;
  const int vert = N - 1;
  const GeometryJet jet = geometry_jet(h);
  const CurvatureSplit curv = curvature_split(jet);
  SurfaceField out = eval_B(phases, u, jet);
  const double jr = phases.jump_rho() * phases.gamma_a;
  for (int col = 0; col < g.columns(); ++col) {
    const double restoring = jr * h(col) + phases.sigma * curv.laplacian(0, col);
    for (int j = 0; j < vert; ++j) {
      const double hj = jet.dh(j, col);
      out(j, col) += phases.sigma * curv.correction(0, col) * hj - restoring * hj + pi(0, col) * hj;
    }
    out(vert, col) += -phases.sigma * curv.correction(0, col);
  }
  return out;
}

SurfaceField eval_Gh(const TwoPhaseField& u, const HeightField& h) {
  const StripGrid& g = u.grid();
  const int vert = g.dim - 1;
  const SurfaceField tr = u.trace_mean();
  SurfaceField out(g, 1);
  for (int j = 0; j < vert; ++j) out.axpy(-1.0, hadamard(tr.extract(j), d_horizontal(h.field(), j)));
  return out;
}

DataF eval_N(const PhasePair& phases, const StateZ& z, const NonlinearOptions& options) {
  DataF out = DataF::zero(z.grid, z.time);
  const std::vector<SurfaceField> dh = time_derivative(z.h, z.time);
  parallel_for(z.time.nodes(), [&](int n) {
    const HeightField h(z.h[n]);
    out.F[n] = eval_F(phases, z.u[n], z.theta[n], h, dh[n]);
    DivergenceData fd = eval_Fd(z.u[n], h);
    out.f_d[n] = std::move(fd.value);
    out.f_d_potential[n] = std::move(fd.potential);
    out.G[n] = eval_G(phases, z.u[n], z.pi[n], h);
    out.g_h[n] = eval_Gh(z.u[n], h);
    if (options.dealias) {
      dealias(out.F[n]);
      dealias(out.f_d[n]);
      dealias(out.f_d_potential[n]);
      dealias(out.G[n]);
      dealias(out.g_h[n]);
    }
  });
  return out;
}

}  // namespace flatflow
