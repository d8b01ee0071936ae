#include "flatflow/stokes.hpp"

#include "flatflow/errors.hpp"
#include "flatflow/parallel.hpp"

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace flatflow {

LinearParams LinearParams::from(const PhasePair& phases) {
  return {phases.mu0(Phase::lower), phases.mu0(Phase::upper), phases.rho1, phases.rho2, phases.sigma, phases.gamma_a};
}

void LinearParams::validate() const {
  std::vector<std::string> errs;
  if (!(nu1 > 0.0)) errs.push_back("nu1 must be > 0");
  if (!(nu2 > 0.0)) errs.push_back("nu2 must be > 0");
  if (!(rho1 > 0.0)) errs.push_back("rho1 must be > 0");
  if (!(rho2 > 0.0)) errs.push_back("rho2 must be > 0");
  if (!(sigma > 0.0)) errs.push_back("sigma must be > 0");
  if (!(gamma_a >= 0.0)) errs.push_back("gamma_a must be >= 0");
  if (!errs.empty()) throw ConfigError(errs);
}

// ---------------------------------------------------------------------------
// WavenumberBlock
// ---------------------------------------------------------------------------

WavenumberBlock::WavenumberBlock(const StripGrid& g, int mode, double dt, const LinearParams& params)
    : grid_(g), mode_(mode), dt_(dt), params_(params) {
  const int N = g.dim;
  const int block = (g.n_v - 1) * (N + 1) + N;
  h_index_ = block;
  upper_base_ = block + 1;
  size_ = 2 * block + 1;
  assemble();
  factorize();
}

int WavenumberBlock::velocity_index(Phase p, int node, int comp) const {
  return (p == Phase::lower ? 0 : upper_base_) + node * (grid_.dim + 1) + comp;
}

int WavenumberBlock::cell_index(Phase p, int cell) const {
  return (p == Phase::lower ? 0 : upper_base_) + cell * (grid_.dim + 1) + grid_.dim;
}

void WavenumberBlock::assemble() {
  const StripGrid& g = grid_;
  const int N = g.dim;
  const int vert = N - 1;
  const int n = g.n_v;
  const double dz = g.dz();
  const cplx I(0.0, 1.0);
  std::vector<double> k(vert);
  for (int j = 0; j < vert; ++j) k[j] = g.wavenumber(mode_, j);
  const double ksq = g.wavenumber_sq(mode_);

  for (Phase p : kPhases) {
    const double nu = params_.nu(p);
    const double rho = params_.rho(p);
    for (int i = 0; i < n; ++i) {
      const bool far = (p == Phase::lower && i == 0) || (p == Phase::upper && i == n - 1);
      const bool iface = i == g.interface_node(p);
      if (far) {
        for (int c = 0; c < N; ++c) add(velocity_index(p, i, c), velocity_index(p, i, c), 1.0);
      } else if (iface && p == Phase::lower) {
        for (int c = 0; c < N; ++c) {
          const int r = velocity_index(p, i, c);
          add(r, r, 1.0);
          add(r, velocity_index(Phase::upper, 0, c), -1.0);
        }
      } else if (iface) {
        // Stress balance rows, one-sided vertical derivatives on each side.
        const double nu_u = params_.nu2;
        const double nu_l = params_.nu1;
        const double a = 1.0 / (2.0 * dz);
        auto dn_upper = [&](int row, int comp, double w) {
          add(row, velocity_index(Phase::upper, 0, comp), -3.0 * a * w);
          add(row, velocity_index(Phase::upper, 1, comp), 4.0 * a * w);
          add(row, velocity_index(Phase::upper, 2, comp), -1.0 * a * w);
        };
        auto dn_lower = [&](int row, int comp, double w) {
          add(row, velocity_index(Phase::lower, n - 1, comp), 3.0 * a * w);
          add(row, velocity_index(Phase::lower, n - 2, comp), -4.0 * a * w);
          add(row, velocity_index(Phase::lower, n - 3, comp), 1.0 * a * w);
        };
        for (int j = 0; j < vert; ++j) {
          const int r = velocity_index(Phase::upper, 0, j);
          dn_upper(r, j, -nu_u);
          add(r, velocity_index(Phase::upper, 0, vert), -nu_u * I * k[j]);
          dn_lower(r, j, nu_l);
          add(r, velocity_index(Phase::lower, n - 1, vert), nu_l * I * k[j]);
        }
        const int r = velocity_index(Phase::upper, 0, vert);
        add(r, cell_index(Phase::upper, 0), 1.5);
        add(r, cell_index(Phase::upper, 1), -0.5);
        add(r, cell_index(Phase::lower, n - 2), -1.5);
        add(r, cell_index(Phase::lower, n - 3), 0.5);
        dn_upper(r, vert, -2.0 * nu_u);
        dn_lower(r, vert, 2.0 * nu_l);
        add(r, h_index_, -(params_.rho2 - params_.rho1) * params_.gamma_a + params_.sigma * ksq);
      } else {
        const double diag = rho / dt_ + nu * ksq + 2.0 * nu / (dz * dz);
        for (int c = 0; c < N; ++c) {
          const int r = velocity_index(p, i, c);
          add(r, r, diag);
          add(r, velocity_index(p, i - 1, c), -nu / (dz * dz));
          add(r, velocity_index(p, i + 1, c), -nu / (dz * dz));
          if (c < vert) {
            add(r, cell_index(p, i - 1), 0.5 * I * k[c]);
            add(r, cell_index(p, i), 0.5 * I * k[c]);
          } else {
            add(r, cell_index(p, i), 1.0 / dz);
            add(r, cell_index(p, i - 1), -1.0 / dz);
          }
        }
      }
    }
    for (int c = 0; c < n - 1; ++c) {
      const int r = cell_index(p, c);
      if (p == Phase::upper && c == n - 2 && mode_ == 0) {
        add(r, cell_index(p, n - 2), 1.5);
        add(r, cell_index(p, n - 3), -0.5);
        continue;
      }
      for (int j = 0; j < vert; ++j) {
        add(r, velocity_index(p, c, j), 0.5 * I * k[j]);
        add(r, velocity_index(p, c + 1, j), 0.5 * I * k[j]);
      }
      add(r, velocity_index(p, c, vert), -1.0 / dz);
      add(r, velocity_index(p, c + 1, vert), 1.0 / dz);
    }
  }
  add(h_index_, h_index_, 1.0 / dt_);
  add(h_index_, velocity_index(Phase::lower, n - 1, vert), -1.0);
}

void WavenumberBlock::factorize() {
  kl_ = 0;
  ku_ = 0;
  for (const Entry& e : entries_) {
    kl_ = std::max(kl_, e.row - e.col);
    ku_ = std::max(ku_, e.col - e.row);
  }
  const int ldab = 2 * kl_ + ku_ + 1;
  band_.assign(static_cast<std::size_t>(ldab) * size_, cplx(0.0));
  for (const Entry& e : entries_) band_[(kl_ + ku_ + e.row - e.col) + static_cast<std::size_t>(e.col) * ldab] += e.value;
  pivots_.assign(size_, 0);
  const lapack_int info = LAPACKE_zgbtrf(LAPACK_COL_MAJOR, size_, size_, kl_, ku_, band_.data(), ldab, pivots_.data());
  if (info != 0) {
    std::ostringstream os;
    os << "singular linear block (info " << info << ") at wavenumber |k|^2 = " << grid_.wavenumber_sq(mode_)
       << " (mode " << mode_ << "), dt = " << dt_;
    throw ParameterError(os.str());
  }
}

std::vector<cplx> WavenumberBlock::apply(std::span<const cplx> x) const {
  std::vector<cplx> y(size_, cplx(0.0));
  for (const Entry& e : entries_) y[e.row] += e.value * x[e.col];
  return y;
}

std::vector<cplx> WavenumberBlock::solve(std::vector<cplx> rhs) const {
  const int ldab = 2 * kl_ + ku_ + 1;
  const lapack_int info = LAPACKE_zgbtrs(LAPACK_COL_MAJOR, 'N', size_, kl_, ku_, 1, band_.data(), ldab,
                                         pivots_.data(), rhs.data(), size_);
  if (info != 0) throw ParameterError("banded solve failed");
  return rhs;
}

std::vector<cplx> WavenumberBlock::rhs(const ModeData& data, const ModeState& prev) const {
  const StripGrid& g = grid_;
  const int N = g.dim;
  const int n = g.n_v;
  std::vector<cplx> b(size_, cplx(0.0));
  for (Phase p : kPhases) {
    const int pi = phase_index(p);
    const double rho = params_.rho(p);
    for (int i = 1; i < n - 1; ++i)
      for (int c = 0; c < N; ++c)
        b[velocity_index(p, i, c)] = data.F[pi][c * n + i] + (rho / dt_) * prev.u[pi][c * n + i];
    for (int c = 0; c < n - 1; ++c) {
      if (p == Phase::upper && c == n - 2 && mode_ == 0) continue;
      b[cell_index(p, c)] = 0.5 * (data.f_d[pi][c] + data.f_d[pi][c + 1]);
    }
  }
  // The lower interface rows hold velocity continuity (zero data); the upper
  // interface rows hold the stress balance.
  for (int c = 0; c < N; ++c) b[velocity_index(Phase::lower, n - 1, c)] = 0.0;
  for (int c = 0; c < N; ++c) b[velocity_index(Phase::upper, 0, c)] = data.G[c];
  b[h_index_] = data.g_h + prev.h / dt_;
  return b;
}

ModeState WavenumberBlock::zero_state() const {
  const int n = grid_.n_v;
  ModeState s;
  for (int pi = 0; pi < 2; ++pi) {
    s.u[pi].assign(static_cast<std::size_t>(grid_.dim) * n, cplx(0.0));
    s.theta[pi].assign(n - 1, cplx(0.0));
  }
  return s;
}

std::vector<cplx> WavenumberBlock::pack(const ModeState& s) const {
  const int n = grid_.n_v;
  std::vector<cplx> x(size_, cplx(0.0));
  for (Phase p : kPhases) {
    const int pi = phase_index(p);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < grid_.dim; ++c) x[velocity_index(p, i, c)] = s.u[pi][c * n + i];
    for (int c = 0; c < n - 1; ++c) x[cell_index(p, c)] = s.theta[pi][c];
  }
  x[h_index_] = s.h;
  return x;
}

ModeState WavenumberBlock::unpack(std::span<const cplx> x) const {
  const int n = grid_.n_v;
  ModeState s = zero_state();
  for (Phase p : kPhases) {
    const int pi = phase_index(p);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < grid_.dim; ++c) s.u[pi][c * n + i] = x[velocity_index(p, i, c)];
    for (int c = 0; c < n - 1; ++c) s.theta[pi][c] = x[cell_index(p, c)];
  }
  s.h = x[h_index_];
  return s;
}

ModeState step(const WavenumberBlock& block, const ModeState& prev, const ModeData& data_next) {
  return block.unpack(block.solve(block.rhs(data_next, prev)));
}

std::vector<cplx> cells_to_nodes(std::span<const cplx> cells) {
  const std::size_t nc = cells.size();
  std::vector<cplx> nodes(nc + 1);
  nodes[0] = 1.5 * cells[0] - 0.5 * cells[1];
  for (std::size_t i = 1; i < nc; ++i) nodes[i] = 0.5 * (cells[i - 1] + cells[i]);
  nodes[nc] = 1.5 * cells[nc - 1] - 0.5 * cells[nc - 2];
  return nodes;
}

// ---------------------------------------------------------------------------
// Evolution
// ---------------------------------------------------------------------------

double divergence_compatibility(const TwoPhaseField& u0, const TwoPhaseField& f_d0) {
  const StripGrid& g = u0.grid();
  TwoPhaseField div(g, 1);
  double scale = 0.0;
  for (int c = 0; c < g.dim; ++c) {
    const TwoPhaseField uc = u0.extract(c);
    for (int j = 0; j < g.dim; ++j) {
      TwoPhaseField d = derivative(uc, j);
      scale = std::max(scale, d.max_abs());
      if (j == c) div += d;
    }
  }
  const double resid = (div - f_d0).max_abs();
  if (resid == 0.0) return 0.0;
  return resid / std::max(scale, std::numeric_limits<double>::min());
}

StateZ solve_linear_evolution(const LinearParams& params, const DataF& data, const TwoPhaseField& u0,
                              const SurfaceField& h0, const LinearSolveOptions& options) {
  params.validate();
  const StripGrid& g = data.grid;
  const TimeGrid& t = data.time;
  const int N = g.dim;
  const int n = g.n_v;
  const int nodes = t.nodes();

  if (options.check_compatibility) {
    const double rel = divergence_compatibility(u0, data.f_d[0]);
    if (rel > options.compat_tol) {
      std::ostringstream os;
      os << "initial velocity violates div u0 = f_d(0): relative residual " << rel << " > " << options.compat_tol;
      throw IncompatibleData(os.str());
    }
    const double jump = u0.jump().max_abs();
    if (jump > options.compat_tol * std::max(u0.max_abs(), std::numeric_limits<double>::min())) {
      std::ostringstream os;
      os << "initial velocity has a jump across the interface: max |[u0]| = " << jump;
      throw IncompatibleData(os.str());
    }
  }

  std::vector<SpectralField> F_hat(nodes), fd_hat(nodes);
  std::vector<SurfaceSpectrum> G_hat(nodes), gh_hat(nodes);
  parallel_for(nodes - 1, [&](int q) {
    const int k = q + 1;
    F_hat[k] = horizontal_spectrum(data.F[k]);
    fd_hat[k] = horizontal_spectrum(data.f_d[k]);
    G_hat[k] = surface_spectrum(data.G[k]);
    gh_hat[k] = surface_spectrum(data.g_h[k]);
  });
  const SpectralField u0_hat = horizontal_spectrum(u0);
  const SurfaceSpectrum h0_hat = surface_spectrum(h0);

  std::vector<SpectralField> u_hat(nodes, SpectralField(g, N)), th_hat(nodes, SpectralField(g, 1));
  std::vector<SurfaceSpectrum> h_hat(nodes, SurfaceSpectrum(1, std::vector<cplx>(g.modes())));

  const double dt = t.dt();
  parallel_for(g.modes(), [&](int m) {
    if (g.is_nyquist(m)) return;
    const WavenumberBlock block(g, m, dt, params);
    ModeState state = block.zero_state();
    for (Phase p : kPhases)
      for (int c = 0; c < N; ++c)
        for (int i = 0; i < n; ++i) state.u[phase_index(p)][c * n + i] = u0_hat(p, c, i, m);
    state.h = h0_hat[0][m];
    ModeData md;
    for (int pi = 0; pi < 2; ++pi) {
      md.F[pi].resize(static_cast<std::size_t>(N) * n);
      md.f_d[pi].resize(n);
    }
    md.G.resize(N);
    for (int k = 1; k < nodes; ++k) {
      for (Phase p : kPhases) {
        const int pi = phase_index(p);
        for (int i = 0; i < n; ++i) {
          for (int c = 0; c < N; ++c) md.F[pi][c * n + i] = F_hat[k](p, c, i, m);
          md.f_d[pi][i] = fd_hat[k](p, 0, i, m);
        }
      }
      for (int c = 0; c < N; ++c) md.G[c] = G_hat[k][c][m];
      md.g_h = gh_hat[k][0][m];
      state = step(block, state, md);
      for (Phase p : kPhases) {
        const int pi = phase_index(p);
        for (int c = 0; c < N; ++c)
          for (int i = 0; i < n; ++i) u_hat[k](p, c, i, m) = state.u[pi][c * n + i];
        const std::vector<cplx> th = cells_to_nodes(state.theta[pi]);
        for (int i = 0; i < n; ++i) th_hat[k](p, 0, i, m) = th[i];
      }
      h_hat[k][0][m] = state.h;
    }
  });

  StateZ z = StateZ::zero(g, t);
  z.u[0] = u0;
  z.h[0] = h0;
  parallel_for(nodes - 1, [&](int q) {
    const int k = q + 1;
    z.u[k] = horizontal_inverse(u_hat[k]);
    z.theta[k] = horizontal_inverse(th_hat[k]);
    z.h[k] = surface_inverse(g, h_hat[k]);
    z.pi[k] = z.theta[k].jump();
  });
  if (nodes > 1) {
    z.theta[0] = z.theta[1];
    z.pi[0] = z.pi[1];
  }
  return z;
}

}  // namespace flatflow
