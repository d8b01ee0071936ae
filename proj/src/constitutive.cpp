#include "flatflow/constitutive.hpp"

#include "flatflow/errors.hpp"
#include "flatflow/geometry.hpp"

#include <gsl/gsl_spline.h>

#include <cmath>
#include <sstream>

namespace flatflow {

std::string to_string(ViscosityFamily f) {
  switch (f) {
    case ViscosityFamily::power_sum: return "power-sum";
    case ViscosityFamily::power_shift: return "power-shift";
    case ViscosityFamily::newtonian: return "newtonian";
    case ViscosityFamily::table: return "table";
  }
  return "unknown";
}

ViscosityFamily viscosity_family_from_string(const std::string& name) {
  if (name == "power-sum") return ViscosityFamily::power_sum;
  if (name == "power-shift") return ViscosityFamily::power_shift;
  if (name == "newtonian") return ViscosityFamily::newtonian;
  if (name == "table") return ViscosityFamily::table;
  throw ConfigError("viscosity.family: unknown family '" + name + "' (power-sum, power-shift, newtonian, table)");
}

struct ViscosityModel::Spline {
  gsl_spline* spline = nullptr;
  double s_min = 0.0;
  double s_max = 0.0;

  Spline(const std::vector<double>& s, const std::vector<double>& mu) {
    spline = gsl_spline_alloc(gsl_interp_cspline, s.size());
    gsl_spline_init(spline, s.data(), mu.data(), s.size());
    s_min = s.front();
    s_max = s.back();
  }
  ~Spline() { gsl_spline_free(spline); }
  Spline(const Spline&) = delete;
  Spline& operator=(const Spline&) = delete;
};

std::vector<std::string> ViscosityModel::admission_errors(ViscosityFamily family, double nu, double d) {
  std::vector<std::string> errs;
  if (!(nu > 0.0)) errs.push_back("viscosity.nu must be > 0 (mu(0) > 0)");
  if (family == ViscosityFamily::power_sum) {
    const bool listed = d == 2.0 || d == 4.0 || d == 6.0 || d >= 8.0;
    if (!listed) {
      std::ostringstream os;
      os << "viscosity.d = " << d << " not admitted for power-sum (requires d in {2, 4, 6} or d >= 8)";
      errs.push_back(os.str());
    }
  } else if (family == ViscosityFamily::power_shift) {
    if (!(d >= 1.0)) {
      std::ostringstream os;
      os << "viscosity.d = " << d << " not admitted for power-shift (requires d >= 1)";
      errs.push_back(os.str());
    }
  }
  return errs;
}

ViscosityModel ViscosityModel::power_sum(double nu, double d) {
  if (auto errs = admission_errors(ViscosityFamily::power_sum, nu, d); !errs.empty()) throw ConfigError(errs);
  ViscosityModel m = newtonian(nu);
  m.family_ = ViscosityFamily::power_sum;
  m.d_ = d;
  return m;
}

ViscosityModel ViscosityModel::power_shift(double nu, double d) {
  if (auto errs = admission_errors(ViscosityFamily::power_shift, nu, d); !errs.empty()) throw ConfigError(errs);
  ViscosityModel m = newtonian(nu);
  m.family_ = ViscosityFamily::power_shift;
  m.d_ = d;
  return m;
}

ViscosityModel ViscosityModel::newtonian(double nu) {
  if (!(nu > 0.0)) throw ConfigError("viscosity.nu must be > 0 (mu(0) > 0)");
  ViscosityModel m;
  m.family_ = ViscosityFamily::newtonian;
  m.nu_ = nu;
  m.d_ = 2.0;
  return m;
}

ViscosityModel ViscosityModel::table(std::vector<double> s, std::vector<double> mu) {
  std::vector<std::string> errs;
  if (s.size() != mu.size()) errs.push_back("viscosity.table: s and mu must have equal length");
  if (s.size() < 3) errs.push_back("viscosity.table: at least 3 samples required");
  if (!s.empty() && s.front() != 0.0) errs.push_back("viscosity.table: first sample must be at s = 0");
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!(s[i] > s[i - 1])) {
      errs.push_back("viscosity.table: s must be strictly increasing");
      break;
    }
  if (!mu.empty() && !(mu.front() > 0.0)) errs.push_back("viscosity.table: mu(0) must be > 0");
  if (!errs.empty()) throw ConfigError(errs);
  ViscosityModel m;
  m.family_ = ViscosityFamily::table;
  m.nu_ = mu.front();
  m.d_ = 2.0;
  m.spline_ = std::make_shared<const Spline>(s, mu);
  return m;
}

ViscosityValue ViscosityModel::eval(double s) const {
  if (!(s >= 0.0)) {
    std::ostringstream os;
    os << "viscosity: shear argument s = " << s << " must be >= 0";
    throw DomainError(os.str());
  }
  const double e = 0.5 * (d_ - 2.0);
  switch (family_) {
    case ViscosityFamily::newtonian:
      return {nu_, 0.0};
    case ViscosityFamily::power_sum: {
      if (e == 0.0) return {2.0 * nu_, 0.0};
      return {nu_ * (1.0 + std::pow(s, e)), nu_ * e * std::pow(s, e - 1.0)};
    }
    case ViscosityFamily::power_shift: {
      if (e == 0.0) return {nu_, 0.0};
      const double base = std::pow(1.0 + s, e - 1.0);
      return {nu_ * base * (1.0 + s), nu_ * e * base};
    }
    case ViscosityFamily::table: {
      if (s > spline_->s_max) {
        std::ostringstream os;
        os << "viscosity table: s = " << s << " beyond last sample " << spline_->s_max;
        throw DomainError(os.str());
      }
      return {gsl_spline_eval(spline_->spline, s, nullptr), gsl_spline_eval_deriv(spline_->spline, s, nullptr)};
    }
  }
  return {nu_, 0.0};
}

bool ViscosityModel::is_constant() const {
  if (family_ == ViscosityFamily::newtonian) return true;
  if (family_ == ViscosityFamily::table) return false;
  return d_ == 2.0;
}

ViscosityValue viscosity_eval(const ViscosityModel& model, double s) { return model.eval(s); }

void PhasePair::validate() const {
  std::vector<std::string> errs;
  if (!(rho1 > 0.0)) errs.push_back("phase.1.rho must be > 0");
  if (!(rho2 > 0.0)) errs.push_back("phase.2.rho must be > 0");
  if (!(model1.mu0() > 0.0)) errs.push_back("phase.1 viscosity must satisfy mu(0) > 0");
  if (!(model2.mu0() > 0.0)) errs.push_back("phase.2 viscosity must satisfy mu(0) > 0");
  if (!(gamma_a >= 0.0)) errs.push_back("gamma_a must be >= 0");
  if (!(sigma > 0.0)) errs.push_back("sigma must be > 0");
  if (!errs.empty()) throw ConfigError(errs);
}

std::vector<double> a_tensor(const ViscosityModel& model, std::span<const double> D, int dim) {
  double s = 0.0;
  for (int a = 0; a < dim * dim; ++a) s += D[a] * D[a];
  const ViscosityValue v = model.eval(s);
  std::vector<double> A(static_cast<std::size_t>(dim) * dim * dim * dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < dim; ++k)
        for (int l = 0; l < dim; ++l) {
          double c = v.dmu * D[i * dim + j] * D[k * dim + l];
          if (i == k && j == l) c += 0.5 * v.mu;
          A[((i * dim + j) * dim + k) * dim + l] = c;
        }
  return A;
}

TwoPhaseField hessian_field(const TwoPhaseField& v) {
  const StripGrid& g = v.grid();
  const int N = g.dim;
  TwoPhaseField H(g, N * N * N);
  for (int j = 0; j < N; ++j)
    for (int k = j; k < N; ++k) {
      const TwoPhaseField d2 = second_derivative(v, j, k);
      for (int l = 0; l < N; ++l) {
        const TwoPhaseField comp = d2.extract(l);
        H.assign((j * N + k) * N + l, comp);
        if (k != j) H.assign((k * N + j) * N + l, comp);
      }
    }
  return H;
}

TwoPhaseField contract_a_tensor(const PhasePair& phases, const TwoPhaseField& D, const TwoPhaseField& hess,
                                bool subtract_zero) {
  const StripGrid& g = D.grid();
  const int N = g.dim;
  const std::size_t npts = D.component_size();
  TwoPhaseField out(g, N);
  std::vector<double> Dloc(N * N);
  std::vector<double> zero(N * N, 0.0);
  for (Phase p : kPhases) {
    const ViscosityModel& model = phases.model(p);
    const std::vector<double> A0 = a_tensor(model, zero, N);
    const auto& Db = D.block(p);
    const auto& Hb = hess.block(p);
    auto& ob = out.block(p);
    for (std::size_t pt = 0; pt < npts; ++pt) {
      for (int a = 0; a < N * N; ++a) Dloc[a] = Db[a * npts + pt];
      std::vector<double> A = a_tensor(model, Dloc, N);
      if (subtract_zero)
        for (std::size_t q = 0; q < A.size(); ++q) A[q] -= A0[q];
      for (int i = 0; i < N; ++i) {
        double acc = 0.0;
        for (int j = 0; j < N; ++j)
          for (int k = 0; k < N; ++k)
            for (int l = 0; l < N; ++l) {
              const double s = Hb[((j * N + k) * N + l) * npts + pt] + Hb[((j * N + l) * N + k) * npts + pt];
              acc += A[((i * N + j) * N + k) * N + l] * s;
            }
        ob[i * npts + pt] = -acc;
      }
    }
  }
  return out;
}

TwoPhaseField stress_operator(const PhasePair& phases, const TwoPhaseField& w, const TwoPhaseField& v) {
  return contract_a_tensor(phases, symmetric_gradient(w), hessian_field(v));
}

TwoPhaseField stress_divergence(const PhasePair& phases, const TwoPhaseField& u) {
  return stress_operator(phases, u, u);
}

TwoPhaseField frozen_stress_operator(const PhasePair& phases, const TwoPhaseField& v) {
  const StripGrid& g = v.grid();
  return contract_a_tensor(phases, TwoPhaseField(g, g.dim * g.dim), hessian_field(v));
}

TwoPhaseField viscosity_field(const PhasePair& phases, const TwoPhaseField& s) {
  TwoPhaseField out(s.grid(), 1);
  for (Phase p : kPhases) {
    const auto& sb = s.block(p);
    auto& ob = out.block(p);
    for (std::size_t i = 0; i < ob.size(); ++i) ob[i] = phases.model(p).mu(sb[i]);
  }
  return out;
}

}  // namespace flatflow
