/// @file constitutive.hpp
/// @brief Shear-dependent viscosity laws and the quasilinear stress operator.
#pragma once

#include "flatflow/grid.hpp"

#include <memory>
#include <string>
#include <vector>

namespace flatflow {

enum class ViscosityFamily { power_sum, power_shift, newtonian, table };

std::string to_string(ViscosityFamily f);
/// Throws ConfigError for unknown names.
ViscosityFamily viscosity_family_from_string(const std::string& name);

struct ViscosityValue {
  double mu = 0.0;
  double dmu = 0.0;
};

/// mu(s) and its derivative as functions of s = |D|^2 for one phase.
class ViscosityModel {
 public:
  /// Newtonian with nu = 1.
  ViscosityModel() = default;

  /// nu * (1 + s^((d-2)/2)), admitted for d in {2, 4, 6} or d >= 8.
  static ViscosityModel power_sum(double nu, double d);
  /// nu * (1 + s)^((d-2)/2), admitted for d >= 1.
  static ViscosityModel power_shift(double nu, double d);
  static ViscosityModel newtonian(double nu);
  /// Cubic spline through (s_i, mu_i). Smoothness is the caller's business.
  static ViscosityModel table(std::vector<double> s, std::vector<double> mu);

  /// Rules violated by a (family, nu, d) combination; empty when admissible.
  static std::vector<std::string> admission_errors(ViscosityFamily family, double nu, double d);

  ViscosityFamily family() const { return family_; }
  double nu() const { return nu_; }
  double d() const { return d_; }

  /// Throws DomainError for s < 0 or s beyond a table.
  ViscosityValue eval(double s) const;
  double mu(double s) const { return eval(s).mu; }
  double dmu(double s) const { return eval(s).dmu; }
  double mu0() const { return eval(0.0).mu; }

  /// True when mu is constant, so the stress is linear in u.
  bool is_constant() const;

 private:
  struct Spline;

  ViscosityFamily family_ = ViscosityFamily::newtonian;
  double nu_ = 1.0;
  double d_ = 2.0;
  std::shared_ptr<const Spline> spline_;
};

ViscosityValue viscosity_eval(const ViscosityModel& model, double s);

/// Densities, viscosities, gravity and surface tension of the two phases.
struct PhasePair {
  double rho1 = 1.0;
  double rho2 = 1.0;
  ViscosityModel model1;
  ViscosityModel model2;
  double gamma_a = 0.0;
  double sigma = 1.0;

  /// Throws ConfigError listing every violated rule.
  void validate() const;

  double rho(Phase p) const { return p == Phase::lower ? rho1 : rho2; }
  const ViscosityModel& model(Phase p) const { return p == Phase::lower ? model1 : model2; }
  double mu0(Phase p) const { return model(p).mu0(); }
  double jump_rho() const { return rho2 - rho1; }
};

/// Coefficients A_i^{jkl}(D) = (2 mu'(|D|^2) D_ij D_kl + mu(|D|^2) delta_ik delta_jl) / 2
/// for a symmetric dim x dim tensor D (row-major), stored at ((i*dim + j)*dim + k)*dim + l.
std::vector<double> a_tensor(const ViscosityModel& model, std::span<const double> D, int dim);

/// Second derivatives H[(j*dim + k)*dim + l] = D_j D_k v_l.
TwoPhaseField hessian_field(const TwoPhaseField& v);

/// out_i = -sum_{jkl} C_i^{jkl} (H_{jk,l} + H_{jl,k}) per phase, where C is
/// A(D) or, with `subtract_zero`, A(D) - A(0). D is a rank-2 field.
TwoPhaseField contract_a_tensor(const PhasePair& phases, const TwoPhaseField& D, const TwoPhaseField& hess,
                                bool subtract_zero = false);

/// A(w)v with coefficients frozen at D(w).
TwoPhaseField stress_operator(const PhasePair& phases, const TwoPhaseField& w, const TwoPhaseField& v);
/// A(u)u, which equals -div(mu(|D(u)|^2) D(u)).
TwoPhaseField stress_divergence(const PhasePair& phases, const TwoPhaseField& u);
/// A(0)v.
TwoPhaseField frozen_stress_operator(const PhasePair& phases, const TwoPhaseField& v);

/// Pointwise viscosity field mu(s) per phase for a scalar field s.
TwoPhaseField viscosity_field(const PhasePair& phases, const TwoPhaseField& s);

}  // namespace flatflow
