#ifndef TRIDOM_IONIC_HPP
#define TRIDOM_IONIC_HPP

#include <map>
#include <string>
#include <vector>

#include "tridom/types.hpp"

namespace tridom {

/// FitzHugh-Nagumo-class membrane model and passive gap junction:
///   I_ion(v, w) = lambda_a v (v - a)(v - 1) + b_w w
///   H(v, w)     = eps0 (kappa v - w)
///   I_gap(s)    = g_gap s
struct IonicParams {
  Real a = 0.1;
  Real lambda_a = 1.0;
  Real b_w = 1.0;
  Real eps0 = 0.1;
  Real kappa = 1.0;
  Real g_gap = 1.0;
  static constexpr int growth_exponent = 4;  // r in the cubic growth bounds

  void validate() const;
};

struct IonicCurrents {
  Real total = 0;  // i_a + i_b
  Real cubic = 0;  // lambda_a v (v - a)(v - 1)
  Real recovery = 0;  // b_w w
};

IonicCurrents eval_ionic(Real v, Real w, const IonicParams& p);

inline Real eval_gap(Real s, const IonicParams& p) { return p.g_gap * s; }

/// Exact exponential update of the linear gating ODE w' = eps0 (kappa v - w)
/// with v frozen over the step.
Real step_gating(Real w, Real v_frozen, Real dt, const IonicParams& p);

struct AssumptionCheck {
  std::string name;
  bool passed = false;
  std::map<std::string, Real> fitted;
  std::string detail;
  // worst sample (v, w) and the violation magnitude when failing
  Real witness_v = 0;
  Real witness_w = 0;
  Real violation = 0;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;
  bool all_passed() const;
  std::string to_text() const;
};

/// Samples the structural membrane-model inequalities on [v_lo, v_hi]:
/// cubic growth sandwich (with the lower growth bound checked outside the
/// root region |v| >= 2), monotonicity of the shifted cubic, the two-point
/// lower bound with fitted constant, and feasibility of the recovery/gating
/// coupling inequality.
AssumptionReport check_assumptions(const IonicParams& p, Real v_lo, Real v_hi, int n_samples);

}  // namespace tridom

#endif
