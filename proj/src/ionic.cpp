#include "tridom/ionic.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace tridom {

void IonicParams::validate() const {
  std::ostringstream msg;
  if (!(a > 0.0 && a < 1.0)) msg << "ionic.a must lie in (0,1); ";
  if (lambda_a < 0.0) msg << "ionic.lambda_a must be >= 0; ";
  if (!(eps0 > 0.0)) msg << "ionic.eps0 must be > 0; ";
  if (g_gap < 0.0) msg << "ionic.g_gap must be >= 0; ";
  const std::string text = msg.str();
  if (!text.empty()) throw ConfigError("invalid ionic parameters: " + text);
}

IonicCurrents eval_ionic(Real v, Real w, const IonicParams& p) {
  IonicCurrents c;
  c.cubic = p.lambda_a * v * (v - p.a) * (v - 1.0);
  c.recovery = p.b_w * w;
  c.total = c.cubic + c.recovery;
  return c;
}

Real step_gating(Real w, Real v_frozen, Real dt, const IonicParams& p) {
  if (!(dt > 0.0)) throw ConfigError("step_gating: dt must be positive");
  const Real target = p.kappa * v_frozen;
  return target + (w - target) * std::exp(-p.eps0 * dt);
}

namespace {

constexpr Real kFitCap = 1e9;
// the cubic's roots lie in [0,1]; its |v|^3 growth is checked beyond this
constexpr Real kGrowthThreshold = 2.0;

std::vector<Real> sample_grid(Real lo, Real hi, int n) {
  std::vector<Real> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return v;
}

AssumptionCheck check_growth_sandwich(const IonicParams& p, const std::vector<Real>& samples) {
  AssumptionCheck c;
  c.name = "cubic growth sandwich";
  Real alpha_upper = 0;
  Real alpha_lower = 0;
  bool lower_ok = true;
  // sentinel points keep the growth region populated for narrow ranges
  std::vector<Real> points = samples;
  for (Real s : {2.0, 2.5, 3.0, -2.0, -2.5, -3.0}) points.push_back(s);
  for (Real v : points) {
    const Real ia = std::abs(eval_ionic(v, 0.0, p).cubic);
    const Real v3 = std::abs(v * v * v);
    alpha_upper = std::max(alpha_upper, ia / (v3 + 1.0));
    if (std::abs(v) >= kGrowthThreshold) {
      const Real ratio = ia > 0.0 ? v3 / ia : kFitCap * 10.0;
      if (ratio > kFitCap && ratio > c.violation) {
        lower_ok = false;
        c.witness_v = v;
        c.violation = ratio;
      }
      alpha_lower = std::max(alpha_lower, std::min(ratio, kFitCap * 10.0));
    }
  }
  c.fitted["alpha1"] = std::max({alpha_upper, alpha_lower, 1.0});
  c.passed = lower_ok;
  c.detail = lower_ok ? "lower growth bound checked for |v| >= 2"
                      : "cubic term too small against |v|^3 in the growth region";
  return c;
}

AssumptionCheck check_shifted_monotone(const IonicParams& p, const std::vector<Real>& samples,
                                       Real* beta1_out) {
  AssumptionCheck c;
  c.name = "shifted cubic nondecreasing";
  Real min_deriv = std::numeric_limits<Real>::infinity();
  Real min_at = 0;
  for (Real v : samples) {
    const Real d = p.lambda_a * (3.0 * v * v - 2.0 * (1.0 + p.a) * v + p.a);
    if (d < min_deriv) {
      min_deriv = d;
      min_at = v;
    }
  }
  const Real beta1 = std::max(0.0, -min_deriv) + 0.01 * (1.0 + std::abs(min_deriv));
  *beta1_out = beta1;
  c.fitted["beta1"] = beta1;
  c.fitted["min_cubic_slope"] = min_deriv;
  c.passed = min_deriv + beta1 > 0.0;
  c.witness_v = min_at;
  c.detail = "beta1 fitted from the sampled minimum of the cubic's slope";
  return c;
}

AssumptionCheck check_two_point_bound(const IonicParams& p, const std::vector<Real>& samples,
                                      Real beta1) {
  AssumptionCheck c;
  c.name = "two-point monotonicity bound";
  auto shifted = [&](Real v) { return eval_ionic(v, 0.0, p).cubic + beta1 * v; };
  Real fitted_c = 0;
  bool ok = true;
  for (std::size_t i = 0; i < samples.size() && ok; ++i) {
    const Real v = samples[i];
    const Real fv = shifted(v);
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      const Real vp = samples[j];
      const Real dv = v - vp;
      const Real pairing = (fv - shifted(vp)) * dv;
      const Real scale = 1.0 + std::abs(v) + std::abs(vp);
      const Real demand = scale * scale * dv * dv;
      if (pairing <= 0.0) {
        ok = false;
        c.witness_v = v;
        c.witness_w = vp;
        c.violation = -pairing;
        break;
      }
      fitted_c = std::max(fitted_c, demand / pairing);
    }
  }
  c.fitted["C"] = fitted_c;
  c.passed = ok && fitted_c < kFitCap * 1e3;
  c.detail = ok ? "pairing positive on all sample pairs"
                : "shifted cubic not strictly increasing between witness pair";
  return c;
}

AssumptionCheck check_recovery_coupling(const IonicParams& p, const std::vector<Real>& samples) {
  AssumptionCheck c;
  c.name = "recovery/gating coupling feasibility";
  const Real alpha4 = p.b_w / (p.eps0 * p.kappa);
  const Real alpha5 = p.b_w / p.kappa;
  const bool feasible = alpha4 > 0.0 && alpha5 > 0.0;
  c.fitted["alpha4"] = alpha4;
  c.fitted["alpha5"] = alpha5;

  // sample the inequality with a positive surrogate when the algebraic
  // candidate is infeasible, so the failure carries a concrete witness
  const Real a4 = feasible ? alpha4 : std::max(std::abs(alpha4), 1e-3);
  const Real a5 = feasible ? alpha5 : std::max(std::abs(alpha5), 1e-3);
  Real max_violation = 0;
  const std::size_t stride = std::max<std::size_t>(1, samples.size() / 40);
  for (std::size_t i = 0; i < samples.size(); i += stride)
    for (std::size_t j = 0; j < samples.size(); j += stride) {
      const Real v = samples[i];
      const Real w = samples[j];
      const Real lhs = p.b_w * w * v - a4 * p.eps0 * (p.kappa * v - w) * w;
      const Real viol = a5 * w * w - lhs;
      if (viol > max_violation) {
        max_violation = viol;
        c.witness_v = v;
        c.witness_w = w;
      }
    }
  c.violation = max_violation;
  c.passed = feasible && max_violation <= 1e-10 * (1.0 + std::abs(alpha5));
  c.detail = feasible ? "alpha4 = b_w/(eps0 kappa) removes the mixed term"
                      : "no positive alpha4 in the search set";
  return c;
}

}  // namespace

AssumptionReport check_assumptions(const IonicParams& p, Real v_lo, Real v_hi, int n_samples) {
  if (!(v_lo < v_hi) || !std::isfinite(v_lo) || !std::isfinite(v_hi))
    throw ConfigError("check_assumptions: invalid sampling range");
  if (n_samples < 100) throw ConfigError("check_assumptions: need at least 100 samples");
  const auto samples = sample_grid(v_lo, v_hi, n_samples);

  AssumptionReport report;
  report.checks.push_back(check_growth_sandwich(p, samples));
  Real beta1 = 0;
  report.checks.push_back(check_shifted_monotone(p, samples, &beta1));
  report.checks.push_back(check_two_point_bound(p, samples, beta1));
  report.checks.push_back(check_recovery_coupling(p, samples));
  return report;
}

bool AssumptionReport::all_passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

std::string AssumptionReport::to_text() const {
  std::ostringstream out;
  for (const auto& c : checks) {
    out << (c.passed ? "[pass] " : "[FAIL] ") << c.name;
    for (const auto& [key, value] : c.fitted) out << "  " << key << " = " << value;
    if (!c.passed)
      out << "  witness (v, w) = (" << c.witness_v << ", " << c.witness_w << ") violation "
          << c.violation;
    out << "\n    " << c.detail << "\n";
  }
  out << (all_passed() ? "all membrane-model checks passed" : "membrane-model checks FAILED")
      << "\n";
  return out.str();
}

}  // namespace tridom
