#ifndef TRIDOM_MACRO_SOLVER_HPP
#define TRIDOM_MACRO_SOLVER_HPP

#include <functional>
#include <vector>

#include "tridom/fem.hpp"
#include "tridom/geometry.hpp"
#include "tridom/ionic.hpp"

namespace tridom {

/// Homogenized tridomain state: two intracellular potentials, the
/// extracellular potential and the two gating fields on the macro grid.
struct MacroState {
  Real t = 0;
  Vector ui1, ui2, ue, w1, w2;

  Vector v1() const { return ui1 - ue; }
  Vector v2() const { return ui2 - ue; }
  Vector s() const { return ui1 - ui2; }
};

struct MacroProblem {
  const LabeledGrid* grid = nullptr;  // macro grid, zero-flux exterior
  Matrix2 m_i1 = Matrix2::Identity();
  Matrix2 m_i2 = Matrix2::Identity();
  Matrix2 m_e = Matrix2::Identity();
  GeometricMeasures measures;  // mu_1, mu_2, mu_g of the reference cell
  IonicParams ionic;
  SourceFn app1, app2;
  Real dt = 0.01;
  Real t_end = 0.5;
  Real delta = 0.0;  // diffusion regularization added to every tensor
  Real solver_tol = 1e-10;
  int max_iterations = 0;  // 0: solver default
};

struct MacroDiagnostics {
  Real t = 0;
  Real energy = 0;   // sum_k (mu_k/2) ||v_k||^2 + (mu_g/2) ||s||^2
  Real mean_ue = 0;  // integral of u_e over the domain
  Real max_s = 0, max_v1 = 0, max_v2 = 0;
  Real ionic_norm1 = 0, ionic_norm2 = 0;  // L2 norms of I_ion(v_k, w_k)
};

/// Semi-implicit stepper for the homogenized system: gating by exact
/// exponential with frozen v, ionic and gap currents explicit, capacity and
/// diffusion implicit in one symmetric block solve, followed by the
/// mean-zero shift of all three potentials (which preserves v and s).
class MacroStepper {
 public:
  explicit MacroStepper(const MacroProblem& problem);

  void step(MacroState& state) const;
  MacroDiagnostics diagnostics(const MacroState& state) const;

  const MacroProblem& problem() const { return *problem_; }

 private:
  const MacroProblem* problem_;
  int n_ = 0;
  SparseMatrix system_;  // 3n x 3n symmetric positive semi-definite
  SparseMatrix mass_;
  Vector kernel_, weight_, volume_weights_;
  Real domain_volume_ = 0;

  Vector evaluate_source(const SourceFn& f, Real t) const;
};

using MacroObserver = std::function<void(int step, const MacroState&, const MacroDiagnostics&)>;

struct MacroTrajectory {
  MacroState final_state;
  std::vector<MacroDiagnostics> diagnostics;
};

/// Initial potentials from the transmembrane data with the gauge u_e = 0.
MacroState make_macro_state(const LabeledGrid& grid, const std::function<Real(Real, Real)>& v01,
                            const std::function<Real(Real, Real)>& v02,
                            const std::function<Real(Real, Real)>& w01,
                            const std::function<Real(Real, Real)>& w02);

/// Runs t_end/dt steps (dt must divide t_end within rounding), recording
/// diagnostics each step and invoking the observer when supplied.  Step
/// failures are rethrown with the failing time stamp.
MacroTrajectory run_macro(const MacroProblem& problem, MacroState init,
                          const MacroObserver& observer = {});

}  // namespace tridom

#endif
