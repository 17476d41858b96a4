#ifndef TRIDOM_MICRO_SOLVER_HPP
#define TRIDOM_MICRO_SOLVER_HPP

#include <functional>
#include <vector>

#include "tridom/fem.hpp"
#include "tridom/geometry.hpp"
#include "tridom/ionic.hpp"

namespace tridom {

/// Microscopic tridomain state on the eps-tiled grid.  Potentials are
/// full-length nodal vectors supported on their phase; traces and gating
/// variables are full-length vectors supported on the interface nodes.
struct MicroState {
  Real t = 0;
  Vector ui1, ui2, ue;
  Vector v1, v2, s;
  Vector w1, w2;
};

struct MicroProblem {
  const LabeledGrid* grid = nullptr;  // tiled grid, zero-flux exterior
  Real eps = 0.25;
  CoefficientTensor m_i = CoefficientTensor::isotropic(1.0);
  CoefficientTensor m_e = CoefficientTensor::isotropic(1.0);
  IonicParams ionic;
  SourceFn app1, app2;  // membrane source densities of (t, x, y)
  Real dt = 0.01;
  Real t_end = 0.5;
  Real solver_tol = 1e-10;
  int max_iterations = 0;
};

struct MicroDiagnostics {
  Real t = 0;
  Real energy = 0;   // (eps/2) sum_k ||v_k||^2 + (eps/4) ||s||^2 on the interfaces
  Real mean_ue = 0;  // integral of u_e over the extracellular phase
  Real max_s = 0, max_v1 = 0, max_v2 = 0;
  // sqrt(eps)-weighted interface L2 norms (the eps-uniform quantities)
  Real eps_v1 = 0, eps_v2 = 0, eps_s = 0, eps_w1 = 0, eps_w2 = 0;
  // per-phase H1 seminorms of the potentials
  Real h1_ui1 = 0, h1_ui2 = 0, h1_ue = 0;
  Real trace_defect = 0;  // max residual of the stored traces vs the potentials
};

/// Quasi-static conduction in the three phases, coupled through implicit
/// capacity terms on the membranes (eps/dt) and the gap junction
/// ((eps/2)/dt with the linear gap current folded into the matrix), explicit
/// ionic currents and exact-exponential gating.  One symmetric block solve
/// per step; the extracellular mean is shifted to zero afterwards.
class MicroStepper {
 public:
  explicit MicroStepper(const MicroProblem& problem);

  void step(MicroState& state) const;
  MicroDiagnostics diagnostics(const MicroState& state) const;

  const Vector& membrane1_mask() const { return gamma1_mask_; }
  const Vector& membrane2_mask() const { return gamma2_mask_; }
  const Vector& gap_mask() const { return gap_mask_; }

 private:
  const MicroProblem* problem_;
  int n_ = 0;
  SparseMatrix system_;
  SparseMatrix b1_, b2_, bg_;     // interface mass operators
  SparseMatrix h1_i1_, h1_i2_, h1_e_;  // unit-coefficient stiffness, for seminorms
  Vector mask1_, mask2_, maske_;  // phase node masks
  Vector gamma1_mask_, gamma2_mask_, gap_mask_;
  Vector subspace_, kernel_, weight_;
  Vector extra_weights_;
  Real extra_volume_ = 0;

  Vector evaluate_on_interface(const SourceFn& f, Real t, const Vector& mask) const;
};

using MicroObserver = std::function<void(int step, const MicroState&, const MicroDiagnostics&)>;

struct MicroTrajectory {
  MicroState final_state;
  std::vector<MicroDiagnostics> diagnostics;
};

/// Initial state from macroscopic C1 data: traces are nodal restrictions of
/// the given functions, potentials start from the gauge reconstruction
/// u_e = 0, u_i^k = v0^k.  Pass s0 = nullptr to derive s0 = v01 - v02.
MicroState make_micro_state(const LabeledGrid& grid, const MicroStepper& stepper,
                            const std::function<Real(Real, Real)>& v01,
                            const std::function<Real(Real, Real)>& v02,
                            const std::function<Real(Real, Real)>& s0,
                            const std::function<Real(Real, Real)>& w01,
                            const std::function<Real(Real, Real)>& w02);

MicroTrajectory run_micro(const MicroProblem& problem, MicroState init,
                          const MicroObserver& observer = {});

}  // namespace tridom

#endif
