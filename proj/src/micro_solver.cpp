#include "tridom/micro_solver.hpp"

#include <cmath>
#include <sstream>

namespace tridom {

namespace {

void append_block(std::vector<Triplet>& out, const SparseMatrix& block, int row_offset,
                  int col_offset, Real scale) {
  for (int k = 0; k < block.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(block, k); it; ++it)
      out.emplace_back(row_offset + static_cast<int>(it.row()),
                       col_offset + static_cast<int>(it.col()), scale * it.value());
}

}  // namespace

MicroStepper::MicroStepper(const MicroProblem& problem) : problem_(&problem) {
  const LabeledGrid& grid = *problem.grid;
  n_ = grid.num_nodes();

  const SparseMatrix k1 = assemble_stiffness(grid, problem.m_i, {Phase::Intra1});
  const SparseMatrix k2 = assemble_stiffness(grid, problem.m_i, {Phase::Intra2});
  const SparseMatrix ke = assemble_stiffness(grid, problem.m_e, {Phase::Extra});
  b1_ = assemble_interface_mass(grid, InterfaceLabel::Membrane1);
  b2_ = assemble_interface_mass(grid, InterfaceLabel::Membrane2);
  bg_ = assemble_interface_mass(grid, InterfaceLabel::Gap);

  const CoefficientTensor unit = CoefficientTensor::isotropic(1.0);
  h1_i1_ = assemble_stiffness(grid, unit, {Phase::Intra1});
  h1_i2_ = assemble_stiffness(grid, unit, {Phase::Intra2});
  h1_e_ = assemble_stiffness(grid, unit, {Phase::Extra});

  mask1_ = grid.phase_node_mask({Phase::Intra1});
  mask2_ = grid.phase_node_mask({Phase::Intra2});
  maske_ = grid.phase_node_mask({Phase::Extra});
  gamma1_mask_ = grid.interface_node_mask(InterfaceLabel::Membrane1);
  gamma2_mask_ = grid.interface_node_mask(InterfaceLabel::Membrane2);
  gap_mask_ = grid.interface_node_mask(InterfaceLabel::Gap);
  extra_weights_ = lumped_weights(grid, {Phase::Extra});
  extra_volume_ = extra_weights_.sum();

  const Real eps = problem.eps;
  const Real dt = problem.dt;
  const Real cv = eps / dt;                                   // membrane capacity
  const Real cg = 0.5 * eps * (1.0 / dt + problem.ionic.g_gap);  // implicit gap

  std::vector<Triplet> triplets;
  append_block(triplets, k1, 0, 0, 1.0);
  append_block(triplets, b1_, 0, 0, cv);
  append_block(triplets, bg_, 0, 0, cg);
  append_block(triplets, bg_, 0, n_, -cg);
  append_block(triplets, b1_, 0, 2 * n_, -cv);

  append_block(triplets, k2, n_, n_, 1.0);
  append_block(triplets, b2_, n_, n_, cv);
  append_block(triplets, bg_, n_, n_, cg);
  append_block(triplets, bg_, n_, 0, -cg);
  append_block(triplets, b2_, n_, 2 * n_, -cv);

  append_block(triplets, ke, 2 * n_, 2 * n_, 1.0);
  append_block(triplets, b1_, 2 * n_, 2 * n_, cv);
  append_block(triplets, b2_, 2 * n_, 2 * n_, cv);
  append_block(triplets, b1_, 2 * n_, 0, -cv);
  append_block(triplets, b2_, 2 * n_, n_, -cv);

  system_ = SparseMatrix(3 * n_, 3 * n_);
  system_.setFromTriplets(triplets.begin(), triplets.end());
  system_.makeCompressed();

  subspace_ = Vector::Zero(3 * n_);
  subspace_.segment(0, n_) = mask1_;
  subspace_.segment(n_, n_) = mask2_;
  subspace_.segment(2 * n_, n_) = maske_;
  kernel_ = subspace_;  // the constant (c, c, c) on the phase supports
  weight_ = Vector::Zero(3 * n_);
  weight_.segment(2 * n_, n_) = extra_weights_;
}

Vector MicroStepper::evaluate_on_interface(const SourceFn& f, Real t, const Vector& mask) const {
  Vector out = Vector::Zero(n_);
  if (!f) return out;
  const LabeledGrid& grid = *problem_->grid;
  for (int j = 0; j < grid.nodes_y(); ++j)
    for (int i = 0; i < grid.nodes_x(); ++i) {
      const int p = grid.node(i, j);
      if (mask[p] < 0.5) continue;
      const Vector2 x = grid.node_position(i, j);
      out[p] = f(t, x[0], x[1]);
    }
  return out;
}

void MicroStepper::step(MicroState& state) const {
  const MicroProblem& pb = *problem_;
  const Real dt = pb.dt;
  const Real eps = pb.eps;
  const Real t_next = state.t + dt;

  // (a) gating on the membrane nodes with frozen traces
  for (int p = 0; p < n_; ++p) {
    if (gamma1_mask_[p] > 0.5) state.w1[p] = step_gating(state.w1[p], state.v1[p], dt, pb.ionic);
    if (gamma2_mask_[p] > 0.5) state.w2[p] = step_gating(state.w2[p], state.v2[p], dt, pb.ionic);
  }

  // (b) membrane loads: sources at t_{n+1}, ionic currents at (v^n, w^{n+1})
  Vector f1 = evaluate_on_interface(pb.app1, t_next, gamma1_mask_);
  Vector f2 = evaluate_on_interface(pb.app2, t_next, gamma2_mask_);
  for (int p = 0; p < n_; ++p) {
    if (gamma1_mask_[p] > 0.5) f1[p] -= eval_ionic(state.v1[p], state.w1[p], pb.ionic).total;
    if (gamma2_mask_[p] > 0.5) f2[p] -= eval_ionic(state.v2[p], state.w2[p], pb.ionic).total;
  }

  const Real cv = eps / dt;
  const Vector bv1 = b1_ * state.v1;
  const Vector bv2 = b2_ * state.v2;
  const Vector bs = bg_ * state.s;
  const Vector load1 = b1_ * f1;
  const Vector load2 = b2_ * f2;

  Vector b(3 * n_);
  b.segment(0, n_) = cv * bv1 + (0.5 * eps / dt) * bs + eps * load1;
  b.segment(n_, n_) = cv * bv2 - (0.5 * eps / dt) * bs + eps * load2;
  b.segment(2 * n_, n_) = -cv * bv1 - cv * bv2 - eps * load1 - eps * load2;

  CgOptions opts;
  opts.tol = pb.solver_tol;
  opts.max_iter = pb.max_iterations;
  opts.subspace = subspace_;
  opts.kernel = kernel_;
  opts.weight = weight_;
  const Vector x = solve_spsd(system_, b, std::move(opts));

  state.ui1 = x.segment(0, n_);
  state.ui2 = x.segment(n_, n_);
  state.ue = x.segment(2 * n_, n_);

  // (c) extracellular mean shift on every phase support, then traces
  const Real shift = extra_weights_.dot(state.ue) / extra_volume_;
  state.ui1 -= shift * mask1_;
  state.ui2 -= shift * mask2_;
  state.ue -= shift * maske_;

  state.v1 = gamma1_mask_.cwiseProduct(state.ui1 - state.ue);
  state.v2 = gamma2_mask_.cwiseProduct(state.ui2 - state.ue);
  state.s = gap_mask_.cwiseProduct(state.ui1 - state.ui2);
  state.t = t_next;
}

MicroDiagnostics MicroStepper::diagnostics(const MicroState& state) const {
  const Real eps = problem_->eps;
  MicroDiagnostics d;
  d.t = state.t;
  const Real v1n2 = state.v1.dot(b1_ * state.v1);
  const Real v2n2 = state.v2.dot(b2_ * state.v2);
  const Real sn2 = state.s.dot(bg_ * state.s);
  d.energy = 0.5 * eps * (v1n2 + v2n2) + 0.25 * eps * sn2;
  d.mean_ue = extra_weights_.dot(state.ue);
  d.max_s = state.s.cwiseAbs().maxCoeff();
  d.max_v1 = state.v1.cwiseAbs().maxCoeff();
  d.max_v2 = state.v2.cwiseAbs().maxCoeff();
  d.eps_v1 = std::sqrt(eps * v1n2);
  d.eps_v2 = std::sqrt(eps * v2n2);
  d.eps_s = std::sqrt(eps * sn2);
  d.eps_w1 = std::sqrt(eps * state.w1.dot(b1_ * state.w1));
  d.eps_w2 = std::sqrt(eps * state.w2.dot(b2_ * state.w2));
  d.h1_ui1 = std::sqrt(std::max(0.0, state.ui1.dot(h1_i1_ * state.ui1)));
  d.h1_ui2 = std::sqrt(std::max(0.0, state.ui2.dot(h1_i2_ * state.ui2)));
  d.h1_ue = std::sqrt(std::max(0.0, state.ue.dot(h1_e_ * state.ue)));

  const Vector dv1 = gamma1_mask_.cwiseProduct(state.ui1 - state.ue) - state.v1;
  const Vector dv2 = gamma2_mask_.cwiseProduct(state.ui2 - state.ue) - state.v2;
  const Vector ds = gap_mask_.cwiseProduct(state.ui1 - state.ui2) - state.s;
  d.trace_defect =
      std::max({dv1.cwiseAbs().maxCoeff(), dv2.cwiseAbs().maxCoeff(), ds.cwiseAbs().maxCoeff()});
  return d;
}

MicroState make_micro_state(const LabeledGrid& grid, const MicroStepper& stepper,
                            const std::function<Real(Real, Real)>& v01,
                            const std::function<Real(Real, Real)>& v02,
                            const std::function<Real(Real, Real)>& s0,
                            const std::function<Real(Real, Real)>& w01,
                            const std::function<Real(Real, Real)>& w02) {
  const int n = grid.num_nodes();
  MicroState state;
  state.t = 0;
  state.ui1 = Vector::Zero(n);
  state.ui2 = Vector::Zero(n);
  state.ue = Vector::Zero(n);
  state.v1 = Vector::Zero(n);
  state.v2 = Vector::Zero(n);
  state.s = Vector::Zero(n);
  state.w1 = Vector::Zero(n);
  state.w2 = Vector::Zero(n);

  const Vector& g1 = stepper.membrane1_mask();
  const Vector& g2 = stepper.membrane2_mask();
  const Vector& gg = stepper.gap_mask();
  for (int j = 0; j < grid.nodes_y(); ++j)
    for (int i = 0; i < grid.nodes_x(); ++i) {
      const int p = grid.node(i, j);
      const Vector2 x = grid.node_position(i, j);
      const Real a1 = v01 ? v01(x[0], x[1]) : 0.0;
      const Real a2 = v02 ? v02(x[0], x[1]) : 0.0;
      // gauge reconstruction u_e = 0 mirrors the macro initial data
      state.ui1[p] = a1;
      state.ui2[p] = a2;
      if (g1[p] > 0.5) {
        state.v1[p] = a1;
        state.w1[p] = w01 ? w01(x[0], x[1]) : 0.0;
      }
      if (g2[p] > 0.5) {
        state.v2[p] = a2;
        state.w2[p] = w02 ? w02(x[0], x[1]) : 0.0;
      }
      if (gg[p] > 0.5) state.s[p] = s0 ? s0(x[0], x[1]) : a1 - a2;
    }
  return state;
}

MicroTrajectory run_micro(const MicroProblem& problem, MicroState init,
                          const MicroObserver& observer) {
  const Real steps_real = problem.t_end / problem.dt;
  const int steps = static_cast<int>(std::round(steps_real));
  if (steps < 1 || std::abs(steps_real - steps) > 1e-9 * std::max(1.0, steps_real))
    throw ConfigError("run_micro: dt must divide t_end");

  const MicroStepper stepper(problem);
  MicroTrajectory trajectory;
  trajectory.diagnostics.reserve(static_cast<std::size_t>(steps) + 1);
  trajectory.diagnostics.push_back(stepper.diagnostics(init));
  if (observer) observer(0, init, trajectory.diagnostics.back());

  MicroState state = std::move(init);
  for (int k = 1; k <= steps; ++k) {
    try {
      stepper.step(state);
    } catch (const SolverError& err) {
      std::ostringstream msg;
      msg << "micro step " << k << " (t = " << state.t + problem.dt << ") failed: " << err.what();
      throw SolverError(msg.str(), err.residual, err.iterations);
    }
    trajectory.diagnostics.push_back(stepper.diagnostics(state));
    if (observer) observer(k, state, trajectory.diagnostics.back());
  }
  trajectory.final_state = std::move(state);
  return trajectory;
}

}  // namespace tridom
