#include "tridom/macro_solver.hpp"

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

MacroStepper::MacroStepper(const MacroProblem& problem) : problem_(&problem) {
  const LabeledGrid& grid = *problem.grid;
  n_ = grid.num_nodes();
  mass_ = assemble_mass(grid, PhaseSet::all());
  volume_weights_ = lumped_weights(grid, PhaseSet::all());
  domain_volume_ = volume_weights_.sum();

  const Matrix2 reg = problem.delta * Matrix2::Identity();
  const SparseMatrix k1 = assemble_stiffness(grid, Matrix2(problem.m_i1 + reg), PhaseSet::all());
  const SparseMatrix k2 = assemble_stiffness(grid, Matrix2(problem.m_i2 + reg), PhaseSet::all());
  const SparseMatrix ke = assemble_stiffness(grid, Matrix2(problem.m_e + reg), PhaseSet::all());

  const Real c1 = problem.measures.mu_1 / problem.dt;
  const Real c2 = problem.measures.mu_2 / problem.dt;
  const Real cg = problem.measures.mu_g / problem.dt;

  std::vector<Triplet> triplets;
  append_block(triplets, k1, 0, 0, 1.0);
  append_block(triplets, mass_, 0, 0, c1 + cg);
  append_block(triplets, mass_, 0, n_, -cg);
  append_block(triplets, mass_, 0, 2 * n_, -c1);

  append_block(triplets, k2, n_, n_, 1.0);
  append_block(triplets, mass_, n_, n_, c2 + cg);
  append_block(triplets, mass_, n_, 0, -cg);
  append_block(triplets, mass_, n_, 2 * n_, -c2);

  append_block(triplets, ke, 2 * n_, 2 * n_, 1.0);
  append_block(triplets, mass_, 2 * n_, 2 * n_, c1 + c2);
  append_block(triplets, mass_, 2 * n_, 0, -c1);
  append_block(triplets, mass_, 2 * n_, n_, -c2);

  system_ = SparseMatrix(3 * n_, 3 * n_);
  system_.setFromTriplets(triplets.begin(), triplets.end());
  system_.makeCompressed();

  // gauge kernel (c, c, c); the projection pins the mean of u_e
  kernel_ = Vector::Ones(3 * n_);
  weight_ = Vector::Zero(3 * n_);
  weight_.segment(2 * n_, n_) = volume_weights_;
}

Vector MacroStepper::evaluate_source(const SourceFn& f, Real t) const {
  Vector out = Vector::Zero(n_);
  if (!f) return out;
  const LabeledGrid& grid = *problem_->grid;
  for (int j = 0; j < grid.nodes_y(); ++j)
    for (int i = 0; i < grid.nodes_x(); ++i) {
      const Vector2 x = grid.node_position(i, j);
      out[grid.node(i, j)] = f(t, x[0], x[1]);
    }
  return out;
}

void MacroStepper::step(MacroState& state) const {
  const MacroProblem& pb = *problem_;
  const Real dt = pb.dt;
  const Vector v1 = state.v1();
  const Vector v2 = state.v2();
  const Vector s = state.s();

  // (a) gating by exact exponential with frozen transmembrane potential
  for (int p = 0; p < n_; ++p) {
    state.w1[p] = step_gating(state.w1[p], v1[p], dt, pb.ionic);
    state.w2[p] = step_gating(state.w2[p], v2[p], dt, pb.ionic);
  }

  // (b) explicit reaction terms at t_n, sources at t_{n+1}
  const Real t_next = state.t + dt;
  Vector f1 = evaluate_source(pb.app1, t_next);
  Vector f2 = evaluate_source(pb.app2, t_next);
  for (int p = 0; p < n_; ++p) {
    f1[p] -= eval_ionic(v1[p], state.w1[p], pb.ionic).total;
    f2[p] -= eval_ionic(v2[p], state.w2[p], pb.ionic).total;
  }
  const Real mu1 = pb.measures.mu_1;
  const Real mu2 = pb.measures.mu_2;
  const Real mug = pb.measures.mu_g;

  const Vector mass_v1 = mass_ * v1;
  const Vector mass_v2 = mass_ * v2;
  const Vector mass_s = mass_ * s;
  const Vector load1 = mass_ * f1;
  const Vector load2 = mass_ * f2;
  const Vector gap_load = mass_ * (pb.ionic.g_gap * s);

  Vector b(3 * n_);
  b.segment(0, n_) = (mu1 / dt) * mass_v1 + (mug / dt) * mass_s + mu1 * load1 - mug * gap_load;
  b.segment(n_, n_) = (mu2 / dt) * mass_v2 - (mug / dt) * mass_s + mu2 * load2 + mug * gap_load;
  b.segment(2 * n_, n_) =
      -(mu1 / dt) * mass_v1 - (mu2 / dt) * mass_v2 - mu1 * load1 - mu2 * load2;

  CgOptions opts;
  opts.tol = pb.solver_tol;
  opts.max_iter = pb.max_iterations;
  opts.kernel = kernel_;
  opts.weight = weight_;
  const Vector x = solve_spsd(system_, b, std::move(opts));

  state.ui1 = x.segment(0, n_);
  state.ui2 = x.segment(n_, n_);
  state.ue = x.segment(2 * n_, n_);

  // (c) zero-mean shift of u_e, applied to every potential so v and s are
  // untouched
  const Real shift = volume_weights_.dot(state.ue) / domain_volume_;
  state.ui1.array() -= shift;
  state.ui2.array() -= shift;
  state.ue.array() -= shift;
  state.t = t_next;
}

MacroDiagnostics MacroStepper::diagnostics(const MacroState& state) const {
  const MacroProblem& pb = *problem_;
  MacroDiagnostics d;
  d.t = state.t;
  const Vector v1 = state.v1();
  const Vector v2 = state.v2();
  const Vector s = state.s();
  d.energy = 0.5 * pb.measures.mu_1 * v1.dot(mass_ * v1) +
             0.5 * pb.measures.mu_2 * v2.dot(mass_ * v2) +
             0.5 * pb.measures.mu_g * s.dot(mass_ * s);
  d.mean_ue = volume_weights_.dot(state.ue);
  d.max_s = s.size() ? s.cwiseAbs().maxCoeff() : 0.0;
  d.max_v1 = v1.size() ? v1.cwiseAbs().maxCoeff() : 0.0;
  d.max_v2 = v2.size() ? v2.cwiseAbs().maxCoeff() : 0.0;
  Vector ion1(n_), ion2(n_);
  for (int p = 0; p < n_; ++p) {
    ion1[p] = eval_ionic(v1[p], state.w1[p], pb.ionic).total;
    ion2[p] = eval_ionic(v2[p], state.w2[p], pb.ionic).total;
  }
  d.ionic_norm1 = std::sqrt(ion1.dot(mass_ * ion1));
  d.ionic_norm2 = std::sqrt(ion2.dot(mass_ * ion2));
  return d;
}

MacroState make_macro_state(const LabeledGrid& grid, const std::function<Real(Real, Real)>& v01,
                            const std::function<Real(Real, Real)>& v02,
                            const std::function<Real(Real, Real)>& w01,
                            const std::function<Real(Real, Real)>& w02) {
  const int n = grid.num_nodes();
  MacroState state;
  state.t = 0;
  state.ui1 = Vector::Zero(n);
  state.ui2 = Vector::Zero(n);
  state.ue = Vector::Zero(n);
  state.w1 = Vector::Zero(n);
  state.w2 = Vector::Zero(n);
  for (int j = 0; j < grid.nodes_y(); ++j)
    for (int i = 0; i < grid.nodes_x(); ++i) {
      const Vector2 x = grid.node_position(i, j);
      const int p = grid.node(i, j);
      state.ui1[p] = v01 ? v01(x[0], x[1]) : 0.0;
      state.ui2[p] = v02 ? v02(x[0], x[1]) : 0.0;
      state.w1[p] = w01 ? w01(x[0], x[1]) : 0.0;
      state.w2[p] = w02 ? w02(x[0], x[1]) : 0.0;
    }
  return state;
}

MacroTrajectory run_macro(const MacroProblem& problem, MacroState init,
                          const MacroObserver& observer) {
  const Real steps_real = problem.t_end / problem.dt;
  const int steps = static_cast<int>(std::round(steps_real));
  if (steps < 1 || std::abs(steps_real - steps) > 1e-9 * std::max(1.0, steps_real))
    throw ConfigError("run_macro: dt must divide t_end");

  const MacroStepper stepper(problem);
  MacroTrajectory trajectory;
  trajectory.diagnostics.reserve(static_cast<std::size_t>(steps) + 1);
  trajectory.diagnostics.push_back(stepper.diagnostics(init));
  if (observer) observer(0, init, trajectory.diagnostics.back());

  MacroState state = std::move(init);
  for (int k = 1; k <= steps; ++k) {
    try {
      stepper.step(state);
    } catch (const SolverError& err) {
      std::ostringstream msg;
      msg << "macro step " << k << " (t = " << state.t + problem.dt << ") failed: " << err.what();
      throw SolverError(msg.str(), err.residual, err.iterations);
    }
    trajectory.diagnostics.push_back(stepper.diagnostics(state));
    if (observer) observer(k, state, trajectory.diagnostics.back());
  }
  trajectory.final_state = std::move(state);
  return trajectory;
}

}  // namespace tridom
