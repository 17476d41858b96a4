#include <doctest.h>

#include <array>
#include <cmath>

#include "tridom/micro_solver.hpp"

using namespace tridom;

namespace {

const CellGeometrySpec kBand{CellLayout::Band, 0.25, 0.75};

MicroProblem band_problem(const LabeledGrid& grid, Real eps, Real dt = 0.01, Real t_end = 0.5) {
  MicroProblem pb;
  pb.grid = &grid;
  pb.eps = eps;
  pb.dt = dt;
  pb.t_end = t_end;
  return pb;
}

auto cosine = [](Real x, Real y) { return std::cos(M_PI * x) * std::cos(M_PI * y); };

// single-cell 0-D oracle: with x-constant data on a one-cell tiling every
// flux vanishes and the membranes evolve by decoupled ODEs
struct SingleCellOracle {
  IonicParams ionic;

  std::array<Real, 5> derivative(const std::array<Real, 5>& y) const {
    const Real v1 = y[0], v2 = y[1], s = y[2], w1 = y[3], w2 = y[4];
    return {-eval_ionic(v1, w1, ionic).total, -eval_ionic(v2, w2, ionic).total,
            -eval_gap(s, ionic), ionic.eps0 * (ionic.kappa * v1 - w1),
            ionic.eps0 * (ionic.kappa * v2 - w2)};
  }

  std::array<Real, 5> integrate(std::array<Real, 5> y, Real t_end, Real h) const {
    const int steps = static_cast<int>(std::round(t_end / h));
    for (int k = 0; k < steps; ++k) {
      const auto k1 = derivative(y);
      auto add = [&](const std::array<Real, 5>& base, const std::array<Real, 5>& d, Real c) {
        std::array<Real, 5> out;
        for (int i = 0; i < 5; ++i) out[i] = base[i] + c * d[i];
        return out;
      };
      const auto k2 = derivative(add(y, k1, 0.5 * h));
      const auto k3 = derivative(add(y, k2, 0.5 * h));
      const auto k4 = derivative(add(y, k3, h));
      for (int i = 0; i < 5; ++i) y[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    }
    return y;
  }
};

Real masked_max(const Vector& values, const Vector& mask) {
  Real out = 0;
  for (int p = 0; p < values.size(); ++p)
    if (mask[p] > 0.5) out = std::max(out, std::abs(values[p]));
  return out;
}

}  // namespace

TEST_CASE("zero data is a fixed point") {
  const LabeledGrid grid = tile_microstructure(kBand, 0.5, 8);
  const MicroProblem pb = band_problem(grid, 0.5, 0.01, 0.05);
  const MicroStepper stepper(pb);
  MicroState state = make_micro_state(grid, stepper, nullptr, nullptr, nullptr, nullptr, nullptr);
  const MicroTrajectory run = run_micro(pb, std::move(state));
  CHECK(run.final_state.ui1.cwiseAbs().maxCoeff() == 0.0);
  CHECK(run.final_state.ue.cwiseAbs().maxCoeff() == 0.0);
  CHECK(run.final_state.v1.cwiseAbs().maxCoeff() == 0.0);
  CHECK(run.final_state.s.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single-cell membranes follow the decoupled ODE oracle") {
  const LabeledGrid grid = tile_microstructure(kBand, 1.0, 8);
  const Real dt = 1e-3, t_end = 0.5;
  const MicroProblem pb = band_problem(grid, 1.0, dt, t_end);
  const MicroStepper stepper(pb);
  // independent s0: the disconnected extracellular strips absorb the offset
  MicroState state = make_micro_state(
      grid, stepper, [](Real, Real) { return 0.8; }, [](Real, Real) { return 0.3; },
      [](Real, Real) { return 0.25; }, [](Real, Real) { return 0.0; },
      [](Real, Real) { return 0.1; });
  const MicroTrajectory run = run_micro(pb, std::move(state));

  SingleCellOracle oracle{pb.ionic};
  const auto exact = oracle.integrate({0.8, 0.3, 0.25, 0.0, 0.1}, t_end, dt / 100.0);

  const MicroState& f = run.final_state;
  const Vector& g1 = stepper.membrane1_mask();
  const Vector& g2 = stepper.membrane2_mask();
  const Vector& gg = stepper.gap_mask();
  auto masked_value = [&](const Vector& field, const Vector& mask) {
    Real sum = 0;
    int count = 0;
    for (int p = 0; p < field.size(); ++p)
      if (mask[p] > 0.5) {
        sum += field[p];
        ++count;
      }
    return sum / count;
  };
  CHECK(std::abs(masked_value(f.v1, g1) - exact[0]) <= 1e-3 * std::max(1.0, std::abs(exact[0])));
  CHECK(std::abs(masked_value(f.v2, g2) - exact[1]) <= 1e-3 * std::max(1.0, std::abs(exact[1])));
  CHECK(std::abs(masked_value(f.s, gg) - exact[2]) <= 1e-3 * std::max(1.0, std::abs(exact[2])));
  CHECK(std::abs(masked_value(f.w1, g1) - exact[3]) <= 1e-3);
  CHECK(std::abs(masked_value(f.w2, g2) - exact[4]) <= 1e-3);
  // traces stay spatially constant
  CHECK(masked_max(f.v1, g1) - std::abs(masked_value(f.v1, g1)) <= 1e-8);
}

TEST_CASE("mirror symmetry makes the gap potential antisymmetric") {
  const int npc = 8;
  const LabeledGrid grid = tile_microstructure(kBand, 0.5, npc);
  const MicroProblem pb = band_problem(grid, 0.5, 0.01, 0.2);
  const MicroStepper stepper(pb);
  // mirror pairing: F1(x, 1-y) = F2(x, y) with diagonal tensors
  auto f1 = [](Real x, Real y) { return 0.5 + 0.3 * std::cos(M_PI * x) + 0.2 * y; };
  auto f2 = [](Real x, Real y) { return 0.5 + 0.3 * std::cos(M_PI * x) + 0.2 * (1.0 - y); };
  MicroState state = make_micro_state(grid, stepper, f1, f2, nullptr, nullptr, nullptr);
  const MicroTrajectory run = run_micro(pb, std::move(state));

  const MicroState& f = run.final_state;
  const int ny = grid.ny();
  Real defect = 0;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= grid.nx(); ++i) {
      const int p = grid.node(i, j);
      const int q = grid.node(i, ny - j);
      if (stepper.gap_mask()[p] > 0.5) {
        CHECK(stepper.gap_mask()[q] > 0.5);
        defect = std::max(defect, std::abs(f.s[p] + f.s[q]));
      }
    }
  CHECK(defect <= 10.0 * pb.solver_tol);
}

TEST_CASE("traces stay consistent and the extracellular mean stays zero") {
  const LabeledGrid grid = tile_microstructure(kBand, 0.25, 8);
  const MicroProblem pb = band_problem(grid, 0.25, 0.01, 0.2);
  const MicroStepper stepper(pb);
  MicroState state = make_micro_state(grid, stepper, cosine, nullptr, nullptr, nullptr, nullptr);
  run_micro(pb, std::move(state), [&](int step, const MicroState&, const MicroDiagnostics& d) {
    if (step == 0) return;
    CHECK(d.trace_defect <= 10.0 * pb.solver_tol);
    CHECK(std::abs(d.mean_ue) <= 1e-10);
  });
}

TEST_CASE("interface energy decays with reactions and sources off") {
  const LabeledGrid grid = tile_microstructure(kBand, 0.25, 8);
  MicroProblem pb = band_problem(grid, 0.25, 0.01, 0.3);
  pb.ionic.lambda_a = 0.0;
  pb.ionic.b_w = 0.0;
  const MicroStepper stepper(pb);
  MicroState state = make_micro_state(
      grid, stepper, cosine, [](Real x, Real y) { return -0.5 * cosine(x, y); }, nullptr, nullptr,
      nullptr);
  const MicroTrajectory run = run_micro(pb, std::move(state));
  Real previous = run.diagnostics.front().energy;
  for (std::size_t k = 1; k < run.diagnostics.size(); ++k) {
    CHECK(run.diagnostics[k].energy <= previous + 1e-12 * run.diagnostics.front().energy);
    previous = run.diagnostics[k].energy;
  }
}

TEST_CASE("sqrt(eps)-weighted norms stay in a band across eps") {
  std::array<Real, 2> final_norms{};
  int idx = 0;
  for (Real eps : {0.5, 0.25}) {
    const LabeledGrid grid = tile_microstructure(kBand, eps, 8);
    const MicroProblem pb = band_problem(grid, eps, 0.01, 0.2);
    const MicroStepper stepper(pb);
    MicroState state = make_micro_state(grid, stepper, cosine, nullptr, nullptr, nullptr, nullptr);
    const MicroTrajectory run = run_micro(pb, std::move(state));
    final_norms[idx++] = run.diagnostics.back().eps_v1;
  }
  const Real ratio = final_norms[0] / final_norms[1];
  CHECK(ratio >= 0.5);
  CHECK(ratio <= 2.0);
}

TEST_CASE("gauge invariance of the microscopic step") {
  const LabeledGrid grid = tile_microstructure(kBand, 0.5, 8);
  MicroProblem pb = band_problem(grid, 0.5, 0.01, 0.05);
  pb.solver_tol = 1e-14;
  const MicroStepper stepper(pb);
  MicroState base = make_micro_state(grid, stepper, cosine, nullptr, nullptr, nullptr, nullptr);
  MicroState shifted = base;
  shifted.ui1 += 2.5 * grid.phase_node_mask({Phase::Intra1});
  shifted.ui2 += 2.5 * grid.phase_node_mask({Phase::Intra2});
  shifted.ue += 2.5 * grid.phase_node_mask({Phase::Extra});
  const MicroTrajectory a = run_micro(pb, std::move(base));
  const MicroTrajectory b = run_micro(pb, std::move(shifted));
  CHECK((a.final_state.v1 - b.final_state.v1).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((a.final_state.s - b.final_state.s).cwiseAbs().maxCoeff() <= 1e-12);
}
