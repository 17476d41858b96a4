#include "tridom/cell_problems.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace tridom {

namespace {

Real cell_volume(const LabeledGrid& grid) {
  return grid.nx() * grid.hx() * grid.ny() * grid.hy();
}

Vector corrector_rhs(const LabeledGrid& grid, const CoefficientTensor& M, PhaseSet phase, int q) {
  const Q1Quadrature quad(grid.hx(), grid.hy());
  Vector b = Vector::Zero(grid.num_nodes());
  Vector2 eq = Vector2::Zero();
  eq[q] = 1.0;
  for (int ey = 0; ey < grid.ny(); ++ey)
    for (int ex = 0; ex < grid.nx(); ++ex) {
      if (!phase.contains(grid.element_phase(ex, ey))) continue;
      const Vector2 flux = M.at_element(grid, ex, ey) * eq;
      const auto nodes = grid.element_nodes(ex, ey);
      for (int a = 0; a < 4; ++a) {
        Real v = 0;
        for (int gp = 0; gp < 4; ++gp) v += quad.weight[gp] * flux.dot(quad.grad[gp][a]);
        b[nodes[a]] -= v;
      }
    }
  return b;
}

}  // namespace

Vector solve_corrector(const LabeledGrid& grid, const CoefficientTensor& M, PhaseSet phase, int q,
                       Real tol) {
  if (phase.empty()) throw ConfigError("solve_corrector: empty phase set");
  if (q != 0 && q != 1) throw ConfigError("solve_corrector: direction index must be 0 or 1");
  const SparseMatrix A = assemble_stiffness(grid, M, phase);
  const Vector b = corrector_rhs(grid, M, phase, q);
  // constant coefficients leave only assembly roundoff in the load
  Real coefficient_scale = 0;
  for (const auto& [start, m] : M.pieces())
    coefficient_scale = std::max(coefficient_scale, m.cwiseAbs().maxCoeff());
  const Real noise = 1e-13 * coefficient_scale * std::min(grid.hx(), grid.hy());
  if (b.cwiseAbs().maxCoeff() <= noise) return Vector::Zero(grid.num_nodes());
  return solve_spsd_mean_zero(A, b, grid, phase, tol);
}

CorrectorSet solve_correctors(const LabeledGrid& grid, const CoefficientTensor& M, PhaseSet phase,
                              Real tol) {
  CorrectorSet set;
  set.phase = phase;
  set.chi[0] = solve_corrector(grid, M, phase, 0, tol);
  set.chi[1] = solve_corrector(grid, M, phase, 1, tol);
  return set;
}

EffectiveTensor effective_tensor(const LabeledGrid& grid, const CoefficientTensor& M,
                                 PhaseSet phase, const CorrectorSet& correctors,
                                 TensorFormula formula) {
  const Q1Quadrature quad(grid.hx(), grid.hy());
  Matrix2 result = Matrix2::Zero();
  for (int ey = 0; ey < grid.ny(); ++ey)
    for (int ex = 0; ex < grid.nx(); ++ex) {
      if (!phase.contains(grid.element_phase(ex, ey))) continue;
      const Matrix2& m = M.at_element(grid, ex, ey);
      const auto nodes = grid.element_nodes(ex, ey);
      for (int gp = 0; gp < 4; ++gp) {
        // corrected basis directions e_q + grad chi^q at this Gauss point
        Matrix2 dirs;
        for (int q = 0; q < 2; ++q) {
          Vector2 g = Vector2::Zero();
          for (int a = 0; a < 4; ++a) g += correctors.chi[q][nodes[a]] * quad.grad[gp][a];
          g[q] += 1.0;
          dirs.col(q) = g;
        }
        if (formula == TensorFormula::DivergenceForm) {
          result += quad.weight[gp] * (m * dirs);
        } else {
          for (int p = 0; p < 2; ++p)
            for (int q = p; q < 2; ++q) {
              const Real v = quad.weight[gp] * dirs.col(p).dot(m * dirs.col(q));
              result(p, q) += v;
              if (q != p) result(q, p) += v;
            }
        }
      }
    }
  EffectiveTensor tensor;
  tensor.m = result / cell_volume(grid);
  tensor.formula = formula;
  tensor.phase = phase;
  return tensor;
}

std::array<Real, 2> EffectiveTensor::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Matrix2> eig(0.5 * (m + m.transpose()));
  return {eig.eigenvalues()[0], eig.eigenvalues()[1]};
}

TensorValidation validate_tensor(const EffectiveTensor& t, const EffectiveTensor& t_alt) {
  TensorValidation v;
  v.symmetry_defect = std::max((t.m - t.m.transpose()).cwiseAbs().maxCoeff(),
                               (t_alt.m - t_alt.m.transpose()).cwiseAbs().maxCoeff());
  v.cross_defect = (t.m - t_alt.m).cwiseAbs().maxCoeff();
  v.eigenvalues = t.eigenvalues();
  v.eigenvalues_alt = t_alt.eigenvalues();
  const Real min_eig = std::min(v.eigenvalues[0], v.eigenvalues_alt[0]);
  v.pass = v.symmetry_defect <= 1e-10 && v.cross_defect <= 1e-8 && min_eig >= -1e-10;
  return v;
}

std::string TensorValidation::to_text() const {
  std::ostringstream out;
  out << "symmetry defect " << symmetry_defect << ", cross-formula defect " << cross_defect
      << ", eigenvalues [" << eigenvalues[0] << ", " << eigenvalues[1] << "] vs ["
      << eigenvalues_alt[0] << ", " << eigenvalues_alt[1] << "] -> "
      << (pass ? "pass" : "FAIL");
  return out.str();
}

}  // namespace tridom
