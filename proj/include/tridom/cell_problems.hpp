#ifndef TRIDOM_CELL_PROBLEMS_HPP
#define TRIDOM_CELL_PROBLEMS_HPP

#include <array>
#include <string>

#include "tridom/fem.hpp"

namespace tridom {

/// Periodic correctors chi^1, chi^2 on one phase of the reference cell,
/// normalized to zero mean over the phase.
struct CorrectorSet {
  PhaseSet phase;
  std::array<Vector, 2> chi;
};

enum class TensorFormula { DivergenceForm, EnergyForm };

inline const char* to_string(TensorFormula f) {
  return f == TensorFormula::DivergenceForm ? "divergence" : "energy";
}

struct EffectiveTensor {
  Matrix2 m = Matrix2::Zero();
  TensorFormula formula = TensorFormula::DivergenceForm;
  PhaseSet phase;

  std::array<Real, 2> eigenvalues() const;
};

/// Solves the corrector problem on the phase for unit direction q (0 or 1):
/// periodic, phase-zero-mean chi with
///   stiffness(phase) chi = - int_phase (M e_q) . grad(test),
/// the interface flux condition being natural.
Vector solve_corrector(const LabeledGrid& grid, const CoefficientTensor& M, PhaseSet phase, int q,
                       Real tol = 1e-10);

CorrectorSet solve_correctors(const LabeledGrid& grid, const CoefficientTensor& M, PhaseSet phase,
                              Real tol = 1e-10);

/// Homogenized conductivity by the chosen formula, integrated with the same
/// Gauss rule as assembly.  DivergenceForm averages M (e_q + grad chi^q);
/// EnergyForm averages (e_p + grad chi^p) . M (e_q + grad chi^q) and is
/// symmetric by construction.
EffectiveTensor effective_tensor(const LabeledGrid& grid, const CoefficientTensor& M,
                                 PhaseSet phase, const CorrectorSet& correctors,
                                 TensorFormula formula);

struct TensorValidation {
  Real symmetry_defect = 0;
  Real cross_defect = 0;
  std::array<Real, 2> eigenvalues{0, 0};
  std::array<Real, 2> eigenvalues_alt{0, 0};
  bool pass = false;
  std::string to_text() const;
};

/// Compares the two formulas: symmetry defect <= 1e-8 is required of both,
/// entrywise agreement <= 1e-8, and eigenvalues >= -1e-10.
TensorValidation validate_tensor(const EffectiveTensor& t, const EffectiveTensor& t_alt);

}  // namespace tridom

#endif
