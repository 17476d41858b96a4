#ifndef TRIDOM_UNFOLDING_HPP
#define TRIDOM_UNFOLDING_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tridom/cell_problems.hpp"
#include "tridom/fem.hpp"
#include "tridom/geometry.hpp"
#include "tridom/macro_solver.hpp"
#include "tridom/micro_solver.hpp"

namespace tridom {

/// Cell-wise unfolded field: one row per eps-cell of the tiling, one column
/// per reference-cell node in local (n+1)^2 row-major indexing.  For
/// boundary unfoldings only trace-node columns carry values.  The domain is
/// the unit square with eps = 1/N, so every cell is whole (the boundary
/// layer that would be zero-filled is empty).
struct UnfoldedField {
  enum class Kind { Volume, Boundary };
  Real eps = 1.0;
  int cells = 1;  // cells per axis
  int ref_n = 1;  // reference elements per axis
  Kind kind = Kind::Volume;
  Eigen::MatrixXd values;  // cells^2 x (ref_n+1)^2

  int local_node(int i, int j) const { return j * (ref_n + 1) + i; }
  int cell_index(int cx, int cy) const { return cy * cells + cx; }
};

/// Exact per-cell re-indexing of a nodal field on the tiled grid onto
/// reference-cell coordinates (the grids are nested; no interpolation).
UnfoldedField unfold_volume(const LabeledGrid& tiled, const Vector& field, Real eps,
                            int n_per_cell);

/// Boundary variant: re-indexes an interface trace onto the reference
/// interface nodes of the given label.
UnfoldedField unfold_boundary(const LabeledGrid& tiled, const Vector& trace, Real eps,
                              int n_per_cell, const CellGeometrySpec& spec, InterfaceLabel label);

/// Squared L2 norms with quadrature exact for the Q1/P1 interpolants, so the
/// unfolding norm identities hold at the discrete level.
Real volume_norm_sq(const UnfoldedField& f, const CellGeometrySpec& spec, PhaseSet phases);
Real boundary_norm_sq(const UnfoldedField& f, const CellGeometrySpec& spec, InterfaceLabel label);

/// Average of the unfolded values over Y per cell (exact quadrature).
Vector cell_averages(const UnfoldedField& f);

struct IdentityCheck {
  std::string name;
  Real defect = 0;
  bool pass = false;
};

struct IdentityReport {
  Real eps = 0;
  int resolution = 0;
  std::vector<IdentityCheck> checks;
  bool all_passed() const;
  std::string to_text() const;
};

/// Verifies the unfolding operator identities on randomized fields: linearity,
/// the trace product rule, the volume and boundary norm identities and the
/// gradient rule grad_y(T u) = eps T(grad_x u) on element-center difference
/// quotients.  All are exact re-indexing facts; defects above 1e-12 indicate
/// an indexing bug.
IdentityReport verify_identities(const CellGeometrySpec& spec, Real eps, int resolution,
                                 std::uint64_t seed);

struct MicroMacroError {
  Real eps = 0;
  Real t = 0;
  Real e_v1 = 0, e_v2 = 0, e_s = 0;
  Real e_ui1 = 0, e_ui2 = 0, e_ue = 0;
};

/// L2 distances between the unfolded microscopic solution and the macroscopic
/// one injected as y-constant (evaluated at cell centers):
///   e_v^k = ||T_b(v_eps^k) - v^k||_{Omega x Gamma^k},  etc.
/// Throws ConfigError when the two states are at different times.
MicroMacroError micro_macro_error(const MicroState& micro, const MicroProblem& micro_problem,
                                  const MacroState& macro, const MacroProblem& macro_problem,
                                  const CellGeometrySpec& spec, int n_per_cell);

struct GradientErrorRecord {
  Real eps = 0;
  Real t = 0;
  // per phase: plain two-scale gradient error and the corrector-corrected one
  Real plain_i1 = 0, corrected_i1 = 0;
  Real plain_i2 = 0, corrected_i2 = 0;
  Real plain_e = 0, corrected_e = 0;
};

/// Gradient-level errors ||T(grad u_eps) - (grad u + grad_y chi^q d_q u)||
/// per phase, with and without the corrector term.  No rate is asserted
/// anywhere; these are recorded for inspection.
GradientErrorRecord micro_macro_gradient_error(
    const MicroState& micro, const MicroProblem& micro_problem, const MacroState& macro,
    const MacroProblem& macro_problem, const CellGeometrySpec& spec, int n_per_cell,
    const LabeledGrid& reference_grid, const CorrectorSet& chi_i1, const CorrectorSet& chi_i2,
    const CorrectorSet& chi_e);

}  // namespace tridom

#endif
