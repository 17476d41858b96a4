#ifndef TRIDOM_FEM_HPP
#define TRIDOM_FEM_HPP

#include <functional>
#include <utility>
#include <vector>

#include "tridom/geometry.hpp"
#include "tridom/types.hpp"

namespace tridom {

/// Symmetric uniformly elliptic 2x2 conductivity, constant or
/// piecewise-constant in x.  Pieces cover [0,1) by start abscissa; an element
/// takes the value of the piece containing its center.  Construction checks
/// symmetry and that eigenvalues are positive for every piece.
class CoefficientTensor {
 public:
  static CoefficientTensor constant(const Matrix2& m);
  static CoefficientTensor isotropic(Real m);
  /// pieces: (start_x, value); starts must begin at 0 and increase.
  static CoefficientTensor piecewise_x(std::vector<std::pair<Real, Matrix2>> pieces);

  const Matrix2& at(Real x) const;
  const Matrix2& at_element(const LabeledGrid& grid, int ex, int ey) const {
    return at(grid.element_center(ex, ey)[0]);
  }
  bool is_constant() const { return pieces_.size() == 1; }
  const std::vector<std::pair<Real, Matrix2>>& pieces() const { return pieces_; }

 private:
  explicit CoefficientTensor(std::vector<std::pair<Real, Matrix2>> pieces);
  std::vector<std::pair<Real, Matrix2>> pieces_;
};

/// Tabulated Q1 shape data at the 2x2 Gauss points of one element; exact for
/// all integrands arising from products of Q1 gradients.
struct Q1Quadrature {
  // weights include the element area factor hx*hy/4
  std::array<Real, 4> weight;
  // grad[g][a] = gradient of shape a at gauss point g
  std::array<std::array<Vector2, 4>, 4> grad;
  // value[g][a] = shape a at gauss point g
  std::array<std::array<Real, 4>, 4> value;

  Q1Quadrature(Real hx, Real hy);
};

/// Stiffness over the elements whose phase lies in `phases`:
///   A(p,q) = sum_elem int_elem (M grad N_p) . grad N_q.
/// Exactly symmetric as assembled; rows of untouched nodes are empty.
SparseMatrix assemble_stiffness(const LabeledGrid& grid, const CoefficientTensor& M,
                                PhaseSet phases);

/// Same assembly for a constant, possibly singular tensor (the homogenized
/// tensors are positive semi-definite only).  Requires symmetry and
/// eigenvalues >= -1e-12.
SparseMatrix assemble_stiffness(const LabeledGrid& grid, const Matrix2& m, PhaseSet phases);

/// Q1 volume mass over the phase set (consistent, exactly symmetric).
SparseMatrix assemble_mass(const LabeledGrid& grid, PhaseSet phases);

/// 1D linear-element mass summed over the edges carrying `label`; the empty
/// label set yields the zero operator.
SparseMatrix assemble_interface_mass(const LabeledGrid& grid, InterfaceLabel label);

/// Nodal weights w with w.dot(u) = exact integral of the Q1 interpolant of u
/// over the region.
Vector lumped_weights(const LabeledGrid& grid, PhaseSet phases);
Vector lumped_weights(const LabeledGrid& grid, InterfaceLabel label);

Real integrate(const LabeledGrid& grid, const Vector& field, PhaseSet phases);
Real integrate(const LabeledGrid& grid, const Vector& field, InterfaceLabel label);

/// Gradient of the Q1 interpolant at the element center.
Vector2 element_gradient(const LabeledGrid& grid, const Vector& field, int ex, int ey);

/// Point evaluation of the Q1 interpolant (and its gradient) at (x, y),
/// clamped to the grid domain.
Real evaluate_q1(const LabeledGrid& grid, const Vector& field, Real x, Real y);
Vector2 gradient_q1(const LabeledGrid& grid, const Vector& field, Real x, Real y);

struct CgOptions {
  Real tol = 1e-10;
  int max_iter = 0;  // 0: 20*sqrt(n) + 1000
  bool mean_zero = false;
  /// 0/1 node mask restricting the solve; empty = all nodes.
  Vector subspace;
  /// Optional kernel direction and projection weight for singular systems.
  /// With mean_zero and both empty, the kernel is the subspace indicator and
  /// the weight the supplied mass weights (see solve_spsd overloads).
  Vector kernel;
  Vector weight;
};

/// Jacobi-preconditioned conjugate gradients for symmetric positive
/// semi-definite operators.  Stops at ||A x - b|| <= tol * ||b||.  When a
/// kernel direction is configured, every iterate is projected so that
/// weight . x = 0, which realizes the zero-mean normalization without
/// breaking symmetry.  Throws SolverError on max_iter (carrying the final
/// residual) and CompatibilityError when mean_zero is requested with a
/// right-hand side not orthogonal to the kernel.
Vector solve_spsd(const SparseMatrix& A, const Vector& b, CgOptions opts);

/// Convenience: mean-zero solve over a phase subdomain of the grid.
Vector solve_spsd_mean_zero(const SparseMatrix& A, const Vector& b, const LabeledGrid& grid,
                            PhaseSet phases, Real tol = 1e-10, int max_iter = 0);

}  // namespace tridom

#endif
