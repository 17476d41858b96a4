#include "tridom/fem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace tridom {

CoefficientTensor::CoefficientTensor(std::vector<std::pair<Real, Matrix2>> pieces)
    : pieces_(std::move(pieces)) {
  if (pieces_.empty()) throw ConfigError("coefficient tensor needs at least one piece");
  Real prev = -1.0;
  for (const auto& [start, m] : pieces_) {
    if (start <= prev || start < 0.0 || start >= 1.0)
      throw ConfigError("coefficient tensor pieces must start at increasing x in [0,1)");
    prev = start;
    if (std::abs(m(0, 1) - m(1, 0)) > 1e-14 * (1.0 + m.cwiseAbs().maxCoeff()))
      throw ConfigError("coefficient tensor must be symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix2> eig(m);
    if (eig.eigenvalues().minCoeff() <= 0.0)
      throw ConfigError("coefficient tensor must have positive eigenvalues");
  }
  if (pieces_.front().first != 0.0) throw ConfigError("first coefficient piece must start at x = 0");
}

CoefficientTensor CoefficientTensor::constant(const Matrix2& m) {
  return CoefficientTensor({{0.0, m}});
}

CoefficientTensor CoefficientTensor::isotropic(Real m) {
  return constant(m * Matrix2::Identity());
}

CoefficientTensor CoefficientTensor::piecewise_x(std::vector<std::pair<Real, Matrix2>> pieces) {
  return CoefficientTensor(std::move(pieces));
}

const Matrix2& CoefficientTensor::at(Real x) const {
  std::size_t k = pieces_.size() - 1;
  while (k > 0 && x < pieces_[k].first) --k;
  return pieces_[k].second;
}

Q1Quadrature::Q1Quadrature(Real hx, Real hy) {
  const Real g = 0.5 / std::sqrt(3.0);
  const std::array<Real, 2> pts = {0.5 - g, 0.5 + g};
  int gp = 0;
  for (Real eta : pts)
    for (Real xi : pts) {
      weight[gp] = 0.25 * hx * hy;
      // local shapes in row-major corner order (see LabeledGrid::element_nodes)
      value[gp] = {(1 - xi) * (1 - eta), xi * (1 - eta), (1 - xi) * eta, xi * eta};
      grad[gp][0] = {-(1 - eta) / hx, -(1 - xi) / hy};
      grad[gp][1] = {(1 - eta) / hx, -xi / hy};
      grad[gp][2] = {-eta / hx, (1 - xi) / hy};
      grad[gp][3] = {eta / hx, xi / hy};
      ++gp;
    }
}

namespace {

SparseMatrix from_triplets(int n, const std::vector<Triplet>& triplets) {
  SparseMatrix A(n, n);
  A.setFromTriplets(triplets.begin(), triplets.end());
  A.makeCompressed();
  return A;
}

}  // namespace

namespace {

template <typename TensorAt>
SparseMatrix assemble_stiffness_impl(const LabeledGrid& grid, PhaseSet phases,
                                     const TensorAt& tensor_at) {
  if (phases.empty()) throw ConfigError("assemble_stiffness: empty phase set");
  const Q1Quadrature quad(grid.hx(), grid.hy());
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(grid.num_elements()) * 16);
  for (int ey = 0; ey < grid.ny(); ++ey)
    for (int ex = 0; ex < grid.nx(); ++ex) {
      if (!phases.contains(grid.element_phase(ex, ey))) continue;
      const Matrix2& m = tensor_at(ex, ey);
      const auto nodes = grid.element_nodes(ex, ey);
      Real k[4][4];
      for (int a = 0; a < 4; ++a)
        for (int b = a; b < 4; ++b) {
          Real v = 0;
          for (int gp = 0; gp < 4; ++gp)
            v += quad.weight[gp] * quad.grad[gp][b].dot(m * quad.grad[gp][a]);
          k[a][b] = v;
          k[b][a] = v;
        }
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) triplets.emplace_back(nodes[a], nodes[b], k[a][b]);
    }
  return from_triplets(grid.num_nodes(), triplets);
}

}  // namespace

SparseMatrix assemble_stiffness(const LabeledGrid& grid, const CoefficientTensor& M,
                                PhaseSet phases) {
  return assemble_stiffness_impl(
      grid, phases, [&](int ex, int ey) -> const Matrix2& { return M.at_element(grid, ex, ey); });
}

SparseMatrix assemble_stiffness(const LabeledGrid& grid, const Matrix2& m, PhaseSet phases) {
  if (std::abs(m(0, 1) - m(1, 0)) > 1e-14 * (1.0 + m.cwiseAbs().maxCoeff()))
    throw ConfigError("assemble_stiffness: tensor must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix2> eig(m);
  if (eig.eigenvalues().minCoeff() < -1e-12)
    throw ConfigError("assemble_stiffness: tensor must be positive semi-definite");
  return assemble_stiffness_impl(grid, phases, [&](int, int) -> const Matrix2& { return m; });
}

SparseMatrix assemble_mass(const LabeledGrid& grid, PhaseSet phases) {
  const Q1Quadrature quad(grid.hx(), grid.hy());
  std::vector<Triplet> triplets;
  for (int ey = 0; ey < grid.ny(); ++ey)
    for (int ex = 0; ex < grid.nx(); ++ex) {
      if (!phases.contains(grid.element_phase(ex, ey))) continue;
      const auto nodes = grid.element_nodes(ex, ey);
      for (int a = 0; a < 4; ++a)
        for (int b = a; b < 4; ++b) {
          Real v = 0;
          for (int gp = 0; gp < 4; ++gp)
            v += quad.weight[gp] * quad.value[gp][a] * quad.value[gp][b];
          triplets.emplace_back(nodes[a], nodes[b], v);
          if (b != a) triplets.emplace_back(nodes[b], nodes[a], v);
        }
    }
  return from_triplets(grid.num_nodes(), triplets);
}

SparseMatrix assemble_interface_mass(const LabeledGrid& grid, InterfaceLabel label) {
  const Real h = grid.hx();
  std::vector<Triplet> triplets;
  for (const auto& e : grid.interface_edges()) {
    if (e.label != label) continue;
    const int p = grid.node(e.ix, e.jy);
    const int q = grid.node(e.ix + 1, e.jy);
    triplets.emplace_back(p, p, h / 3.0);
    triplets.emplace_back(q, q, h / 3.0);
    triplets.emplace_back(p, q, h / 6.0);
    triplets.emplace_back(q, p, h / 6.0);
  }
  return from_triplets(grid.num_nodes(), triplets);
}

Vector lumped_weights(const LabeledGrid& grid, PhaseSet phases) {
  Vector w = Vector::Zero(grid.num_nodes());
  const Real quarter = 0.25 * grid.hx() * grid.hy();
  for (int ey = 0; ey < grid.ny(); ++ey)
    for (int ex = 0; ex < grid.nx(); ++ex) {
      if (!phases.contains(grid.element_phase(ex, ey))) continue;
      for (int p : grid.element_nodes(ex, ey)) w[p] += quarter;
    }
  return w;
}

Vector lumped_weights(const LabeledGrid& grid, InterfaceLabel label) {
  Vector w = Vector::Zero(grid.num_nodes());
  const Real half = 0.5 * grid.hx();
  for (const auto& e : grid.interface_edges()) {
    if (e.label != label) continue;
    w[grid.node(e.ix, e.jy)] += half;
    w[grid.node(e.ix + 1, e.jy)] += half;
  }
  return w;
}

Real integrate(const LabeledGrid& grid, const Vector& field, PhaseSet phases) {
  return lumped_weights(grid, phases).dot(field);
}

Real integrate(const LabeledGrid& grid, const Vector& field, InterfaceLabel label) {
  return lumped_weights(grid, label).dot(field);
}

Vector2 element_gradient(const LabeledGrid& grid, const Vector& field, int ex, int ey) {
  const auto n = grid.element_nodes(ex, ey);
  const Real u0 = field[n[0]], u1 = field[n[1]], u2 = field[n[2]], u3 = field[n[3]];
  return {((u1 + u3) - (u0 + u2)) / (2.0 * grid.hx()),
          ((u2 + u3) - (u0 + u1)) / (2.0 * grid.hy())};
}

namespace {

struct LocalPoint {
  int ex, ey;
  Real xi, eta;
};

LocalPoint locate(const LabeledGrid& grid, Real x, Real y) {
  const Real fx = std::clamp(x / grid.hx(), 0.0, static_cast<Real>(grid.nx()) - 1e-12);
  const Real fy = std::clamp(y / grid.hy(), 0.0, static_cast<Real>(grid.ny()) - 1e-12);
  LocalPoint p;
  p.ex = std::min(static_cast<int>(fx), grid.nx() - 1);
  p.ey = std::min(static_cast<int>(fy), grid.ny() - 1);
  p.xi = fx - p.ex;
  p.eta = fy - p.ey;
  return p;
}

}  // namespace

Real evaluate_q1(const LabeledGrid& grid, const Vector& field, Real x, Real y) {
  const LocalPoint p = locate(grid, x, y);
  const auto n = grid.element_nodes(p.ex, p.ey);
  return field[n[0]] * (1 - p.xi) * (1 - p.eta) + field[n[1]] * p.xi * (1 - p.eta) +
         field[n[2]] * (1 - p.xi) * p.eta + field[n[3]] * p.xi * p.eta;
}

Vector2 gradient_q1(const LabeledGrid& grid, const Vector& field, Real x, Real y) {
  const LocalPoint p = locate(grid, x, y);
  const auto n = grid.element_nodes(p.ex, p.ey);
  const Real u0 = field[n[0]], u1 = field[n[1]], u2 = field[n[2]], u3 = field[n[3]];
  return {((u1 - u0) * (1 - p.eta) + (u3 - u2) * p.eta) / grid.hx(),
          ((u2 - u0) * (1 - p.xi) + (u3 - u1) * p.xi) / grid.hy()};
}

Vector solve_spsd(const SparseMatrix& A, const Vector& b, CgOptions opts) {
  const int n = static_cast<int>(A.rows());
  if (b.size() != n) throw ConfigError("solve_spsd: size mismatch");

  const bool restricted = opts.subspace.size() == n;
  auto mask = [&](Vector& v) {
    if (restricted) v.array() *= opts.subspace.array();
  };

  Vector kernel = opts.kernel;
  if (opts.mean_zero && kernel.size() == 0)
    kernel = restricted ? opts.subspace : Vector(Vector::Ones(n));
  Vector weight = opts.weight.size() == n ? opts.weight : kernel;
  const bool project = kernel.size() == n;
  const Real weight_dot_kernel = project ? weight.dot(kernel) : 0.0;
  if (project && weight_dot_kernel <= 0.0)
    throw ConfigError("solve_spsd: projection weight not positive on the kernel");
  auto project_out = [&](Vector& v) {
    if (project) v -= (weight.dot(v) / weight_dot_kernel) * kernel;
  };

  Vector rhs = b;
  mask(rhs);
  const Real b_norm = rhs.norm();
  if (b_norm == 0.0) return Vector::Zero(n);

  if (opts.mean_zero) {
    const Real defect = std::abs(kernel.dot(rhs)) / (kernel.norm() * b_norm);
    if (defect > std::max(100.0 * opts.tol, 1e-12)) {
      std::ostringstream msg;
      msg << "solve_spsd: right-hand side incompatible with the mean-zero constraint "
          << "(relative kernel component " << defect << ")";
      throw CompatibilityError(msg.str());
    }
  }

  // Jacobi preconditioner; unit entries on empty rows keep them inert.
  Vector inv_diag(n);
  const Vector diag = A.diagonal();
  for (int i = 0; i < n; ++i) inv_diag[i] = diag[i] > 0.0 ? 1.0 / diag[i] : 1.0;

  const int max_iter = opts.max_iter > 0
                           ? opts.max_iter
                           : static_cast<int>(20.0 * std::sqrt(static_cast<Real>(n))) + 1000;

  Vector x = Vector::Zero(n);
  Vector r = rhs;
  Vector z = inv_diag.asDiagonal() * r;
  mask(z);
  Vector p = z;
  Real rz = r.dot(z);
  Real res = r.norm();

  auto true_residual = [&]() {
    Vector t = rhs - A * x;
    mask(t);
    return t.norm();
  };

  for (int it = 0; it < max_iter; ++it) {
    if (res <= opts.tol * b_norm) {
      // guard against recurrence drift: certify with the true residual
      const Real exact = true_residual();
      if (exact <= opts.tol * b_norm) return x;
      r = rhs - A * x;
      mask(r);
      z = inv_diag.asDiagonal() * r;
      mask(z);
      p = z;
      rz = r.dot(z);
      res = exact;
    }
    Vector Ap = A * p;
    mask(Ap);
    const Real pAp = p.dot(Ap);
    if (!(pAp > 0.0)) {
      std::ostringstream msg;
      msg << "solve_spsd: non-positive curvature encountered at iteration " << it
          << " (relative residual " << res / b_norm << ")";
      throw SolverError(msg.str(), res / b_norm, it);
    }
    const Real alpha = rz / pAp;
    x += alpha * p;
    project_out(x);
    r -= alpha * Ap;
    z = inv_diag.asDiagonal() * r;
    mask(z);
    const Real rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
    res = r.norm();
  }
  if (res <= opts.tol * b_norm && true_residual() <= opts.tol * b_norm) return x;
  std::ostringstream msg;
  msg << "solve_spsd: no convergence within " << max_iter << " iterations (relative residual "
      << res / b_norm << ")";
  throw SolverError(msg.str(), res / b_norm, max_iter);
}

Vector solve_spsd_mean_zero(const SparseMatrix& A, const Vector& b, const LabeledGrid& grid,
                            PhaseSet phases, Real tol, int max_iter) {
  CgOptions opts;
  opts.tol = tol;
  opts.max_iter = max_iter;
  opts.mean_zero = true;
  opts.subspace = grid.phase_node_mask(phases);
  opts.kernel = opts.subspace;
  opts.weight = lumped_weights(grid, phases);
  return solve_spsd(A, b, std::move(opts));
}

}  // namespace tridom
