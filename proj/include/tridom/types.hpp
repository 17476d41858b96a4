#ifndef TRIDOM_TYPES_HPP
#define TRIDOM_TYPES_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace tridom {

using Real = double;
using Vector = Eigen::VectorXd;
using Matrix2 = Eigen::Matrix2d;
using Vector2 = Eigen::Vector2d;
using SparseMatrix = Eigen::SparseMatrix<Real>;
using Triplet = Eigen::Triplet<Real>;

/// Scalar field of (t, x, y); a null function means identically zero.
using SourceFn = std::function<Real(Real, Real, Real)>;

/// Volume phases of the cell: two intracellular media and the extracellular one.
enum class Phase : std::uint8_t { Intra1 = 0, Intra2 = 1, Extra = 2 };

/// Interface families: the two sarcolemma membranes and the gap junction.
enum class InterfaceLabel : std::uint8_t { Membrane1 = 0, Membrane2 = 1, Gap = 2 };

inline const char* to_string(Phase p) {
  switch (p) {
    case Phase::Intra1: return "intra1";
    case Phase::Intra2: return "intra2";
    default: return "extra";
  }
}

inline const char* to_string(InterfaceLabel l) {
  switch (l) {
    case InterfaceLabel::Membrane1: return "membrane1";
    case InterfaceLabel::Membrane2: return "membrane2";
    default: return "gap";
  }
}

/// Small set of phases, used to restrict assembly and quadrature.
class PhaseSet {
 public:
  constexpr PhaseSet() = default;
  constexpr PhaseSet(std::initializer_list<Phase> phases) {
    for (Phase p : phases) flags_[static_cast<std::size_t>(p)] = true;
  }
  static constexpr PhaseSet all() { return {Phase::Intra1, Phase::Intra2, Phase::Extra}; }

  constexpr bool contains(Phase p) const { return flags_[static_cast<std::size_t>(p)]; }
  constexpr bool empty() const { return !flags_[0] && !flags_[1] && !flags_[2]; }

  std::string name() const {
    std::string s;
    for (Phase p : {Phase::Intra1, Phase::Intra2, Phase::Extra})
      if (contains(p)) {
        if (!s.empty()) s += "+";
        s += to_string(p);
      }
    return s.empty() ? "none" : s;
  }

 private:
  std::array<bool, 3> flags_{false, false, false};
};

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A geometric feature does not fall on a grid line.
struct AlignmentError : Error {
  using Error::Error;
};

/// Invalid or inconsistent run configuration.
struct ConfigError : Error {
  using Error::Error;
};

/// An iterative solve failed; carries the last relative residual.
struct SolverError : Error {
  SolverError(const std::string& what, Real residual, int iterations)
      : Error(what), residual(residual), iterations(iterations) {}
  Real residual = 0;
  int iterations = 0;
};

/// Right-hand side not orthogonal to the constraint kernel.
struct CompatibilityError : Error {
  using Error::Error;
};

}  // namespace tridom

#endif
