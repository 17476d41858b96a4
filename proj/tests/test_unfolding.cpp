#include <doctest.h>

#include <cmath>
#include <random>

#include "tridom/unfolding.hpp"

using namespace tridom;

namespace {

const CellGeometrySpec kBand{CellLayout::Band, 0.25, 0.75};

Vector random_field(const LabeledGrid& grid, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<Real> uni(-1.0, 1.0);
  Vector v(grid.num_nodes());
  for (int p = 0; p < v.size(); ++p) v[p] = uni(rng);
  return v;
}

}  // namespace

TEST_CASE("identity suite passes at every desk scale") {
  for (Real eps : {0.5, 0.25, 0.125})
    for (int resolution : {4, 8}) {
      const IdentityReport report = verify_identities(kBand, eps, resolution, 123);
      INFO(report.to_text());
      CHECK(report.all_passed());
      for (const auto& check : report.checks) CHECK(check.defect <= 1e-12);
    }
}

TEST_CASE("constants unfold to constants") {
  const LabeledGrid grid = tile_microstructure(kBand, 0.25, 8);
  const Vector c = Vector::Constant(grid.num_nodes(), 3.25);
  const UnfoldedField tu = unfold_volume(grid, c, 0.25, 8);
  CHECK((tu.values.array() - 3.25).abs().maxCoeff() == 0.0);
}

TEST_CASE("periodic fields unfold independently of the cell index") {
  const int n = 8, cells = 4;
  const LabeledGrid grid = tile_microstructure(kBand, 0.25, n);
  // sample a Y-periodic nodal pattern and tile it
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<Real> uni(-1.0, 1.0);
  Eigen::MatrixXd pattern(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) pattern(i, j) = uni(rng);
  Vector field(grid.num_nodes());
  for (int j = 0; j <= grid.ny(); ++j)
    for (int i = 0; i <= grid.nx(); ++i)
      field[grid.node(i, j)] = pattern(i % n, j % n);
  const UnfoldedField tu = unfold_volume(grid, field, 0.25, n);
  for (int row = 1; row < cells * cells; ++row)
    CHECK((tu.values.row(row) - tu.values.row(0)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("unfolding then averaging recovers per-cell averages") {
  const int n = 8;
  const LabeledGrid grid = tile_microstructure(kBand, 0.5, n);
  const Vector field = random_field(grid, 21);
  const UnfoldedField tu = unfold_volume(grid, field, 0.5, n);
  const Vector averages = cell_averages(tu);
  // direct-summation oracle over the tiled elements of each cell
  for (int cy = 0; cy < 2; ++cy)
    for (int cx = 0; cx < 2; ++cx) {
      Real integral = 0;
      for (int ey = 0; ey < n; ++ey)
        for (int ex = 0; ex < n; ++ex) {
          const auto nodes = grid.element_nodes(cx * n + ex, cy * n + ey);
          const Real quarter = 0.25 * grid.hx() * grid.hy();
          for (int p : nodes) integral += quarter * field[p];
        }
      const Real cell_area = 0.25;
      CHECK(averages[cy * 2 + cx] ==
            doctest::Approx(integral / cell_area).epsilon(1e-13));
    }
}

TEST_CASE("boundary unfolding carries only trace nodes") {
  const LabeledGrid grid = tile_microstructure(kBand, 0.5, 8);
  const Vector mask = grid.interface_node_mask(InterfaceLabel::Gap);
  const Vector trace = mask.cwiseProduct(random_field(grid, 4));
  const UnfoldedField tb = unfold_boundary(grid, trace, 0.5, 8, kBand, InterfaceLabel::Gap);
  // gap trace lives on the local row j = 4 of an 8-element reference cell
  for (int col = 0; col < tb.values.cols(); ++col) {
    const int j = col / 9;
    if (j != 4) CHECK(tb.values.col(col).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("resolution mismatch is rejected") {
  const LabeledGrid grid = tile_microstructure(kBand, 0.5, 8);
  const Vector field = Vector::Zero(grid.num_nodes());
  CHECK_THROWS_AS(unfold_volume(grid, field, 0.25, 8), ConfigError);
  CHECK_THROWS_AS(unfold_volume(grid, field, 0.5, 4), ConfigError);
}

TEST_CASE("micro-macro error vanishes for matching zero states") {
  const LabeledGrid tiled = tile_microstructure(kBand, 0.5, 8);
  const LabeledGrid macro(8, 8, 1.0, 1.0, false, false,
                          std::vector<Phase>(64, Phase::Extra));
  MicroProblem up;
  up.grid = &tiled;
  up.eps = 0.5;
  MacroProblem mp;
  mp.grid = &macro;
  const MicroStepper stepper(up);
  const MicroState micro =
      make_micro_state(tiled, stepper, nullptr, nullptr, nullptr, nullptr, nullptr);
  const MacroState mac = make_macro_state(macro, nullptr, nullptr, nullptr, nullptr);
  const MicroMacroError e = micro_macro_error(micro, up, mac, mp, kBand, 8);
  CHECK(e.e_v1 == 0.0);
  CHECK(e.e_s == 0.0);
  CHECK(e.e_ue == 0.0);
}

TEST_CASE("micro-macro error rejects mismatched times") {
  const LabeledGrid tiled = tile_microstructure(kBand, 0.5, 8);
  const LabeledGrid macro(8, 8, 1.0, 1.0, false, false, std::vector<Phase>(64, Phase::Extra));
  MicroProblem up;
  up.grid = &tiled;
  up.eps = 0.5;
  MacroProblem mp;
  mp.grid = &macro;
  const MicroStepper stepper(up);
  MicroState micro = make_micro_state(tiled, stepper, nullptr, nullptr, nullptr, nullptr, nullptr);
  MacroState mac = make_macro_state(macro, nullptr, nullptr, nullptr, nullptr);
  micro.t = 0.5;
  CHECK_THROWS_AS(micro_macro_error(micro, up, mac, mp, kBand, 8), ConfigError);
}

TEST_CASE("initial sampling error is bounded by the data regularity") {
  auto smooth = [](Real x, Real y) { return std::sin(M_PI * x) * std::cos(M_PI * y); };
  for (Real eps : {0.5, 0.25}) {
    const LabeledGrid tiled = tile_microstructure(kBand, eps, 8);
    const LabeledGrid macro(16, 16, 1.0, 1.0, false, false,
                            std::vector<Phase>(256, Phase::Extra));
    MicroProblem up;
    up.grid = &tiled;
    up.eps = eps;
    MacroProblem mp;
    mp.grid = &macro;
    const MicroStepper stepper(up);
    const MicroState micro =
        make_micro_state(tiled, stepper, smooth, nullptr, nullptr, nullptr, nullptr);
    const MacroState mac = make_macro_state(macro, smooth, nullptr, nullptr, nullptr);
    const MicroMacroError e = micro_macro_error(micro, up, mac, mp, kBand, 8);
    // both states sample the same C^1 function; the defect is injection error
    INFO("eps = " << eps << "  e_v1 = " << e.e_v1 << "  e_ui1 = " << e.e_ui1);
    CHECK(e.e_v1 <= 2.0 * eps);
    CHECK(e.e_ui1 <= 2.0 * eps);
  }
}

TEST_CASE("gradient error records are finite and tagged") {
  const LabeledGrid tiled = tile_microstructure(kBand, 0.5, 8);
  const LabeledGrid macro(8, 8, 1.0, 1.0, false, false, std::vector<Phase>(64, Phase::Extra));
  const LabeledGrid ref = build_reference_cell(kBand, 16);
  MicroProblem up;
  up.grid = &tiled;
  up.eps = 0.5;
  MacroProblem mp;
  mp.grid = &macro;
  const MicroStepper stepper(up);
  auto smooth = [](Real x, Real y) { return std::cos(M_PI * x) * std::cos(M_PI * y); };
  const MicroState micro =
      make_micro_state(tiled, stepper, smooth, nullptr, nullptr, nullptr, nullptr);
  const MacroState mac = make_macro_state(macro, smooth, nullptr, nullptr, nullptr);
  const CorrectorSet chi_i1 =
      solve_correctors(ref, CoefficientTensor::isotropic(1.0), {Phase::Intra1});
  const CorrectorSet chi_i2 =
      solve_correctors(ref, CoefficientTensor::isotropic(1.0), {Phase::Intra2});
  const CorrectorSet chi_e =
      solve_correctors(ref, CoefficientTensor::isotropic(1.0), {Phase::Extra});
  const GradientErrorRecord rec = micro_macro_gradient_error(micro, up, mac, mp, kBand, 8, ref,
                                                             chi_i1, chi_i2, chi_e);
  CHECK(rec.eps == 0.5);
  CHECK(std::isfinite(rec.plain_i1));
  CHECK(std::isfinite(rec.corrected_i1));
  CHECK(std::isfinite(rec.plain_e));
  CHECK(rec.plain_i1 >= 0.0);
}
