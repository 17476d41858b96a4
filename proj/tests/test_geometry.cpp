#include <doctest.h>

#include <random>
#include <set>

#include "tridom/geometry.hpp"

using namespace tridom;

namespace {
const CellGeometrySpec kBand{CellLayout::Band, 0.25, 0.75};
}

TEST_CASE("band reference cell labels rows and the gap junction") {
  const LabeledGrid grid = build_reference_cell(kBand, 8);
  CHECK(grid.num_elements() == 64);
  CHECK(grid.periodic_x());
  CHECK(grid.periodic_y());
  for (int ex = 0; ex < 8; ++ex) {
    for (int ey : {0, 1, 6, 7}) CHECK(grid.element_phase(ex, ey) == Phase::Extra);
    for (int ey : {2, 3}) CHECK(grid.element_phase(ex, ey) == Phase::Intra2);
    for (int ey : {4, 5}) CHECK(grid.element_phase(ex, ey) == Phase::Intra1);
  }
  const auto gap = grid.edges_with(InterfaceLabel::Gap);
  REQUIRE(gap.size() == 8);
  for (const auto& e : gap) CHECK(e.jy == 4);  // y = 0.5
  CHECK(grid.edges_with(InterfaceLabel::Membrane1).size() == 8);  // y = 0.75
  CHECK(grid.edges_with(InterfaceLabel::Membrane2).size() == 8);  // y = 0.25
}

TEST_CASE("full cell is a single phase without interfaces") {
  const LabeledGrid grid = build_reference_cell({CellLayout::FullCell, 0.25, 0.75}, 4);
  CHECK(grid.num_elements() == 16);
  for (int ey = 0; ey < 4; ++ey)
    for (int ex = 0; ex < 4; ++ex) CHECK(grid.element_phase(ex, ey) == Phase::Extra);
  CHECK(grid.interface_edges().empty());
}

TEST_CASE("misaligned band feature names the offending coordinate") {
  CHECK_THROWS_WITH_AS(build_reference_cell({CellLayout::Band, 0.3, 0.7}, 8),
                       doctest::Contains("band_lo"), AlignmentError);
}

TEST_CASE("tiling counts interfaces per cell row") {
  const LabeledGrid grid = tile_microstructure(kBand, 0.5, 8);
  CHECK(grid.nx() == 16);
  CHECK(grid.ny() == 16);
  CHECK_FALSE(grid.periodic_x());
  CHECK(grid.zero_flux_exterior());
  Real gap_length = 0;
  for (const auto& e : grid.edges_with(InterfaceLabel::Gap)) {
    (void)e;
    gap_length += grid.hx();
  }
  CHECK(gap_length == doctest::Approx(2.0).epsilon(1e-14));  // two cell rows, length 1 each
}

TEST_CASE("tiling preserves volume fractions") {
  const LabeledGrid grid = tile_microstructure(kBand, 0.25, 4);
  const GeometricMeasures m = measures(grid);
  CHECK(m.vol_i1 == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(m.vol_i2 == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(m.vol_e == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("non-reciprocal eps is rejected") {
  CHECK_THROWS_AS(tile_microstructure(kBand, 0.3, 8), ConfigError);
}

TEST_CASE("measures of the band reference cell") {
  const GeometricMeasures m = measures(build_reference_cell(kBand, 8));
  CHECK(m.vol_i1 == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(m.len_g1 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m.mu_1 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m.mu_2 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m.mu_g == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("full cell has no interface measures") {
  const GeometricMeasures m = measures(build_reference_cell({CellLayout::FullCell, 0.25, 0.75}, 8));
  CHECK(m.mu_1 == 0.0);
  CHECK(m.mu_2 == 0.0);
  CHECK(m.mu_g == 0.0);
  CHECK(m.vol_e == doctest::Approx(1.0));
}

TEST_CASE("measures are resolution independent") {
  const GeometricMeasures a = measures(build_reference_cell(kBand, 8));
  const GeometricMeasures b = measures(build_reference_cell(kBand, 32));
  CHECK(a.vol_i1 == b.vol_i1);
  CHECK(a.vol_i2 == b.vol_i2);
  CHECK(a.vol_e == b.vol_e);
  CHECK(a.len_g1 == b.len_g1);
  CHECK(a.len_g12 == b.len_g12);
  CHECK(a.mu_g == b.mu_g);
}

TEST_CASE("volumes partition the cell exactly for random aligned specs") {
  std::mt19937_64 rng(7);
  for (int n : {4, 8, 16}) {
    for (int trial = 0; trial < 20; ++trial) {
      // aligned fractions with an even index sum so the midline is aligned too
      std::uniform_int_distribution<int> pick(1, n - 1);
      int lo = pick(rng), hi = pick(rng);
      if (lo > hi) std::swap(lo, hi);
      if (lo == hi || (lo + hi) % 2 != 0) continue;
      const CellGeometrySpec spec{CellLayout::Band, Real(lo) / n, Real(hi) / n};
      const GeometricMeasures m = measures(build_reference_cell(spec, n));
      CHECK(m.vol_i1 + m.vol_i2 + m.vol_e == doctest::Approx(1.0).epsilon(1e-15));
    }
  }
}

TEST_CASE("tiled labels restrict to the reference pattern in every cell window") {
  const int n = 8;
  const LabeledGrid ref = build_reference_cell(kBand, n);
  const LabeledGrid tiled = tile_microstructure(kBand, 0.25, n);
  for (int cy = 0; cy < 4; ++cy)
    for (int cx = 0; cx < 4; ++cx)
      for (int ey = 0; ey < n; ++ey)
        for (int ex = 0; ex < n; ++ex)
          CHECK(tiled.element_phase(cx * n + ex, cy * n + ey) == ref.element_phase(ex, ey));
}

TEST_CASE("interface edges carry one label each") {
  for (const LabeledGrid& grid :
       {build_reference_cell(kBand, 8), tile_microstructure(kBand, 0.25, 8)}) {
    std::set<std::pair<int, int>> seen;
    for (const auto& e : grid.interface_edges()) {
      const bool fresh = seen.insert({e.ix, e.jy}).second;
      CHECK(fresh);
    }
  }
}
