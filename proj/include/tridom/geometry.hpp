#ifndef TRIDOM_GEOMETRY_HPP
#define TRIDOM_GEOMETRY_HPP

#include <optional>
#include <vector>

#include "tridom/types.hpp"

namespace tridom {

enum class CellLayout { Band, FullCell, LaminateX };

/// Description of the periodic reference cell Y = [0,1]^2.
///
/// The Band layout stacks two intracellular half-bands in y, sharing the gap
/// junction at mid = (band_lo + band_hi)/2, with extracellular strips below
/// band_lo and above band_hi.  FullCell and LaminateX assign a single phase
/// to the whole cell (LaminateX differs only in how callers attach a
/// piecewise coefficient to it).
struct CellGeometrySpec {
  CellLayout layout = CellLayout::Band;
  Real band_lo = 0.25;
  Real band_hi = 0.75;

  Real band_mid() const { return 0.5 * (band_lo + band_hi); }
  /// Throws ConfigError if the band fractions are out of order or range.
  void validate() const;
};

/// One labeled interface edge.  All interfaces of the supported layouts are
/// horizontal element edges: the edge spans geometric nodes (ix, jy) and
/// (ix+1, jy) and separates element row jy-1 (below) from row jy (above).
struct InterfaceEdge {
  int ix = 0;
  int jy = 0;
  InterfaceLabel label = InterfaceLabel::Gap;
};

struct GeometricMeasures {
  Real vol_i1 = 0, vol_i2 = 0, vol_e = 0;
  Real len_g1 = 0, len_g2 = 0, len_g12 = 0;
  Real mu_1 = 0, mu_2 = 0, mu_g = 0;
};

/// Uniform rectangular grid over the reference cell or an eps-tiled domain,
/// with per-element phase labels and labeled interface edges.  Periodic axes
/// identify opposite-side nodes to a single unknown.  Immutable after
/// construction.
class LabeledGrid {
 public:
  LabeledGrid(int nx, int ny, Real lx, Real ly, bool periodic_x, bool periodic_y,
              std::vector<Phase> element_phase);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  Real hx() const { return hx_; }
  Real hy() const { return hy_; }
  bool periodic_x() const { return periodic_x_; }
  bool periodic_y() const { return periodic_y_; }
  /// Non-periodic grids model a domain with a zero-flux exterior boundary.
  bool zero_flux_exterior() const { return !periodic_x_ && !periodic_y_; }

  int num_elements() const { return nx_ * ny_; }
  int num_nodes() const { return nodes_x_ * nodes_y_; }
  int nodes_x() const { return nodes_x_; }
  int nodes_y() const { return nodes_y_; }

  Phase element_phase(int ex, int ey) const { return phase_[static_cast<std::size_t>(ey) * nx_ + ex]; }

  /// Identified node id of geometric node (i, j), i in [0, nx], j in [0, ny].
  int node(int i, int j) const {
    if (periodic_x_ && i == nx_) i = 0;
    if (periodic_y_ && j == ny_) j = 0;
    return j * nodes_x_ + i;
  }

  /// Corner nodes of element (ex, ey) in row-major local order:
  /// (ex,ey), (ex+1,ey), (ex,ey+1), (ex+1,ey+1).
  std::array<int, 4> element_nodes(int ex, int ey) const {
    return {node(ex, ey), node(ex + 1, ey), node(ex, ey + 1), node(ex + 1, ey + 1)};
  }

  Vector2 element_center(int ex, int ey) const {
    return {(ex + 0.5) * hx_, (ey + 0.5) * hy_};
  }
  Vector2 node_position(int i, int j) const { return {i * hx_, j * hy_}; }

  const std::vector<InterfaceEdge>& interface_edges() const { return edges_; }
  std::vector<InterfaceEdge> edges_with(InterfaceLabel label) const;

  /// 0/1 mask over nodes touched by at least one element of the phase set.
  Vector phase_node_mask(PhaseSet phases) const;
  /// 0/1 mask over nodes lying on edges with the given label.
  Vector interface_node_mask(InterfaceLabel label) const;
  std::vector<int> interface_nodes(InterfaceLabel label) const;

 private:
  int nx_, ny_;
  Real hx_, hy_;
  bool periodic_x_, periodic_y_;
  int nodes_x_, nodes_y_;
  std::vector<Phase> phase_;
  std::vector<InterfaceEdge> edges_;

  void build_interface_edges();
};

/// Builds the labeled reference-cell grid at n elements per axis, periodic on
/// both axes.  Throws AlignmentError when a band coordinate (band_lo, mid,
/// band_hi) does not fall on a grid line, naming the offending coordinate.
LabeledGrid build_reference_cell(const CellGeometrySpec& spec, int n);

/// Tiles the reference pattern over the unit square with cell size eps = 1/N.
/// The result has N*n_per_cell elements per axis, is non-periodic, and labels
/// interface edges per the tiled pattern.  Throws ConfigError when 1/eps is
/// not an integer and AlignmentError on misaligned band features.
LabeledGrid tile_microstructure(const CellGeometrySpec& spec, Real eps, int n_per_cell);

/// Exact areas and interface lengths from element/edge counts, plus the
/// interface-to-volume ratios mu_1 = |G1|/|Y|, mu_2 = |G2|/|Y| and
/// mu_g = |G12| / (2 |Y|).
GeometricMeasures measures(const LabeledGrid& grid);

}  // namespace tridom

#endif
