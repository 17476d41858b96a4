#include "tridom/geometry.hpp"

#include <cmath>
#include <sstream>

namespace tridom {

namespace {

// Returns the integer k with feature == k/n, or nullopt if no such k exists
// within a tight floating-point margin.
std::optional<int> aligned_index(Real feature, int n) {
  const Real scaled = feature * n;
  const Real rounded = std::round(scaled);
  if (std::abs(scaled - rounded) > 1e-9 * n) return std::nullopt;
  return static_cast<int>(rounded);
}

int require_aligned(Real feature, int n, const char* name) {
  auto k = aligned_index(feature, n);
  if (!k) {
    std::ostringstream msg;
    msg << "geometry feature '" << name << "' = " << feature
        << " does not fall on a grid line at resolution n = " << n << " (" << feature << " * " << n
        << " is not an integer)";
    throw AlignmentError(msg.str());
  }
  return *k;
}

std::vector<Phase> band_column(const CellGeometrySpec& spec, int n) {
  const int lo = require_aligned(spec.band_lo, n, "band_lo");
  const int hi = require_aligned(spec.band_hi, n, "band_hi");
  const int mid = require_aligned(spec.band_mid(), n, "band_mid");
  std::vector<Phase> column(static_cast<std::size_t>(n), Phase::Extra);
  for (int r = lo; r < mid; ++r) column[static_cast<std::size_t>(r)] = Phase::Intra2;
  for (int r = mid; r < hi; ++r) column[static_cast<std::size_t>(r)] = Phase::Intra1;
  return column;
}

std::vector<Phase> reference_phases(const CellGeometrySpec& spec, int n) {
  std::vector<Phase> phases(static_cast<std::size_t>(n) * n, Phase::Extra);
  if (spec.layout == CellLayout::Band) {
    const auto column = band_column(spec, n);
    for (int ey = 0; ey < n; ++ey)
      for (int ex = 0; ex < n; ++ex) phases[static_cast<std::size_t>(ey) * n + ex] = column[static_cast<std::size_t>(ey)];
  }
  return phases;
}

std::optional<InterfaceLabel> label_for_pair(Phase a, Phase b) {
  if (a == b) return std::nullopt;
  const bool has_i1 = (a == Phase::Intra1) || (b == Phase::Intra1);
  const bool has_i2 = (a == Phase::Intra2) || (b == Phase::Intra2);
  const bool has_e = (a == Phase::Extra) || (b == Phase::Extra);
  if (has_i1 && has_e) return InterfaceLabel::Membrane1;
  if (has_i2 && has_e) return InterfaceLabel::Membrane2;
  if (has_i1 && has_i2) return InterfaceLabel::Gap;
  return std::nullopt;
}

}  // namespace

void CellGeometrySpec::validate() const {
  if (layout != CellLayout::Band) return;
  if (!(band_lo > 0.0 && band_lo < band_hi && band_hi < 1.0)) {
    std::ostringstream msg;
    msg << "band layout requires 0 < band_lo < band_hi < 1, got band_lo = " << band_lo
        << ", band_hi = " << band_hi;
    throw ConfigError(msg.str());
  }
}

LabeledGrid::LabeledGrid(int nx, int ny, Real lx, Real ly, bool periodic_x, bool periodic_y,
                         std::vector<Phase> element_phase)
    : nx_(nx),
      ny_(ny),
      hx_(lx / nx),
      hy_(ly / ny),
      periodic_x_(periodic_x),
      periodic_y_(periodic_y),
      nodes_x_(periodic_x ? nx : nx + 1),
      nodes_y_(periodic_y ? ny : ny + 1),
      phase_(std::move(element_phase)) {
  if (nx_ < 1 || ny_ < 1) throw ConfigError("grid needs at least one element per axis");
  if (phase_.size() != static_cast<std::size_t>(nx_) * ny_)
    throw ConfigError("element phase array does not match the grid size");
  build_interface_edges();
}

void LabeledGrid::build_interface_edges() {
  // Horizontal edges: element (ex, jy-1) below vs (ex, jy) above.  On a
  // y-periodic grid the seam jy = 0 pairs the top and bottom element rows.
  const int j_begin = periodic_y_ ? 0 : 1;
  for (int jy = j_begin; jy < ny_; ++jy) {
    const int below = (jy == 0) ? ny_ - 1 : jy - 1;
    for (int ex = 0; ex < nx_; ++ex) {
      if (auto label = label_for_pair(element_phase(ex, below), element_phase(ex, jy)))
        edges_.push_back({ex, jy, *label});
    }
  }
  // Vertical edges never separate distinct phases in the supported layouts
  // (bands span the full width); assert that to catch bad phase arrays.
  for (int ey = 0; ey < ny_; ++ey) {
    const int i_begin = periodic_x_ ? 0 : 1;
    for (int ix = i_begin; ix < nx_; ++ix) {
      const int left = (ix == 0) ? nx_ - 1 : ix - 1;
      if (element_phase(left, ey) != element_phase(ix, ey))
        throw ConfigError("unsupported phase pattern: vertical interface edge found");
    }
  }
}

std::vector<InterfaceEdge> LabeledGrid::edges_with(InterfaceLabel label) const {
  std::vector<InterfaceEdge> out;
  for (const auto& e : edges_)
    if (e.label == label) out.push_back(e);
  return out;
}

Vector LabeledGrid::phase_node_mask(PhaseSet phases) const {
  Vector mask = Vector::Zero(num_nodes());
  for (int ey = 0; ey < ny_; ++ey)
    for (int ex = 0; ex < nx_; ++ex) {
      if (!phases.contains(element_phase(ex, ey))) continue;
      for (int p : element_nodes(ex, ey)) mask[p] = 1.0;
    }
  return mask;
}

Vector LabeledGrid::interface_node_mask(InterfaceLabel label) const {
  Vector mask = Vector::Zero(num_nodes());
  for (const auto& e : edges_) {
    if (e.label != label) continue;
    mask[node(e.ix, e.jy)] = 1.0;
    mask[node(e.ix + 1, e.jy)] = 1.0;
  }
  return mask;
}

std::vector<int> LabeledGrid::interface_nodes(InterfaceLabel label) const {
  const Vector mask = interface_node_mask(label);
  std::vector<int> nodes;
  for (int p = 0; p < mask.size(); ++p)
    if (mask[p] > 0.5) nodes.push_back(p);
  return nodes;
}

LabeledGrid build_reference_cell(const CellGeometrySpec& spec, int n) {
  spec.validate();
  if (n < 4) throw ConfigError("reference cell needs n >= 4 elements per axis");
  return LabeledGrid(n, n, 1.0, 1.0, true, true, reference_phases(spec, n));
}

LabeledGrid tile_microstructure(const CellGeometrySpec& spec, Real eps, int n_per_cell) {
  spec.validate();
  if (n_per_cell < 4) throw ConfigError("tiling needs n_per_cell >= 4");
  if (!(eps > 0.0 && eps <= 1.0) || std::abs(1.0 / eps - std::round(1.0 / eps)) > 1e-9) {
    std::ostringstream msg;
    msg << "eps = " << eps << " must be the reciprocal of a positive integer";
    throw ConfigError(msg.str());
  }
  const int cells = static_cast<int>(std::round(1.0 / eps));
  const int n = cells * n_per_cell;

  std::vector<Phase> column(static_cast<std::size_t>(n_per_cell), Phase::Extra);
  if (spec.layout == CellLayout::Band) column = band_column(spec, n_per_cell);

  std::vector<Phase> phases(static_cast<std::size_t>(n) * n);
  for (int ey = 0; ey < n; ++ey) {
    const Phase row_phase = column[static_cast<std::size_t>(ey % n_per_cell)];
    for (int ex = 0; ex < n; ++ex) phases[static_cast<std::size_t>(ey) * n + ex] = row_phase;
  }
  return LabeledGrid(n, n, 1.0, 1.0, false, false, std::move(phases));
}

GeometricMeasures measures(const LabeledGrid& grid) {
  GeometricMeasures m;
  const Real cell_area = grid.hx() * grid.hy();
  for (int ey = 0; ey < grid.ny(); ++ey)
    for (int ex = 0; ex < grid.nx(); ++ex) {
      switch (grid.element_phase(ex, ey)) {
        case Phase::Intra1: m.vol_i1 += cell_area; break;
        case Phase::Intra2: m.vol_i2 += cell_area; break;
        case Phase::Extra: m.vol_e += cell_area; break;
      }
    }
  for (const auto& e : grid.interface_edges()) {
    switch (e.label) {
      case InterfaceLabel::Membrane1: m.len_g1 += grid.hx(); break;
      case InterfaceLabel::Membrane2: m.len_g2 += grid.hx(); break;
      case InterfaceLabel::Gap: m.len_g12 += grid.hx(); break;
    }
  }
  const Real volume = grid.nx() * grid.hx() * grid.ny() * grid.hy();
  m.mu_1 = m.len_g1 / volume;
  m.mu_2 = m.len_g2 / volume;
  m.mu_g = m.len_g12 / (2.0 * volume);
  return m;
}

}  // namespace tridom
