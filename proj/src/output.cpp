#include "tridom/output.hpp"

#include <sstream>

namespace tridom {

std::string format_full(Real v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

void write_vtk_scalar(const std::string& path, const LabeledGrid& grid, const std::string& name,
                      const Vector& nodal_values, bool with_phase_mask) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  const int nx = grid.nodes_x();
  const int ny = grid.nodes_y();
  out << "# vtk DataFile Version 3.0\n";
  out << name << "\n";
  out << "ASCII\n";
  out << "DATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << nx << " " << ny << " 1\n";
  out << "ORIGIN 0 0 0\n";
  out << "SPACING " << format_full(grid.hx()) << " " << format_full(grid.hy()) << " 1\n";
  out << "POINT_DATA " << nx * ny << "\n";
  out << "SCALARS " << name << " double 1\n";
  out << "LOOKUP_TABLE default\n";
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) out << format_full(nodal_values[grid.node(i, j)]) << "\n";
  if (with_phase_mask) {
    out << "CELL_DATA " << grid.num_elements() << "\n";
    out << "SCALARS phase int 1\n";
    out << "LOOKUP_TABLE default\n";
    for (int ey = 0; ey < grid.ny(); ++ey)
      for (int ex = 0; ex < grid.nx(); ++ex)
        out << static_cast<int>(grid.element_phase(ex, ey)) << "\n";
  }
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path) {
  if (!out_) throw Error("cannot open '" + path + "' for writing");
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out_ << ",";
    out_ << header[i];
  }
  out_ << "\r\n";
}

void CsvWriter::row(const std::vector<Real>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out_ << ",";
    out_ << format_full(values[i]);
  }
  out_ << "\r\n";
}

void CsvWriter::row(const std::vector<std::string>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out_ << ",";
    out_ << values[i];
  }
  out_ << "\r\n";
}

}  // namespace tridom
