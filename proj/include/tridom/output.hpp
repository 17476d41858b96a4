#ifndef TRIDOM_OUTPUT_HPP
#define TRIDOM_OUTPUT_HPP

#include <fstream>
#include <string>
#include <vector>

#include "tridom/geometry.hpp"
#include "tridom/types.hpp"

namespace tridom {

/// One nodal scalar per file, VTK legacy ASCII STRUCTURED_POINTS.  When
/// with_phase_mask is set, the per-element phase labels are appended as cell
/// data (0 = intra1, 1 = intra2, 2 = extra).
void write_vtk_scalar(const std::string& path, const LabeledGrid& grid, const std::string& name,
                      const Vector& nodal_values, bool with_phase_mask = false);

/// RFC 4180 CSV with a header row; numbers are printed with full precision so
/// identical runs produce identical bytes.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<Real>& values);
  void row(const std::vector<std::string>& values);

 private:
  std::ofstream out_;
};

std::string format_full(Real v);

}  // namespace tridom

#endif
