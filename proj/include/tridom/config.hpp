#ifndef TRIDOM_CONFIG_HPP
#define TRIDOM_CONFIG_HPP

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tridom/geometry.hpp"
#include "tridom/ionic.hpp"
#include "tridom/types.hpp"

namespace tridom {

/// Named analytic profile with numeric parameters.
///   zero            ()              0
///   constant        (c)             c
///   cosine          (amp)           amp cos(pi x) cos(pi y)
///   cosine_x        (amp)           amp cos(pi x)
///   gaussian        (amp,x0,y0,sig) amp exp(-((x-x0)^2+(y-y0)^2)/(2 sig^2))
///   linear          (c0,cx,cy)      c0 + cx x + cy y
struct ProfileSpec {
  std::string name = "zero";
  std::vector<Real> params;
};

std::function<Real(Real, Real)> make_profile(const ProfileSpec& spec);

/// Complete run description.  Every field has a default, so an empty file is
/// a valid configuration; parse_config overrides from the file and validates
/// all cross-field consistency rules, reporting every violation at once.
struct SimConfig {
  CellGeometrySpec geometry;

  int reference_n = 32;
  int macro_n = 32;
  int micro_n_per_cell = 8;
  std::vector<Real> eps_list = {0.5, 0.25, 0.125};

  Matrix2 intra_tensor = Matrix2::Identity();
  Matrix2 extra_tensor = Matrix2::Identity();
  std::array<Real, 2> laminate_values = {1.0, 4.0};

  bool use_explicit_effective = false;
  Matrix2 effective_i1 = Matrix2::Identity();
  Matrix2 effective_i2 = Matrix2::Identity();
  Matrix2 effective_e = Matrix2::Identity();

  IonicParams ionic;

  Real dt = 0.01;
  Real t_end = 0.5;
  int snapshot_every = 0;  // steps between snapshots; 0 disables them
  Real delta = 0.0;        // macro diffusion regularization

  ProfileSpec init_v1{"cosine", {1.0}};
  ProfileSpec init_v2{"cosine", {0.9}};
  ProfileSpec init_w1{"zero", {}};
  ProfileSpec init_w2{"zero", {}};
  std::optional<ProfileSpec> init_s;  // absent: derived as v1 - v2

  ProfileSpec source1{"zero", {}};
  ProfileSpec source2{"zero", {}};
  std::array<Real, 2> source1_window = {0.0, 1e30};
  std::array<Real, 2> source2_window = {0.0, 1e30};

  std::string output_dir = "out";
  Real solver_tol = 1e-10;
  Real mean_tol = 1e-10;
};

/// Parses the INI-style file (sections in brackets, key = value, numeric
/// scalars and bracketed lists).  Throws ConfigError carrying every
/// violation, each prefixed with its key path.
SimConfig parse_config(const std::string& path);

/// Renders a config as the same INI grammar; parsing the output reproduces
/// the config exactly (doubles are written with full precision).
std::string render_config(const SimConfig& config);

/// Validates an already-populated config (used by parse_config; exposed for
/// programmatic configs).  Returns the list of violations, empty when valid.
std::vector<std::string> validate_config(const SimConfig& config);

}  // namespace tridom

#endif
