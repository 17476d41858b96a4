#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "tridom/config.hpp"

using namespace tridom;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& contents) {
    path = std::string(std::tmpnam(nullptr)) + ".ini";
    std::ofstream out(path);
    out << contents;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

std::string violation_text(const std::string& contents) {
  TempFile file(contents);
  try {
    parse_config(file.path);
  } catch (const ConfigError& err) {
    return err.what();
  }
  return "";
}

}  // namespace

TEST_CASE("an empty file yields the defaults") {
  TempFile file("");
  const SimConfig cfg = parse_config(file.path);
  CHECK(cfg.geometry.layout == CellLayout::Band);
  CHECK(cfg.geometry.band_lo == 0.25);
  CHECK(cfg.reference_n == 32);
  CHECK(cfg.eps_list.size() == 3);
  CHECK(cfg.ionic.a == 0.1);
  CHECK(cfg.init_v1.name == "cosine");
  CHECK(cfg.init_v2.params.at(0) == 0.9);
  CHECK_FALSE(cfg.init_s.has_value());
}

TEST_CASE("the rendered config reparses to the same configuration") {
  SimConfig cfg;
  cfg.geometry.band_lo = 0.125;
  cfg.geometry.band_hi = 0.875;
  cfg.eps_list = {0.5, 0.125};
  cfg.ionic.g_gap = 0.75;
  cfg.dt = 0.002;
  cfg.t_end = 0.1;
  cfg.init_s = ProfileSpec{"constant", {0.2}};
  cfg.source1 = ProfileSpec{"gaussian", {1.0, 0.5, 0.5, 0.1}};
  cfg.source1_window = {0.0, 0.25};
  const std::string first = render_config(cfg);
  TempFile file(first);
  const SimConfig parsed = parse_config(file.path);
  CHECK(render_config(parsed) == first);
  CHECK(parsed.eps_list == cfg.eps_list);
  CHECK(parsed.init_s.has_value());
  CHECK(parsed.init_s->params.at(0) == 0.2);
}

TEST_CASE("bad eps names the key") {
  const std::string what = violation_text("[discretization]\neps_list = [0.3]\n");
  CHECK(what.find("eps") != std::string::npos);
  CHECK(what.find("0.3") != std::string::npos);
}

TEST_CASE("inverted band fractions name both keys") {
  const std::string what = violation_text("[geometry]\nband_lo = 0.75\nband_hi = 0.25\n");
  CHECK(what.find("band_lo") != std::string::npos);
  CHECK(what.find("band_hi") != std::string::npos);
}

TEST_CASE("all violations are reported together") {
  const std::string what = violation_text(
      "[discretization]\neps_list = [0.3]\n[time]\ndt = -1\n[ionic]\neps0 = 0\n");
  CHECK(what.find("eps_list") != std::string::npos);
  CHECK(what.find("time.dt") != std::string::npos);
  CHECK(what.find("eps0") != std::string::npos);
}

TEST_CASE("unknown keys and profiles are violations") {
  CHECK(violation_text("[geometry]\nbnd_lo = 0.25\n").find("bnd_lo") != std::string::npos);
  CHECK(violation_text("[init]\nv1 = vortex\n").find("v1") != std::string::npos);
  CHECK(violation_text("[init]\nv1 = gaussian\nv1_params = [1.0]\n").find("parameter") !=
        std::string::npos);
}

TEST_CASE("misaligned band features are consistency violations") {
  const std::string what = violation_text("[geometry]\nband_lo = 0.3\nband_hi = 0.7\n");
  CHECK(what.find("grid line") != std::string::npos);
  CHECK(what.find("reference_n") != std::string::npos);
  CHECK(what.find("micro_n_per_cell") != std::string::npos);
}

TEST_CASE("missing file is a config error") {
  CHECK_THROWS_AS(parse_config("/nonexistent/path.ini"), ConfigError);
}

TEST_CASE("profiles evaluate their closed forms") {
  CHECK(make_profile({"zero", {}})(0.3, 0.4) == 0.0);
  CHECK(make_profile({"constant", {2.5}})(0.3, 0.4) == 2.5);
  CHECK(make_profile({"cosine", {2.0}})(0.0, 0.0) == doctest::Approx(2.0));
  CHECK(make_profile({"linear", {1.0, 2.0, 3.0}})(0.5, 0.5) == doctest::Approx(3.5));
  CHECK(make_profile({"gaussian", {1.0, 0.5, 0.5, 0.2}})(0.5, 0.5) == doctest::Approx(1.0));
  CHECK_THROWS_AS(make_profile({"vortex", {}}), ConfigError);
  CHECK_THROWS_AS(make_profile({"gaussian", {1.0}}), ConfigError);
}
