#include "tridom/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace tridom {

std::function<Real(Real, Real)> make_profile(const ProfileSpec& spec) {
  const auto& prm = spec.params;
  auto arity = [&](std::size_t want) {
    if (prm.size() != want) {
      std::ostringstream msg;
      msg << "profile '" << spec.name << "' takes " << want << " parameter(s), got " << prm.size();
      throw ConfigError(msg.str());
    }
  };
  if (spec.name == "zero") {
    arity(0);
    return [](Real, Real) { return 0.0; };
  }
  if (spec.name == "constant") {
    arity(1);
    const Real c = prm[0];
    return [c](Real, Real) { return c; };
  }
  if (spec.name == "cosine") {
    arity(1);
    const Real amp = prm[0];
    return [amp](Real x, Real y) { return amp * std::cos(M_PI * x) * std::cos(M_PI * y); };
  }
  if (spec.name == "cosine_x") {
    arity(1);
    const Real amp = prm[0];
    return [amp](Real x, Real) { return amp * std::cos(M_PI * x); };
  }
  if (spec.name == "gaussian") {
    arity(4);
    const Real amp = prm[0], x0 = prm[1], y0 = prm[2], sig = prm[3];
    if (!(sig > 0)) throw ConfigError("profile 'gaussian' needs a positive width");
    return [=](Real x, Real y) {
      const Real r2 = (x - x0) * (x - x0) + (y - y0) * (y - y0);
      return amp * std::exp(-r2 / (2.0 * sig * sig));
    };
  }
  if (spec.name == "linear") {
    arity(3);
    const Real c0 = prm[0], cx = prm[1], cy = prm[2];
    return [=](Real x, Real y) { return c0 + cx * x + cy * y; };
  }
  throw ConfigError("unknown profile '" + spec.name + "'");
}

namespace {

struct RawConfig {
  std::map<std::string, std::string> entries;  // "section.key" -> raw value
  std::vector<std::string> errors;

  bool has(const std::string& key) const { return entries.count(key) > 0; }
};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

RawConfig read_ini(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  RawConfig raw;
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find_first_of(";#");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        raw.errors.push_back("line " + std::to_string(line_no) + ": unterminated section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      raw.errors.push_back("line " + std::to_string(line_no) + ": expected 'key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      raw.errors.push_back("line " + std::to_string(line_no) + ": empty key");
      continue;
    }
    raw.entries[section.empty() ? key : section + "." + key] = value;
  }
  return raw;
}

class Reader {
 public:
  Reader(RawConfig raw) : raw_(std::move(raw)) { errors_ = raw_.errors; }

  Real real(const std::string& key, Real fallback) {
    if (!consume(key)) return fallback;
    return parse_real(key, raw_.entries.at(key)).value_or(fallback);
  }

  int integer(const std::string& key, int fallback) {
    const Real v = real(key, fallback);
    if (std::abs(v - std::round(v)) > 1e-12) {
      errors_.push_back(key + ": expected an integer");
      return fallback;
    }
    return static_cast<int>(std::round(v));
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!consume(key)) return fallback;
    const std::string& v = raw_.entries.at(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    errors_.push_back(key + ": expected a boolean (true/false)");
    return fallback;
  }

  std::string text(const std::string& key, std::string fallback) {
    if (!consume(key)) return fallback;
    return raw_.entries.at(key);
  }

  std::vector<Real> list(const std::string& key, std::vector<Real> fallback) {
    if (!consume(key)) return fallback;
    const std::string& v = raw_.entries.at(key);
    if (v.size() < 2 || v.front() != '[' || v.back() != ']') {
      errors_.push_back(key + ": expected a bracketed list [a, b, ...]");
      return fallback;
    }
    std::vector<Real> out;
    std::string item;
    std::istringstream items(v.substr(1, v.size() - 2));
    while (std::getline(items, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      const auto parsed = parse_real(key, item);
      if (!parsed) return fallback;
      out.push_back(*parsed);
    }
    return out;
  }

  /// "m11 m12 m22" as a 3-entry list
  Matrix2 sym_matrix(const std::string& key, const Matrix2& fallback) {
    std::vector<Real> def = {fallback(0, 0), fallback(0, 1), fallback(1, 1)};
    const auto v = list(key, def);
    if (v.size() != 3) {
      errors_.push_back(key + ": expected [m11, m12, m22]");
      return fallback;
    }
    Matrix2 m;
    m << v[0], v[1], v[1], v[2];
    return m;
  }

  ProfileSpec profile(const std::string& key, ProfileSpec fallback, bool allow_derived = false) {
    ProfileSpec spec = std::move(fallback);
    bool touched = false;
    if (consume(key)) {
      spec.name = raw_.entries.at(key);
      spec.params.clear();
      touched = true;
    }
    if (raw_.has(key + "_params")) {
      spec.params = list(key + "_params", spec.params);
      touched = true;
    }
    if (touched && !(allow_derived && spec.name == "derived")) {
      try {
        make_profile(spec);
      } catch (const ConfigError& err) {
        errors_.push_back(key + ": " + err.what());
      }
    }
    return spec;
  }

  void finish() {
    for (const auto& [key, value] : raw_.entries)
      if (!used_.count(key)) errors_.push_back(key + ": unknown key");
  }

  std::vector<std::string>& errors() { return errors_; }

 private:
  bool consume(const std::string& key) {
    if (!raw_.has(key)) return false;
    used_.insert(key);
    return true;
  }

  std::optional<Real> parse_real(const std::string& key, const std::string& text) {
    try {
      std::size_t pos = 0;
      const Real v = std::stod(text, &pos);
      if (pos != text.size()) throw std::invalid_argument(text);
      return v;
    } catch (const std::exception&) {
      errors_.push_back(key + ": cannot parse '" + text + "' as a number");
      return std::nullopt;
    }
  }

  RawConfig raw_;
  std::set<std::string> used_;
  std::vector<std::string> errors_;
};

bool feature_aligned(Real feature, int n) {
  const Real scaled = feature * n;
  return std::abs(scaled - std::round(scaled)) <= 1e-9 * n;
}

}  // namespace

std::vector<std::string> validate_config(const SimConfig& c) {
  std::vector<std::string> errors;
  auto check = [&](bool ok, const std::string& message) {
    if (!ok) errors.push_back(message);
  };

  if (c.geometry.layout == CellLayout::Band) {
    check(c.geometry.band_lo > 0 && c.geometry.band_lo < c.geometry.band_hi,
          "geometry.band_lo, geometry.band_hi: need 0 < band_lo < band_hi");
    check(c.geometry.band_hi < 1, "geometry.band_hi: must be < 1");
    if (errors.empty()) {
      for (const auto& [n, what] :
           {std::pair<int, const char*>{c.reference_n, "discretization.reference_n"},
            std::pair<int, const char*>{c.micro_n_per_cell, "discretization.micro_n_per_cell"}}) {
        for (const auto& [f, fname] :
             {std::pair<Real, const char*>{c.geometry.band_lo, "band_lo"},
              std::pair<Real, const char*>{c.geometry.band_mid(), "band_mid"},
              std::pair<Real, const char*>{c.geometry.band_hi, "band_hi"}}) {
          if (!feature_aligned(f, n)) {
            std::ostringstream msg;
            msg << what << ": geometry." << fname << " = " << f
                << " does not fall on a grid line at n = " << n;
            errors.push_back(msg.str());
          }
        }
      }
    }
  }

  check(c.reference_n >= 4, "discretization.reference_n: must be >= 4");
  check(c.macro_n >= 2, "discretization.macro_n: must be >= 2");
  check(c.micro_n_per_cell >= 4, "discretization.micro_n_per_cell: must be >= 4");
  check(!c.eps_list.empty(), "discretization.eps_list: must not be empty");
  for (Real eps : c.eps_list) {
    if (!(eps > 0) || std::abs(1.0 / eps - std::round(1.0 / eps)) > 1e-9) {
      std::ostringstream msg;
      msg << "discretization.eps_list: eps = " << eps << " is not the reciprocal of an integer";
      errors.push_back(msg.str());
    }
  }

  for (const auto& [m, name] :
       {std::pair<const Matrix2*, const char*>{&c.intra_tensor, "conductivity.intra"},
        std::pair<const Matrix2*, const char*>{&c.extra_tensor, "conductivity.extra"}}) {
    Eigen::SelfAdjointEigenSolver<Matrix2> eig(*m);
    if (eig.eigenvalues().minCoeff() <= 0)
      errors.push_back(std::string(name) + ": tensor must be positive definite");
  }
  check(c.laminate_values[0] > 0 && c.laminate_values[1] > 0,
        "conductivity.laminate_values: must be positive");

  try {
    c.ionic.validate();
  } catch (const ConfigError& err) {
    errors.push_back(std::string("ionic: ") + err.what());
  }

  check(c.dt > 0, "time.dt: must be positive");
  check(c.t_end >= c.dt, "time.t_end: must be at least dt");
  if (c.dt > 0) {
    const Real steps = c.t_end / c.dt;
    check(std::abs(steps - std::round(steps)) <= 1e-9 * std::max(1.0, steps),
          "time.dt: must divide t_end");
  }
  check(c.snapshot_every >= 0, "time.snapshot_every: must be >= 0");
  check(c.delta >= 0, "time.delta: must be >= 0");
  check(c.solver_tol > 0, "tolerances.solver_tol: must be positive");
  check(c.mean_tol > 0, "tolerances.mean_tol: must be positive");
  check(c.source1_window[0] <= c.source1_window[1],
        "sources.app1_window: start must not exceed end");
  check(c.source2_window[0] <= c.source2_window[1],
        "sources.app2_window: start must not exceed end");
  return errors;
}

SimConfig parse_config(const std::string& path) {
  Reader reader(read_ini(path));
  SimConfig c;

  const std::string layout = reader.text("geometry.layout", "band");
  if (layout == "band")
    c.geometry.layout = CellLayout::Band;
  else if (layout == "full_cell")
    c.geometry.layout = CellLayout::FullCell;
  else if (layout == "laminate_x")
    c.geometry.layout = CellLayout::LaminateX;
  else
    reader.errors().push_back("geometry.layout: unknown layout '" + layout + "'");
  c.geometry.band_lo = reader.real("geometry.band_lo", c.geometry.band_lo);
  c.geometry.band_hi = reader.real("geometry.band_hi", c.geometry.band_hi);

  c.reference_n = reader.integer("discretization.reference_n", c.reference_n);
  c.macro_n = reader.integer("discretization.macro_n", c.macro_n);
  c.micro_n_per_cell = reader.integer("discretization.micro_n_per_cell", c.micro_n_per_cell);
  c.eps_list = reader.list("discretization.eps_list", c.eps_list);

  c.intra_tensor = reader.sym_matrix("conductivity.intra", c.intra_tensor);
  c.extra_tensor = reader.sym_matrix("conductivity.extra", c.extra_tensor);
  {
    const auto lam = reader.list("conductivity.laminate_values",
                                 {c.laminate_values[0], c.laminate_values[1]});
    if (lam.size() == 2)
      c.laminate_values = {lam[0], lam[1]};
    else
      reader.errors().push_back("conductivity.laminate_values: expected two values");
  }
  c.use_explicit_effective =
      reader.boolean("conductivity.use_explicit_effective", c.use_explicit_effective);
  c.effective_i1 = reader.sym_matrix("conductivity.effective_i1", c.effective_i1);
  c.effective_i2 = reader.sym_matrix("conductivity.effective_i2", c.effective_i2);
  c.effective_e = reader.sym_matrix("conductivity.effective_e", c.effective_e);

  c.ionic.a = reader.real("ionic.a", c.ionic.a);
  c.ionic.lambda_a = reader.real("ionic.lambda_a", c.ionic.lambda_a);
  c.ionic.b_w = reader.real("ionic.b_w", c.ionic.b_w);
  c.ionic.eps0 = reader.real("ionic.eps0", c.ionic.eps0);
  c.ionic.kappa = reader.real("ionic.kappa", c.ionic.kappa);
  c.ionic.g_gap = reader.real("ionic.g_gap", c.ionic.g_gap);

  c.dt = reader.real("time.dt", c.dt);
  c.t_end = reader.real("time.t_end", c.t_end);
  c.snapshot_every = reader.integer("time.snapshot_every", c.snapshot_every);
  c.delta = reader.real("time.delta", c.delta);

  c.init_v1 = reader.profile("init.v1", c.init_v1);
  c.init_v2 = reader.profile("init.v2", c.init_v2);
  c.init_w1 = reader.profile("init.w1", c.init_w1);
  c.init_w2 = reader.profile("init.w2", c.init_w2);
  {
    ProfileSpec s =
        reader.profile("init.s", c.init_s.value_or(ProfileSpec{"derived", {}}), true);
    if (s.name != "derived") c.init_s = s;
  }

  c.source1 = reader.profile("sources.app1", c.source1);
  c.source2 = reader.profile("sources.app2", c.source2);
  {
    const auto w1 = reader.list("sources.app1_window", {c.source1_window[0], c.source1_window[1]});
    const auto w2 = reader.list("sources.app2_window", {c.source2_window[0], c.source2_window[1]});
    if (w1.size() == 2) c.source1_window = {w1[0], w1[1]};
    if (w2.size() == 2) c.source2_window = {w2[0], w2[1]};
  }

  c.output_dir = reader.text("output.directory", c.output_dir);
  c.solver_tol = reader.real("tolerances.solver_tol", c.solver_tol);
  c.mean_tol = reader.real("tolerances.mean_tol", c.mean_tol);

  reader.finish();
  auto errors = reader.errors();
  for (const auto& e : validate_config(c)) errors.push_back(e);
  if (!errors.empty()) {
    std::ostringstream msg;
    msg << "invalid configuration (" << errors.size() << " violation(s)):";
    for (const auto& e : errors) msg << "\n  - " << e;
    throw ConfigError(msg.str());
  }
  return c;
}

namespace {

std::string fmt(Real v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

std::string fmt_list(const std::vector<Real>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt(v[i]);
  }
  return out + "]";
}

std::string fmt_sym(const Matrix2& m) { return fmt_list({m(0, 0), m(0, 1), m(1, 1)}); }

void render_profile(std::ostringstream& out, const std::string& key, const ProfileSpec& spec) {
  out << key << " = " << spec.name << "\n";
  if (!spec.params.empty()) out << key << "_params = " << fmt_list(spec.params) << "\n";
}

}  // namespace

std::string render_config(const SimConfig& c) {
  std::ostringstream out;
  out << "[geometry]\n";
  out << "layout = "
      << (c.geometry.layout == CellLayout::Band
              ? "band"
              : (c.geometry.layout == CellLayout::FullCell ? "full_cell" : "laminate_x"))
      << "\n";
  out << "band_lo = " << fmt(c.geometry.band_lo) << "\n";
  out << "band_hi = " << fmt(c.geometry.band_hi) << "\n\n";

  out << "[discretization]\n";
  out << "reference_n = " << c.reference_n << "\n";
  out << "macro_n = " << c.macro_n << "\n";
  out << "micro_n_per_cell = " << c.micro_n_per_cell << "\n";
  out << "eps_list = " << fmt_list(c.eps_list) << "\n\n";

  out << "[conductivity]\n";
  out << "intra = " << fmt_sym(c.intra_tensor) << "\n";
  out << "extra = " << fmt_sym(c.extra_tensor) << "\n";
  out << "laminate_values = " << fmt_list({c.laminate_values[0], c.laminate_values[1]}) << "\n";
  out << "use_explicit_effective = " << (c.use_explicit_effective ? "true" : "false") << "\n";
  out << "effective_i1 = " << fmt_sym(c.effective_i1) << "\n";
  out << "effective_i2 = " << fmt_sym(c.effective_i2) << "\n";
  out << "effective_e = " << fmt_sym(c.effective_e) << "\n\n";

  out << "[ionic]\n";
  out << "a = " << fmt(c.ionic.a) << "\n";
  out << "lambda_a = " << fmt(c.ionic.lambda_a) << "\n";
  out << "b_w = " << fmt(c.ionic.b_w) << "\n";
  out << "eps0 = " << fmt(c.ionic.eps0) << "\n";
  out << "kappa = " << fmt(c.ionic.kappa) << "\n";
  out << "g_gap = " << fmt(c.ionic.g_gap) << "\n\n";

  out << "[time]\n";
  out << "dt = " << fmt(c.dt) << "\n";
  out << "t_end = " << fmt(c.t_end) << "\n";
  out << "snapshot_every = " << c.snapshot_every << "\n";
  out << "delta = " << fmt(c.delta) << "\n\n";

  out << "[init]\n";
  render_profile(out, "v1", c.init_v1);
  render_profile(out, "v2", c.init_v2);
  render_profile(out, "w1", c.init_w1);
  render_profile(out, "w2", c.init_w2);
  if (c.init_s) render_profile(out, "s", *c.init_s);
  out << "\n[sources]\n";
  render_profile(out, "app1", c.source1);
  render_profile(out, "app2", c.source2);
  out << "app1_window = " << fmt_list({c.source1_window[0], c.source1_window[1]}) << "\n";
  out << "app2_window = " << fmt_list({c.source2_window[0], c.source2_window[1]}) << "\n\n";

  out << "[output]\n";
  out << "directory = " << c.output_dir << "\n\n";

  out << "[tolerances]\n";
  out << "solver_tol = " << fmt(c.solver_tol) << "\n";
  out << "mean_tol = " << fmt(c.mean_tol) << "\n";
  return out.str();
}

}  // namespace tridom
