// Multiscale cardiac tridomain simulator: cell problems, homogenized and
// microscopic runs, and the eps-convergence study tying them together.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tridom/cell_problems.hpp"
#include "tridom/config.hpp"
#include "tridom/macro_solver.hpp"
#include "tridom/micro_solver.hpp"
#include "tridom/output.hpp"
#include "tridom/unfolding.hpp"

namespace fs = std::filesystem;
using namespace tridom;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_override;
  std::uint64_t seed = 1;
};

SimConfig load_config(const CommonOptions& opts) {
  if (!fs::exists(opts.config_path))
    throw ConfigError("config file '" + opts.config_path + "' does not exist");
  SimConfig cfg = parse_config(opts.config_path);
  if (!opts.out_override.empty()) cfg.output_dir = opts.out_override;
  return cfg;
}

void write_echo(const SimConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  std::ofstream out(dir / "config.echo.ini");
  out << render_config(cfg);
}

SourceFn make_source(const ProfileSpec& spec, const std::array<Real, 2>& window) {
  if (spec.name == "zero") return {};
  auto profile = make_profile(spec);
  const Real t0 = window[0], t1 = window[1];
  return [profile, t0, t1](Real t, Real x, Real y) {
    return (t >= t0 && t < t1) ? profile(x, y) : 0.0;
  };
}

CoefficientTensor phase_coefficient(const SimConfig& cfg, Phase phase) {
  if (cfg.geometry.layout == CellLayout::LaminateX) {
    const Matrix2 lo = cfg.laminate_values[0] * Matrix2::Identity();
    const Matrix2 hi = cfg.laminate_values[1] * Matrix2::Identity();
    return CoefficientTensor::piecewise_x({{0.0, lo}, {0.5, hi}});
  }
  if (phase == Phase::Extra) return CoefficientTensor::constant(cfg.extra_tensor);
  return CoefficientTensor::constant(cfg.intra_tensor);
}

std::vector<PhaseSet> layout_phases(const SimConfig& cfg) {
  if (cfg.geometry.layout == CellLayout::Band)
    return {PhaseSet{Phase::Intra1}, PhaseSet{Phase::Intra2}, PhaseSet{Phase::Extra}};
  return {PhaseSet{Phase::Extra}};
}

struct ComputedTensors {
  Matrix2 i1, i2, e;
  GeometricMeasures measures;
  bool all_valid = true;
};

/// Correctors + both tensor formulas per phase; rows go to the CSV when a
/// writer is supplied.  The EnergyForm tensors feed the macro solver.
ComputedTensors compute_effective_tensors(const SimConfig& cfg, CsvWriter* csv, bool verbose) {
  const LabeledGrid ref = build_reference_cell(cfg.geometry, cfg.reference_n);
  ComputedTensors out;
  out.measures = measures(ref);

  for (const PhaseSet& phase : layout_phases(cfg)) {
    const CoefficientTensor coeff =
        phase_coefficient(cfg, phase.contains(Phase::Extra) ? Phase::Extra : Phase::Intra1);
    const CorrectorSet chi = solve_correctors(ref, coeff, phase, cfg.solver_tol);
    const EffectiveTensor div =
        effective_tensor(ref, coeff, phase, chi, TensorFormula::DivergenceForm);
    const EffectiveTensor en = effective_tensor(ref, coeff, phase, chi, TensorFormula::EnergyForm);
    const TensorValidation validation = validate_tensor(div, en);
    out.all_valid = out.all_valid && validation.pass;
    if (verbose)
      std::cout << "phase " << phase.name() << ": " << validation.to_text() << "\n";
    for (const auto* t : {&div, &en}) {
      const std::vector<std::string> row{phase.name(), to_string(t->formula),
                                         format_full(t->m(0, 0)), format_full(t->m(0, 1)),
                                         format_full(t->m(1, 1)),
                                         format_full(t->eigenvalues()[0]),
                                         format_full(t->eigenvalues()[1])};
      if (csv) csv->row(row);
      if (verbose && csv) {
        std::cout << "tensor";
        for (const auto& cell : row) std::cout << " " << cell;
        std::cout << "\n";
      }
    }
    if (phase.contains(Phase::Intra1)) out.i1 = en.m;
    if (phase.contains(Phase::Intra2)) out.i2 = en.m;
    if (phase.contains(Phase::Extra)) out.e = en.m;
  }

  if (cfg.geometry.layout == CellLayout::Band && csv) {
    // the paper-level intracellular tensor is reported per phase and as the
    // half-sum, leaving the interpretation to the consumer
    const Matrix2 mean = 0.5 * (out.i1 + out.i2);
    EffectiveTensor t;
    t.m = mean;
    csv->row(std::vector<std::string>{"intra_mean", "energy", format_full(mean(0, 0)),
                                      format_full(mean(0, 1)), format_full(mean(1, 1)),
                                      format_full(t.eigenvalues()[0]),
                                      format_full(t.eigenvalues()[1])});
  }
  return out;
}

LabeledGrid make_macro_grid(int n) {
  return LabeledGrid(n, n, 1.0, 1.0, false, false,
                     std::vector<Phase>(static_cast<std::size_t>(n) * n, Phase::Extra));
}

void require_band(const SimConfig& cfg, const char* command) {
  if (cfg.geometry.layout != CellLayout::Band)
    throw ConfigError(std::string(command) + " requires the band geometry");
}

MacroProblem make_macro_problem(const SimConfig& cfg, const LabeledGrid& grid,
                                const ComputedTensors& tensors) {
  MacroProblem pb;
  pb.grid = &grid;
  if (cfg.use_explicit_effective) {
    pb.m_i1 = cfg.effective_i1;
    pb.m_i2 = cfg.effective_i2;
    pb.m_e = cfg.effective_e;
  } else {
    pb.m_i1 = tensors.i1;
    pb.m_i2 = tensors.i2;
    pb.m_e = tensors.e;
  }
  pb.measures = tensors.measures;
  pb.ionic = cfg.ionic;
  pb.app1 = make_source(cfg.source1, cfg.source1_window);
  pb.app2 = make_source(cfg.source2, cfg.source2_window);
  pb.dt = cfg.dt;
  pb.t_end = cfg.t_end;
  pb.delta = cfg.delta;
  pb.solver_tol = cfg.solver_tol;
  return pb;
}

std::string step_tag(int step) {
  std::ostringstream out;
  out << std::setw(6) << std::setfill('0') << step;
  return out.str();
}

int run_macro_command(const SimConfig& cfg, const fs::path& out_dir) {
  require_band(cfg, "macro");
  const LabeledGrid macro_grid = make_macro_grid(cfg.macro_n);
  const ComputedTensors tensors = compute_effective_tensors(cfg, nullptr, false);
  const MacroProblem problem = make_macro_problem(cfg, macro_grid, tensors);
  MacroState init = make_macro_state(macro_grid, make_profile(cfg.init_v1),
                                     make_profile(cfg.init_v2), make_profile(cfg.init_w1),
                                     make_profile(cfg.init_w2));

  CsvWriter csv((out_dir / "macro_diagnostics.csv").string(),
                {"t", "energy", "mean_ue", "max_s", "max_v1", "max_v2", "ionic_norm1",
                 "ionic_norm2"});
  bool mean_ok = true;
  const auto observer = [&](int step, const MacroState& state, const MacroDiagnostics& d) {
    csv.row({d.t, d.energy, d.mean_ue, d.max_s, d.max_v1, d.max_v2, d.ionic_norm1, d.ionic_norm2});
    if (std::abs(d.mean_ue) > cfg.mean_tol) mean_ok = false;
    if (cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0) {
      const std::string tag = step_tag(step);
      write_vtk_scalar((out_dir / ("macro_ui1_" + tag + ".vtk")).string(), macro_grid, "ui1",
                       state.ui1);
      write_vtk_scalar((out_dir / ("macro_ui2_" + tag + ".vtk")).string(), macro_grid, "ui2",
                       state.ui2);
      write_vtk_scalar((out_dir / ("macro_ue_" + tag + ".vtk")).string(), macro_grid, "ue",
                       state.ue);
      write_vtk_scalar((out_dir / ("macro_w1_" + tag + ".vtk")).string(), macro_grid, "w1",
                       state.w1);
      write_vtk_scalar((out_dir / ("macro_w2_" + tag + ".vtk")).string(), macro_grid, "w2",
                       state.w2);
    }
  };
  run_macro(problem, std::move(init), observer);
  if (!mean_ok) std::cout << "macro: extracellular mean exceeded tolerance\n";
  std::cout << "macro: finished " << static_cast<int>(std::round(cfg.t_end / cfg.dt))
            << " steps\n";
  return mean_ok ? 0 : 1;
}

MicroProblem make_micro_problem(const SimConfig& cfg, const LabeledGrid& grid, Real eps) {
  MicroProblem pb;
  pb.grid = &grid;
  pb.eps = eps;
  pb.m_i = CoefficientTensor::constant(cfg.intra_tensor);
  pb.m_e = CoefficientTensor::constant(cfg.extra_tensor);
  pb.ionic = cfg.ionic;
  pb.app1 = make_source(cfg.source1, cfg.source1_window);
  pb.app2 = make_source(cfg.source2, cfg.source2_window);
  pb.dt = cfg.dt;
  pb.t_end = cfg.t_end;
  pb.solver_tol = cfg.solver_tol;
  return pb;
}

struct MicroRun {
  MicroTrajectory trajectory;
  bool assertions_ok = true;
};

MicroRun run_micro_once(const SimConfig& cfg, const MicroProblem& problem,
                        const MicroStepper& stepper, const fs::path& out_dir) {
  const LabeledGrid& grid = *problem.grid;
  std::function<Real(Real, Real)> s0;
  if (cfg.init_s) s0 = make_profile(*cfg.init_s);
  MicroState init =
      make_micro_state(grid, stepper, make_profile(cfg.init_v1), make_profile(cfg.init_v2), s0,
                       make_profile(cfg.init_w1), make_profile(cfg.init_w2));

  fs::create_directories(out_dir);
  CsvWriter csv((out_dir / "micro_diagnostics.csv").string(),
                {"t", "energy", "mean_ue", "max_s", "max_v1", "max_v2", "eps_v1", "eps_v2",
                 "eps_s", "eps_w1", "eps_w2", "h1_ui1", "h1_ui2", "h1_ue", "trace_defect"});
  MicroRun run;
  const auto observer = [&](int step, const MicroState& state, const MicroDiagnostics& d) {
    csv.row({d.t, d.energy, d.mean_ue, d.max_s, d.max_v1, d.max_v2, d.eps_v1, d.eps_v2, d.eps_s,
             d.eps_w1, d.eps_w2, d.h1_ui1, d.h1_ui2, d.h1_ue, d.trace_defect});
    if (step > 0 && (std::abs(d.mean_ue) > cfg.mean_tol ||
                     d.trace_defect > 10.0 * cfg.solver_tol))
      run.assertions_ok = false;
    if (cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0) {
      const std::string tag = step_tag(step);
      write_vtk_scalar((out_dir / ("micro_ui1_" + tag + ".vtk")).string(), grid, "ui1", state.ui1,
                       true);
      write_vtk_scalar((out_dir / ("micro_ui2_" + tag + ".vtk")).string(), grid, "ui2", state.ui2,
                       true);
      write_vtk_scalar((out_dir / ("micro_ue_" + tag + ".vtk")).string(), grid, "ue", state.ue,
                       true);
    }
  };
  run.trajectory = run_micro(problem, std::move(init), observer);
  return run;
}

int run_micro_command(const SimConfig& cfg, const fs::path& out_dir) {
  require_band(cfg, "micro");
  const Real eps = cfg.eps_list.front();
  const LabeledGrid grid = tile_microstructure(cfg.geometry, eps, cfg.micro_n_per_cell);
  const MicroProblem problem = make_micro_problem(cfg, grid, eps);
  const MicroStepper stepper(problem);
  const MicroRun run = run_micro_once(cfg, problem, stepper, out_dir);
  std::cout << "micro: eps = " << eps << ", finished "
            << static_cast<int>(std::round(cfg.t_end / cfg.dt)) << " steps\n";
  if (!run.assertions_ok) std::cout << "micro: trace or mean assertion failed\n";
  return run.assertions_ok ? 0 : 1;
}

int run_converge_command(const SimConfig& cfg, const fs::path& out_dir) {
  require_band(cfg, "converge");

  CsvWriter tensor_csv((out_dir / "tensors.csv").string(),
                       {"phase", "formula", "m11", "m12", "m22", "eig1", "eig2"});
  const ComputedTensors tensors = compute_effective_tensors(cfg, &tensor_csv, true);
  if (!tensors.all_valid) {
    std::cout << "converge: tensor validation failed\n";
    return 1;
  }

  // the homogenized run does not depend on eps; one run serves every eps
  const LabeledGrid macro_grid = make_macro_grid(cfg.macro_n);
  const MacroProblem macro_problem = make_macro_problem(cfg, macro_grid, tensors);
  MacroState macro_init = make_macro_state(macro_grid, make_profile(cfg.init_v1),
                                           make_profile(cfg.init_v2), make_profile(cfg.init_w1),
                                           make_profile(cfg.init_w2));
  const MacroTrajectory macro = run_macro(macro_problem, std::move(macro_init));

  const LabeledGrid ref = build_reference_cell(cfg.geometry, cfg.reference_n);
  const CorrectorSet chi_i1 =
      solve_correctors(ref, CoefficientTensor::constant(cfg.intra_tensor), {Phase::Intra1},
                       cfg.solver_tol);
  const CorrectorSet chi_i2 =
      solve_correctors(ref, CoefficientTensor::constant(cfg.intra_tensor), {Phase::Intra2},
                       cfg.solver_tol);
  const CorrectorSet chi_e = solve_correctors(
      ref, CoefficientTensor::constant(cfg.extra_tensor), {Phase::Extra}, cfg.solver_tol);

  std::vector<Real> eps_sorted = cfg.eps_list;
  std::sort(eps_sorted.rbegin(), eps_sorted.rend());

  CsvWriter errors_csv((out_dir / "errors.csv").string(),
                       {"eps", "t", "e_v1", "e_v2", "e_s", "e_ui1", "e_ui2", "e_ue"});
  CsvWriter grad_csv((out_dir / "errors_gradient.csv").string(),
                     {"eps", "t", "plain_i1", "corrected_i1", "plain_i2", "corrected_i2",
                      "plain_e", "corrected_e"});

  std::vector<MicroMacroError> records;
  for (Real eps : eps_sorted) {
    const LabeledGrid grid = tile_microstructure(cfg.geometry, eps, cfg.micro_n_per_cell);
    const MicroProblem problem = make_micro_problem(cfg, grid, eps);
    const MicroStepper stepper(problem);
    std::ostringstream sub;
    sub << "eps_" << eps;
    const MicroRun run = run_micro_once(cfg, problem, stepper, out_dir / sub.str());
    if (!run.assertions_ok) {
      std::cout << "converge: micro assertions failed at eps = " << eps << "\n";
      return 1;
    }
    const MicroMacroError err = micro_macro_error(run.trajectory.final_state, problem,
                                                  macro.final_state, macro_problem, cfg.geometry,
                                                  cfg.micro_n_per_cell);
    const GradientErrorRecord grad = micro_macro_gradient_error(
        run.trajectory.final_state, problem, macro.final_state, macro_problem, cfg.geometry,
        cfg.micro_n_per_cell, ref, chi_i1, chi_i2, chi_e);
    errors_csv.row({err.eps, err.t, err.e_v1, err.e_v2, err.e_s, err.e_ui1, err.e_ui2, err.e_ue});
    grad_csv.row({grad.eps, grad.t, grad.plain_i1, grad.corrected_i1, grad.plain_i2,
                  grad.corrected_i2, grad.plain_e, grad.corrected_e});
    std::cout << "converge: eps = " << eps << "  e_v1 = " << err.e_v1 << "  e_v2 = " << err.e_v2
              << "  e_s = " << err.e_s << "  e_ue = " << err.e_ue << "\n";
    records.push_back(err);
  }

  bool monotone = true;
  for (std::size_t i = 1; i < records.size(); ++i) {
    monotone = monotone && records[i].e_v1 < records[i - 1].e_v1 &&
               records[i].e_v2 < records[i - 1].e_v2 && records[i].e_s < records[i - 1].e_s &&
               records[i].e_ue < records[i - 1].e_ue;
  }
  std::cout << "converge: unfolded errors " << (monotone ? "strictly decrease" : "DO NOT decrease")
            << " along the eps sequence\n";
  return monotone ? 0 : 1;
}

int run_check_ionic(const SimConfig& cfg, const fs::path& out_dir) {
  const AssumptionReport report = check_assumptions(cfg.ionic, -3.0, 3.0, 1000);
  const std::string text = report.to_text();
  std::cout << text;
  std::ofstream out(out_dir / "ionic_report.txt");
  out << text;
  return report.all_passed() ? 0 : 1;
}

int run_check_unfolding(const SimConfig& cfg, const fs::path& out_dir, std::uint64_t seed) {
  std::ostringstream text;
  bool all = true;
  for (Real eps : cfg.eps_list)
    for (int resolution : {4, 8}) {
      const IdentityReport report = verify_identities(cfg.geometry, eps, resolution, seed);
      all = all && report.all_passed();
      text << report.to_text();
    }
  std::cout << text.str();
  std::ofstream out(out_dir / "unfolding_report.txt");
  out << text.str();
  return all ? 0 : 1;
}

int dispatch(const std::string& command, const CommonOptions& opts) {
  const SimConfig cfg = load_config(opts);
  const fs::path out_dir(cfg.output_dir);
  write_echo(cfg, out_dir);
  if (command == "cell-problems") {
    CsvWriter csv((out_dir / "tensors.csv").string(),
                  {"phase", "formula", "m11", "m12", "m22", "eig1", "eig2"});
    const ComputedTensors tensors = compute_effective_tensors(cfg, &csv, true);
    return tensors.all_valid ? 0 : 1;
  }
  if (command == "macro") return run_macro_command(cfg, out_dir);
  if (command == "micro") return run_micro_command(cfg, out_dir);
  if (command == "converge") return run_converge_command(cfg, out_dir);
  if (command == "check-ionic") return run_check_ionic(cfg, out_dir);
  if (command == "check-unfolding") return run_check_unfolding(cfg, out_dir, opts.seed);
  throw ConfigError("unknown command '" + command + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multiscale tridomain simulation toolkit"};
  app.require_subcommand(1);

  CommonOptions opts;
  const std::vector<std::string> commands = {"cell-problems", "macro",       "micro",
                                             "converge",      "check-ionic", "check-unfolding"};
  const std::vector<std::string> descriptions = {
      "solve the cell problems and report effective tensors",
      "time-step the homogenized tridomain system",
      "time-step the microscopic tridomain system (first eps of eps_list)",
      "run the eps-convergence study (micro vs homogenized)",
      "verify the membrane-model structural assumptions",
      "verify the unfolding operator identities"};
  for (std::size_t i = 0; i < commands.size(); ++i) {
    CLI::App* sub = app.add_subcommand(commands[i], descriptions[i]);
    sub->add_option("--config", opts.config_path, "path to the run configuration")->required();
    sub->add_option("--out", opts.out_override, "output directory override");
    sub->add_option("--seed", opts.seed, "seed for randomized checks");
  }

  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return dispatch(command, opts);
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return 2;
  } catch (const AlignmentError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "runtime error: " << err.what() << "\n";
    return 3;
  }
}
