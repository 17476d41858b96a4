#include "tridom/unfolding.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace tridom {

namespace {

int checked_cells(const LabeledGrid& tiled, Real eps, int n_per_cell) {
  if (tiled.periodic_x() || tiled.periodic_y())
    throw ConfigError("unfolding expects the tiled (non-periodic) grid");
  if (!(eps > 0.0) || std::abs(1.0 / eps - std::round(1.0 / eps)) > 1e-9)
    throw ConfigError("unfolding: 1/eps must be an integer");
  const int cells = static_cast<int>(std::round(1.0 / eps));
  if (tiled.nx() != cells * n_per_cell || tiled.ny() != cells * n_per_cell) {
    std::ostringstream msg;
    msg << "unfolding: grid resolution " << tiled.nx() << " does not match " << cells << " cells x "
        << n_per_cell << " elements";
    throw ConfigError(msg.str());
  }
  return cells;
}

// local node ids of the reference trace of a label, from the reference build
std::vector<std::pair<int, int>> reference_trace_edges(const CellGeometrySpec& spec, int n,
                                                       InterfaceLabel label) {
  const LabeledGrid ref = build_reference_cell(spec, n);
  std::vector<std::pair<int, int>> edges;  // local node pairs
  for (const auto& e : ref.interface_edges()) {
    if (e.label != label) continue;
    edges.emplace_back(e.jy * (n + 1) + e.ix, e.jy * (n + 1) + e.ix + 1);
  }
  return edges;
}

}  // namespace

UnfoldedField unfold_volume(const LabeledGrid& tiled, const Vector& field, Real eps,
                            int n_per_cell) {
  const int cells = checked_cells(tiled, eps, n_per_cell);
  UnfoldedField out;
  out.eps = eps;
  out.cells = cells;
  out.ref_n = n_per_cell;
  out.kind = UnfoldedField::Kind::Volume;
  out.values.setZero(cells * cells, (n_per_cell + 1) * (n_per_cell + 1));
  for (int cy = 0; cy < cells; ++cy)
    for (int cx = 0; cx < cells; ++cx) {
      const int row = out.cell_index(cx, cy);
      for (int j = 0; j <= n_per_cell; ++j)
        for (int i = 0; i <= n_per_cell; ++i)
          out.values(row, out.local_node(i, j)) =
              field[tiled.node(cx * n_per_cell + i, cy * n_per_cell + j)];
    }
  return out;
}

UnfoldedField unfold_boundary(const LabeledGrid& tiled, const Vector& trace, Real eps,
                              int n_per_cell, const CellGeometrySpec& spec, InterfaceLabel label) {
  const int cells = checked_cells(tiled, eps, n_per_cell);
  UnfoldedField out;
  out.eps = eps;
  out.cells = cells;
  out.ref_n = n_per_cell;
  out.kind = UnfoldedField::Kind::Boundary;
  out.values.setZero(cells * cells, (n_per_cell + 1) * (n_per_cell + 1));
  const auto edges = reference_trace_edges(spec, n_per_cell, label);
  for (int cy = 0; cy < cells; ++cy)
    for (int cx = 0; cx < cells; ++cx) {
      const int row = out.cell_index(cx, cy);
      for (const auto& [pa, pb] : edges) {
        for (int local : {pa, pb}) {
          const int i = local % (n_per_cell + 1);
          const int j = local / (n_per_cell + 1);
          out.values(row, local) = trace[tiled.node(cx * n_per_cell + i, cy * n_per_cell + j)];
        }
      }
    }
  return out;
}

Real volume_norm_sq(const UnfoldedField& f, const CellGeometrySpec& spec, PhaseSet phases) {
  const int n = f.ref_n;
  const LabeledGrid ref = build_reference_cell(spec, n);
  const Q1Quadrature quad(1.0 / n, 1.0 / n);
  const Real cell_measure = f.eps * f.eps;
  Real total = 0;
  for (int row = 0; row < f.values.rows(); ++row) {
    Real cell_sum = 0;
    for (int ey = 0; ey < n; ++ey)
      for (int ex = 0; ex < n; ++ex) {
        if (!phases.contains(ref.element_phase(ex, ey))) continue;
        const std::array<int, 4> local = {f.local_node(ex, ey), f.local_node(ex + 1, ey),
                                          f.local_node(ex, ey + 1), f.local_node(ex + 1, ey + 1)};
        for (int gp = 0; gp < 4; ++gp) {
          Real u = 0;
          for (int a = 0; a < 4; ++a) u += f.values(row, local[a]) * quad.value[gp][a];
          cell_sum += quad.weight[gp] * u * u;
        }
      }
    total += cell_measure * cell_sum;
  }
  return total;
}

Real boundary_norm_sq(const UnfoldedField& f, const CellGeometrySpec& spec, InterfaceLabel label) {
  const int n = f.ref_n;
  const auto edges = reference_trace_edges(spec, n, label);
  const Real h = 1.0 / n;
  const Real cell_measure = f.eps * f.eps;
  Real total = 0;
  for (int row = 0; row < f.values.rows(); ++row) {
    Real cell_sum = 0;
    for (const auto& [pa, pb] : edges) {
      const Real ua = f.values(row, pa);
      const Real ub = f.values(row, pb);
      cell_sum += h * ((ua * ua + ub * ub) / 3.0 + ua * ub / 3.0);
    }
    total += cell_measure * cell_sum;
  }
  return total;
}

Vector cell_averages(const UnfoldedField& f) {
  const int n = f.ref_n;
  const Real quarter = 0.25 / (n * n);
  Vector out = Vector::Zero(f.values.rows());
  for (int row = 0; row < f.values.rows(); ++row) {
    Real sum = 0;
    for (int ey = 0; ey < n; ++ey)
      for (int ex = 0; ex < n; ++ex)
        sum += quarter * (f.values(row, f.local_node(ex, ey)) +
                          f.values(row, f.local_node(ex + 1, ey)) +
                          f.values(row, f.local_node(ex, ey + 1)) +
                          f.values(row, f.local_node(ex + 1, ey + 1)));
    out[row] = sum;  // |Y| = 1
  }
  return out;
}

bool IdentityReport::all_passed() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string IdentityReport::to_text() const {
  std::ostringstream out;
  out << "unfolding identities at eps = " << eps << ", resolution = " << resolution << "\n";
  for (const auto& c : checks)
    out << "  " << (c.pass ? "[pass] " : "[FAIL] ") << c.name << "  defect = " << c.defect << "\n";
  return out.str();
}

IdentityReport verify_identities(const CellGeometrySpec& spec, Real eps, int resolution,
                                 std::uint64_t seed) {
  const LabeledGrid tiled = tile_microstructure(spec, eps, resolution);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<Real> uni(-1.0, 1.0);
  auto random_field = [&]() {
    Vector v(tiled.num_nodes());
    for (int p = 0; p < v.size(); ++p) v[p] = uni(rng);
    return v;
  };

  IdentityReport report;
  report.eps = eps;
  report.resolution = resolution;
  const Real tol = 1e-12;
  auto push = [&](const std::string& name, Real defect) {
    report.checks.push_back({name, defect, defect <= tol});
  };

  const Vector u = random_field();
  const Vector w = random_field();

  {  // linearity of the re-indexing
    const UnfoldedField lhs = unfold_volume(tiled, 2.0 * u - 3.0 * w, eps, resolution);
    const UnfoldedField a = unfold_volume(tiled, u, eps, resolution);
    const UnfoldedField b = unfold_volume(tiled, w, eps, resolution);
    push("linearity T(2u - 3w) = 2 T(u) - 3 T(w)",
         (lhs.values - 2.0 * a.values + 3.0 * b.values).cwiseAbs().maxCoeff());
  }

  {  // product rule on membrane traces
    const Vector mask = tiled.interface_node_mask(InterfaceLabel::Membrane1);
    const Vector tv = mask.cwiseProduct(u);
    const Vector tw = mask.cwiseProduct(w);
    const UnfoldedField lhs =
        unfold_boundary(tiled, tv.cwiseProduct(tw), eps, resolution, spec, InterfaceLabel::Membrane1);
    const UnfoldedField a = unfold_boundary(tiled, tv, eps, resolution, spec, InterfaceLabel::Membrane1);
    const UnfoldedField b = unfold_boundary(tiled, tw, eps, resolution, spec, InterfaceLabel::Membrane1);
    push("product rule T_b(vw) = T_b(v) T_b(w)",
         (lhs.values - a.values.cwiseProduct(b.values)).cwiseAbs().maxCoeff());
  }

  {  // volume norm identity per phase
    Real defect = 0;
    const UnfoldedField tu = unfold_volume(tiled, u, eps, resolution);
    for (Phase phase : {Phase::Intra1, Phase::Intra2, Phase::Extra}) {
      const SparseMatrix mass = assemble_mass(tiled, {phase});
      const Real rhs = u.dot(mass * u);  // |Y| = 1
      const Real lhs = volume_norm_sq(tu, spec, {phase});
      defect = std::max(defect, std::abs(lhs - rhs));
    }
    push("volume norm ||T u||^2 = |Y| ||u||^2", defect);
  }

  {  // boundary norm identity per label
    Real defect = 0;
    for (InterfaceLabel label :
         {InterfaceLabel::Membrane1, InterfaceLabel::Membrane2, InterfaceLabel::Gap}) {
      const Vector mask = tiled.interface_node_mask(label);
      const Vector tv = mask.cwiseProduct(u);
      const SparseMatrix bmass = assemble_interface_mass(tiled, label);
      const Real rhs = eps * tv.dot(bmass * tv);
      const Real lhs = boundary_norm_sq(unfold_boundary(tiled, tv, eps, resolution, spec, label),
                                        spec, label);
      defect = std::max(defect, std::abs(lhs - rhs));
    }
    push("boundary norm ||T_b v||^2 = eps |Y| ||v||^2", defect);
  }

  {  // gradient rule on element-center difference quotients
    const UnfoldedField tu = unfold_volume(tiled, u, eps, resolution);
    const int n = resolution;
    Real defect = 0;
    for (int cy = 0; cy < tu.cells; ++cy)
      for (int cx = 0; cx < tu.cells; ++cx) {
        const int row = tu.cell_index(cx, cy);
        for (int ey = 0; ey < n; ++ey)
          for (int ex = 0; ex < n; ++ex) {
            const Real u0 = tu.values(row, tu.local_node(ex, ey));
            const Real u1 = tu.values(row, tu.local_node(ex + 1, ey));
            const Real u2 = tu.values(row, tu.local_node(ex, ey + 1));
            const Real u3 = tu.values(row, tu.local_node(ex + 1, ey + 1));
            const Real h = 1.0 / n;
            const Vector2 grad_y = {((u1 + u3) - (u0 + u2)) / (2.0 * h),
                                    ((u2 + u3) - (u0 + u1)) / (2.0 * h)};
            const Vector2 grad_x =
                element_gradient(tiled, u, cx * n + ex, cy * n + ey);
            defect = std::max(defect, (grad_y - eps * grad_x).cwiseAbs().maxCoeff());
          }
      }
    push("gradient rule grad_y T(u) = eps T(grad_x u)", defect);
  }

  return report;
}

namespace {

Real trace_error_sq(const UnfoldedField& unfolded, const LabeledGrid& macro_grid,
                    const Vector& macro_field, const CellGeometrySpec& spec,
                    InterfaceLabel label) {
  const int n = unfolded.ref_n;
  const auto edges = reference_trace_edges(spec, n, label);
  const Real h = 1.0 / n;
  const Real cell_measure = unfolded.eps * unfolded.eps;
  Real total = 0;
  for (int cy = 0; cy < unfolded.cells; ++cy)
    for (int cx = 0; cx < unfolded.cells; ++cx) {
      const int row = unfolded.cell_index(cx, cy);
      const Real xc = (cx + 0.5) * unfolded.eps;
      const Real yc = (cy + 0.5) * unfolded.eps;
      const Real macro_value = evaluate_q1(macro_grid, macro_field, xc, yc);
      Real cell_sum = 0;
      for (const auto& [pa, pb] : edges) {
        const Real da = unfolded.values(row, pa) - macro_value;
        const Real db = unfolded.values(row, pb) - macro_value;
        cell_sum += h * ((da * da + db * db) / 3.0 + da * db / 3.0);
      }
      total += cell_measure * cell_sum;
    }
  return total;
}

Real volume_error_sq(const UnfoldedField& unfolded, const LabeledGrid& macro_grid,
                     const Vector& macro_field, const CellGeometrySpec& spec, Phase phase) {
  const int n = unfolded.ref_n;
  const LabeledGrid ref = build_reference_cell(spec, n);
  const Q1Quadrature quad(1.0 / n, 1.0 / n);
  const Real cell_measure = unfolded.eps * unfolded.eps;
  Real total = 0;
  for (int cy = 0; cy < unfolded.cells; ++cy)
    for (int cx = 0; cx < unfolded.cells; ++cx) {
      const int row = unfolded.cell_index(cx, cy);
      const Real xc = (cx + 0.5) * unfolded.eps;
      const Real yc = (cy + 0.5) * unfolded.eps;
      const Real macro_value = evaluate_q1(macro_grid, macro_field, xc, yc);
      Real cell_sum = 0;
      for (int ey = 0; ey < n; ++ey)
        for (int ex = 0; ex < n; ++ex) {
          if (ref.element_phase(ex, ey) != phase) continue;
          const std::array<int, 4> local = {
              unfolded.local_node(ex, ey), unfolded.local_node(ex + 1, ey),
              unfolded.local_node(ex, ey + 1), unfolded.local_node(ex + 1, ey + 1)};
          for (int gp = 0; gp < 4; ++gp) {
            Real d = -macro_value;
            for (int a = 0; a < 4; ++a) d += unfolded.values(row, local[a]) * quad.value[gp][a];
            cell_sum += quad.weight[gp] * d * d;
          }
        }
      total += cell_measure * cell_sum;
    }
  return total;
}

void check_times(Real t_micro, Real t_macro) {
  if (std::abs(t_micro - t_macro) > 1e-9 * std::max(1.0, std::abs(t_macro)))
    throw ConfigError("micro_macro_error: states are at different times");
}

}  // namespace

MicroMacroError micro_macro_error(const MicroState& micro, const MicroProblem& micro_problem,
                                  const MacroState& macro, const MacroProblem& macro_problem,
                                  const CellGeometrySpec& spec, int n_per_cell) {
  check_times(micro.t, macro.t);
  const LabeledGrid& tiled = *micro_problem.grid;
  const LabeledGrid& macro_grid = *macro_problem.grid;
  const Real eps = micro_problem.eps;

  MicroMacroError e;
  e.eps = eps;
  e.t = micro.t;

  const auto trace_err = [&](const Vector& trace, const Vector& macro_field, InterfaceLabel label) {
    const UnfoldedField tu = unfold_boundary(tiled, trace, eps, n_per_cell, spec, label);
    return std::sqrt(trace_error_sq(tu, macro_grid, macro_field, spec, label));
  };
  e.e_v1 = trace_err(micro.v1, macro.v1(), InterfaceLabel::Membrane1);
  e.e_v2 = trace_err(micro.v2, macro.v2(), InterfaceLabel::Membrane2);
  e.e_s = trace_err(micro.s, macro.s(), InterfaceLabel::Gap);

  const auto vol_err = [&](const Vector& field, const Vector& macro_field, Phase phase) {
    const UnfoldedField tu = unfold_volume(tiled, field, eps, n_per_cell);
    return std::sqrt(volume_error_sq(tu, macro_grid, macro_field, spec, phase));
  };
  e.e_ui1 = vol_err(micro.ui1, macro.ui1, Phase::Intra1);
  e.e_ui2 = vol_err(micro.ui2, macro.ui2, Phase::Intra2);
  e.e_ue = vol_err(micro.ue, macro.ue, Phase::Extra);
  return e;
}

GradientErrorRecord micro_macro_gradient_error(
    const MicroState& micro, const MicroProblem& micro_problem, const MacroState& macro,
    const MacroProblem& macro_problem, const CellGeometrySpec& spec, int n_per_cell,
    const LabeledGrid& reference_grid, const CorrectorSet& chi_i1, const CorrectorSet& chi_i2,
    const CorrectorSet& chi_e) {
  check_times(micro.t, macro.t);
  const LabeledGrid& tiled = *micro_problem.grid;
  const LabeledGrid& macro_grid = *macro_problem.grid;
  const Real eps = micro_problem.eps;
  const int cells = checked_cells(tiled, eps, n_per_cell);
  const LabeledGrid ref = build_reference_cell(spec, n_per_cell);

  GradientErrorRecord rec;
  rec.eps = eps;
  rec.t = micro.t;

  const Real elem_measure = eps * eps / (n_per_cell * n_per_cell);
  auto accumulate = [&](const Vector& micro_field, const Vector& macro_field, Phase phase,
                        const CorrectorSet& chi, Real* plain, Real* corrected) {
    Real plain_sq = 0, corr_sq = 0;
    for (int cy = 0; cy < cells; ++cy)
      for (int cx = 0; cx < cells; ++cx) {
        const Real xc = (cx + 0.5) * eps;
        const Real yc = (cy + 0.5) * eps;
        const Vector2 g_macro = gradient_q1(macro_grid, macro_field, xc, yc);
        for (int ey = 0; ey < n_per_cell; ++ey)
          for (int ex = 0; ex < n_per_cell; ++ex) {
            if (ref.element_phase(ex, ey) != phase) continue;
            const Vector2 g_micro = element_gradient(
                tiled, micro_field, cx * n_per_cell + ex, cy * n_per_cell + ey);
            // corrector gradient at the matching reference-grid element
            const Real y1 = (ex + 0.5) / n_per_cell;
            const Real y2 = (ey + 0.5) / n_per_cell;
            const int rx = std::min(static_cast<int>(y1 * reference_grid.nx()),
                                    reference_grid.nx() - 1);
            const int ry = std::min(static_cast<int>(y2 * reference_grid.ny()),
                                    reference_grid.ny() - 1);
            Matrix2 chi_grad;
            chi_grad.col(0) = element_gradient(reference_grid, chi.chi[0], rx, ry);
            chi_grad.col(1) = element_gradient(reference_grid, chi.chi[1], rx, ry);
            const Vector2 corrected_target = g_macro + chi_grad * g_macro;
            plain_sq += elem_measure * (g_micro - g_macro).squaredNorm();
            corr_sq += elem_measure * (g_micro - corrected_target).squaredNorm();
          }
      }
    *plain = std::sqrt(plain_sq);
    *corrected = std::sqrt(corr_sq);
  };

  accumulate(micro.ui1, macro.ui1, Phase::Intra1, chi_i1, &rec.plain_i1, &rec.corrected_i1);
  accumulate(micro.ui2, macro.ui2, Phase::Intra2, chi_i2, &rec.plain_i2, &rec.corrected_i2);
  accumulate(micro.ue, macro.ue, Phase::Extra, chi_e, &rec.plain_e, &rec.corrected_e);
  return rec;
}

}  // namespace tridom
