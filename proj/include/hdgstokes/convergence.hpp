#pragma once

#include <cmath>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>
#include <vector>

#include "hdgstokes/errors.hpp"
#include "hdgstokes/problems.hpp"
#include "hdgstokes/singular.hpp"
#include "hdgstokes/solver.hpp"

namespace hdgstokes {

struct ConvergenceRow {
  int n = 0;
  double h_over_sqrt2 = 0.0;
  int iterations = 0;
  SolutionDistances err{};
  SolutionDistances order{};  // NaN in the first row / for zero errors
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  RegularityProfile profile;
};

inline double observed_order(double coarse, double fine, double scale) {
  if (!(coarse > 1e-14 * scale) || !(fine > 1e-14 * scale))
    return std::numeric_limits<double>::quiet_NaN();
  return std::log2(coarse / fine);
}

/// Errors of the solved problem against its exact solution (example1-style).
inline SolutionDistances errors_vs_exact(const Mesh& mesh, const DiscreteSolution& sol,
                                         const Problem& pr) {
  const int k = sol.k;
  QuadratureRule rule = triangle_quadrature(2 * (k + 1) + 6);
  SolutionDistances d{};
  d.L = l2_error_tensor(mesh, k, sol.L, pr.grad_y, rule);
  d.G = l2_error_tensor(mesh, k, sol.G, pr.grad_z, rule);
  d.y = l2_error_vector(mesh, k, sol.y, pr.y, rule);
  d.z = l2_error_vector(mesh, k, sol.z, pr.z, rule);
  d.p = l2_error_scalar(mesh, k, sol.p, pr.p, rule);
  d.q = l2_error_scalar(mesh, k, sol.q, pr.q, rule);
  d.u = l2_error_control(mesh, k, sol.u,
                         [&](const Vec2& x, const Vec2& tau) { return pr.y(x).dot(tau); }, k + 6);
  return d;
}

/// Run the solver over a dyadic list of mesh sizes and tabulate errors and
/// observed orders. For problems without a closed form, a reference solution
/// is computed once on `reference_n` (must exceed every entry of n_list).
inline ConvergenceTable convergence_study(const Problem& pr, const SolverConfig& cfg,
                                          const std::vector<int>& n_list, int reference_n = 0,
                                          std::ostream* progress = nullptr) {
  if (n_list.size() < 2) throw std::invalid_argument("convergence_study: >= 2 mesh sizes required");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] != 2 * n_list[i - 1])
      throw std::invalid_argument("convergence_study: sizes must double (dyadic list)");

  ConvergenceTable table;
  table.profile = expected_orders(cfg.k, M_PI / 2.0);

  std::unique_ptr<Mesh> ref_mesh;
  std::unique_ptr<DiscreteSolution> ref_sol;
  std::unique_ptr<FieldEvaluator> ref_eval;
  if (!pr.has_exact) {
    if (reference_n < 2 * n_list.back())
      throw std::invalid_argument("convergence_study: reference_n must exceed the finest mesh");
    ref_mesh = std::make_unique<Mesh>(build_square_mesh(reference_n, pr.side, pr.origin));
    auto [s, rep] = solve_control_problem(*ref_mesh, cfg, pr.f, pr.y_d);
    if (progress)
      *progress << "# reference n=" << reference_n << " iterations=" << rep.iterations << "\n";
    ref_sol = std::make_unique<DiscreteSolution>(std::move(s));
    ref_eval = std::make_unique<FieldEvaluator>(*ref_mesh, *ref_sol);
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int n : n_list) {
    Mesh mesh = build_square_mesh(n, pr.side, pr.origin);
    auto [sol, rep] = solve_control_problem(mesh, cfg, pr.f, pr.y_d);
    ConvergenceRow row;
    row.n = n;
    row.h_over_sqrt2 = mesh.h_max / std::sqrt(2.0);
    row.iterations = rep.iterations;
    row.err = pr.has_exact ? errors_vs_exact(mesh, sol, pr)
                           : solution_distance(mesh, sol, *ref_eval, 2 * (cfg.k + 1) + 6,
                                               cfg.k + 5 + (cfg.k + 5) % 2);
    row.order = {nan, nan, nan, nan, nan, nan, nan};
    if (!table.rows.empty()) {
      const auto& prev = table.rows.back().err;
      row.order.L = observed_order(prev.L, row.err.L, 1.0);
      row.order.G = observed_order(prev.G, row.err.G, 1.0);
      row.order.y = observed_order(prev.y, row.err.y, 1.0);
      row.order.z = observed_order(prev.z, row.err.z, 1.0);
      row.order.p = observed_order(prev.p, row.err.p, 1.0);
      row.order.q = observed_order(prev.q, row.err.q, 1.0);
      row.order.u = observed_order(prev.u, row.err.u, 1.0);
    }
    if (progress) *progress << "# n=" << n << " iterations=" << rep.iterations << "\n";
    table.rows.push_back(row);
  }
  return table;
}

namespace csv {

/// Scientific notation with 6 significant digits; NaN prints as "--".
inline std::string num(double v) {
  if (std::isnan(v)) return "--";
  std::ostringstream os;
  os << std::scientific << std::setprecision(5) << v;
  return os.str();
}

}  // namespace csv

inline void write_convergence_csv(const ConvergenceTable& t, std::ostream& os) {
  os << "n,h_over_sqrt2,err_L,ord_L,err_G,ord_G,err_y,ord_y,err_z,ord_z,"
        "err_p,ord_p,err_q,ord_q,err_u,ord_u,"
        "EO_L,EO_G,EO_y,EO_z,EO_p,EO_q,EO_u\n";
  for (const auto& r : t.rows) {
    os << r.n << "," << csv::num(r.h_over_sqrt2) << "," << csv::num(r.err.L) << ","
       << csv::num(r.order.L) << "," << csv::num(r.err.G) << "," << csv::num(r.order.G) << ","
       << csv::num(r.err.y) << "," << csv::num(r.order.y) << "," << csv::num(r.err.z) << ","
       << csv::num(r.order.z) << "," << csv::num(r.err.p) << "," << csv::num(r.order.p) << ","
       << csv::num(r.err.q) << "," << csv::num(r.order.q) << "," << csv::num(r.err.u) << ","
       << csv::num(r.order.u) << "," << csv::num(t.profile.eo_L) << ","
       << csv::num(t.profile.eo_G) << "," << csv::num(t.profile.eo_y) << ","
       << csv::num(t.profile.eo_z) << "," << csv::num(t.profile.eo_p) << ","
       << csv::num(t.profile.eo_q) << "," << csv::num(t.profile.eo_u) << "\n";
  }
}

/// Per-field coefficient dumps: (element_id, mode_index, component, coefficient).
inline void write_field_csv(const std::vector<Eigen::VectorXd>& field, int components,
                            std::ostream& os) {
  os << "element_id,mode_index,component,coefficient\n";
  for (std::size_t e = 0; e < field.size(); ++e) {
    const int per = static_cast<int>(field[e].size()) / components;
    for (int c = 0; c < components; ++c)
      for (int m = 0; m < per; ++m)
        os << e << "," << m << "," << c << "," << csv::num(field[e](c * per + m)) << "\n";
  }
}

/// Trace/control dumps keyed by face id.
inline void write_trace_csv(const Mesh& mesh, const DofMap& dm,
                            const std::vector<Eigen::VectorXd>& field, bool boundary,
                            int components, std::ostream& os) {
  os << "face_id,mode_index,component,coefficient\n";
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const bool isb = mesh.faces[f].is_boundary();
    if (isb != boundary) continue;
    const int id = boundary ? dm.boundary_id[f] : dm.interior_id[f];
    const int per = static_cast<int>(field[id].size()) / components;
    for (int c = 0; c < components; ++c)
      for (int m = 0; m < per; ++m)
        os << f << "," << m << "," << c << "," << csv::num(field[id](c * per + m)) << "\n";
  }
}

inline void write_iteration_log(const IterationReport& rep, std::ostream& os) {
  os << "m,dp_rel,dq_rel\n";
  for (std::size_t m = 0; m < rep.dp_rel.size(); ++m)
    os << (m + 1) << "," << csv::num(rep.dp_rel[m]) << "," << csv::num(rep.dq_rel[m]) << "\n";
}

}  // namespace hdgstokes
