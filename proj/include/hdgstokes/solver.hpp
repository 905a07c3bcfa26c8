#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "hdgstokes/local.hpp"
#include "hdgstokes/solution.hpp"
#include "hdgstokes/trace_system.hpp"

namespace hdgstokes {

struct SolverConfig {
  int k = 1;             // polynomial degree, 0..3
  double gamma = 1.0;    // control regularization
  double dt = 256.0;     // pseudo-time step of the augmented Lagrangian
  double tol = 1e-8;     // relative pressure tolerance
  int max_iter = 200;
  // memory policy: above this element count the per-element recovery maps
  // F1/F2 are recomputed at the end instead of stored
  int full_condense_threshold = 20000;

  void validate() const {
    if (k < 0 || k > 3) throw std::invalid_argument("SolverConfig: k in 0..3 required");
    if (gamma <= 0.0) throw std::invalid_argument("SolverConfig: gamma > 0 required");
    if (dt <= 0.0) throw std::invalid_argument("SolverConfig: dt > 0 required");
    if (tol <= 0.0) throw std::invalid_argument("SolverConfig: tol > 0 required");
    if (max_iter < 1) throw std::invalid_argument("SolverConfig: max_iter >= 1 required");
  }
};

struct IterationReport {
  int iterations = 0;
  bool converged = false;
  std::vector<double> dp_rel, dq_rel;  // per-iteration relative changes
  std::vector<double> p_mean;          // (p^{(m)}, 1)_Omega per iteration
  std::vector<double> q_mean;
  double data_scale = 0.0;             // sqrt(|Pi f|^2 + |Pi y_d|^2)
};

namespace detail {

/// Relative change with the zero-denominator guard: if the new field is
/// (numerically) zero, fall back to the absolute change scaled by the data.
inline double guarded_relative_change(double dnorm, double newnorm, double scale, double tol) {
  if (newnorm > 1e-14 * std::max(scale, 1e-300)) return dnorm / newnorm;
  if (scale == 0.0) return 0.0;
  return (dnorm < tol * scale) ? 0.0 : 1.0;
}

}  // namespace detail

/// Drive the augmented-Lagrangian iteration to its fixed point.
/// Starts from p = q = 0, factors the trace system once, and updates
/// the pressures until the summed relative change drops below tol.
inline std::pair<DiscreteSolution, IterationReport> solve_control_problem(
    const Mesh& mesh, const SolverConfig& cfg, const VecFn& f, const VecFn& y_d) {
  cfg.validate();
  const int ne = mesh.num_elements();
  AssemblyContext ctx(mesh, cfg.k, cfg.gamma, cfg.dt);
  const DofMap dm = build_dof_map(mesh, cfg.k);
  const int dk = ctx.dk();

  // Keep the full condensation only on meshes where the memory for F1/F2 is
  // irrelevant; on large meshes recovery recomputes the local blocks.
  const bool keep_full = ne <= cfg.full_condense_threshold;

  std::vector<CondensedElement> condensed;
  condensed.reserve(ne);
  double data_sq = 0.0;
  for (int e = 0; e < ne; ++e) {
    LocalBlocks lb = assemble_local_blocks(ctx, e, f, y_d);
    data_sq += lb.b1.squaredNorm() + lb.b2.squaredNorm();
    condensed.push_back(condense(ctx, lb, keep_full ? CondenseMode::full : CondenseMode::lean));
  }
  const double data_scale = std::sqrt(data_sq);

  TraceSystem sys = assemble_trace_system(mesh, dm, condensed);
  if (!keep_full)
    for (auto& ce : condensed) ce.Azeta.resize(0, 0);
  sys.factorize();

  std::vector<Eigen::VectorXd> p(ne, Eigen::VectorXd::Zero(dk)), q(ne, Eigen::VectorXd::Zero(dk));
  std::vector<Eigen::VectorXd> p_last = p, q_last = q;  // inputs of the final iteration

  IterationReport rep;
  rep.data_scale = data_scale;
  Eigen::VectorXd zeta;
  int m = 0;
  while (m < cfg.max_iter) {
    ++m;
    p_last = p;
    q_last = q;
    const Eigen::VectorXd b = assemble_trace_rhs(mesh, dm, condensed, p, q);
    zeta = sys.solve(b);

    double dp_sq = 0.0, dq_sq = 0.0, pn_sq = 0.0, qn_sq = 0.0;
    for (int e = 0; e < ne; ++e) {
      const auto& ce = condensed[e];
      const auto idx = element_trace_dofs(mesh, dm, e);
      Eigen::VectorXd zl(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) zl(i) = zeta(idx[i]);
      Eigen::VectorXd b2t(2 * dk);
      b2t << p[e] / ce.dt, q[e] / ce.dt;
      const Eigen::VectorXd H1 = ce.G3 * b2t + ce.h0;
      const Eigen::VectorXd g = ce.F3 * zl + H1;
      const Eigen::VectorXd pn = g.head(dk), qn = g.tail(dk);
      dp_sq += (pn - p[e]).squaredNorm();
      dq_sq += (qn - q[e]).squaredNorm();
      pn_sq += pn.squaredNorm();
      qn_sq += qn.squaredNorm();
      p[e] = pn;
      q[e] = qn;
    }
    const double rel_p = detail::guarded_relative_change(std::sqrt(dp_sq), std::sqrt(pn_sq),
                                                         data_scale, cfg.tol);
    const double rel_q = detail::guarded_relative_change(std::sqrt(dq_sq), std::sqrt(qn_sq),
                                                         data_scale, cfg.tol);
    rep.dp_rel.push_back(rel_p);
    rep.dq_rel.push_back(rel_q);
    rep.p_mean.push_back(field_mean_integral(mesh, p));
    rep.q_mean.push_back(field_mean_integral(mesh, q));
    if (rel_p + rel_q < cfg.tol) {
      rep.converged = true;
      break;
    }
  }
  rep.iterations = m;

  // Recover the element fields of the final iterate (inputs p_last, q_last).
  DiscreteSolution sol = DiscreteSolution::zero(mesh, cfg.k);
  split_trace_vector(mesh, dm, zeta, sol);
  const int dk1 = ctx.dk1();
  for (int e = 0; e < ne; ++e) {
    const CondensedElement* ce = &condensed[e];
    CondensedElement tmp;
    if (!ce->full) {
      LocalBlocks lb = assemble_local_blocks(ctx, e, f, y_d);
      tmp = condense(ctx, lb, CondenseMode::full);
      ce = &tmp;
    }
    Eigen::VectorXd J1, J2, J3;
    local_iteration_rhs(*ce, p_last[e], q_last[e], J1, J2, J3);
    const auto idx = element_trace_dofs(mesh, dm, e);
    Eigen::VectorXd zl(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) zl(i) = zeta(idx[i]);
    Eigen::VectorXd alpha, beta, gamma_;
    recover_fields(*ce, zl, J1, J2, J3, alpha, beta, gamma_);
    sol.L[e] = alpha.head(4 * dk);
    sol.G[e] = alpha.tail(4 * dk);
    sol.y[e] = beta.head(2 * dk1);
    sol.z[e] = beta.tail(2 * dk1);
    sol.p[e] = gamma_.head(dk);
    sol.q[e] = gamma_.tail(dk);
  }
  return {std::move(sol), std::move(rep)};
}

/// Residual norms of the stationary HDG optimality system (4.7a,b,e),
/// evaluated blockwise through the assembled element matrices, plus the
/// zero-mean defects of the pressures.
struct KktResiduals {
  double state_tensor = 0.0;      // (4.7a), tensor test functions
  double state_momentum = 0.0;    // (4.7a), velocity tests
  double state_mass = 0.0;        // (4.7a), pressure tests
  double state_flux = 0.0;        // (4.7a), interior trace tests
  double adjoint_tensor = 0.0;    // (4.7b)
  double adjoint_momentum = 0.0;
  double adjoint_mass = 0.0;
  double adjoint_flux = 0.0;
  double optimality = 0.0;        // (4.7e)
  double p_mean = 0.0, q_mean = 0.0;
  double data_scale = 0.0;

  double max_equation_residual() const {
    double m = 0.0;
    for (double v : {state_tensor, state_momentum, state_mass, state_flux, adjoint_tensor,
                     adjoint_momentum, adjoint_mass, adjoint_flux, optimality})
      m = std::max(m, v);
    return m;
  }
};

inline KktResiduals kkt_residual(const Mesh& mesh, const SolverConfig& cfg,
                                 const DiscreteSolution& sol, const VecFn& f, const VecFn& y_d) {
  cfg.validate();
  AssemblyContext ctx(mesh, cfg.k, cfg.gamma, cfg.dt);
  const DofMap dm = build_dof_map(mesh, cfg.k);
  const int nfe = ctx.nfe();

  KktResiduals R;
  double data_sq = 0.0;
  // face-row accumulators (contributions from both sides of interior faces)
  Eigen::VectorXd ry = Eigen::VectorXd::Zero(dm.n_interior * 2 * nfe);
  Eigen::VectorXd rz = Eigen::VectorXd::Zero(dm.n_interior * 2 * nfe);
  double st_sq = 0.0, at_sq = 0.0, sm_sq = 0.0, am_sq = 0.0, sc_sq = 0.0, ac_sq = 0.0,
         op_sq = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const LocalBlocks lb = assemble_local_blocks(ctx, e, f, y_d);
    data_sq += lb.b1.squaredNorm() + lb.b2.squaredNorm();
    // local trace values in condensation order
    Eigen::VectorXd yh = Eigen::VectorXd::Zero(2 * nfe * lb.n_int);
    Eigen::VectorXd zh = Eigen::VectorXd::Zero(2 * nfe * lb.n_int);
    Eigen::VectorXd uh = Eigen::VectorXd::Zero(nfe * lb.n_bnd);
    for (const auto& ef : lb.faces) {
      if (ef.face < 0) continue;
      if (ef.interior) {
        yh.segment(ef.int_pos * 2 * nfe, 2 * nfe) = sol.yhat[dm.interior_id[ef.face]];
        zh.segment(ef.int_pos * 2 * nfe, 2 * nfe) = sol.zhat[dm.interior_id[ef.face]];
      } else {
        uh.segment(ef.bnd_pos * nfe, nfe) = sol.u[dm.boundary_id[ef.face]];
      }
    }
    // (4.7a): A1 L + A2 y - A3 yhat - A4 u = 0
    st_sq += (sol.L[e] + lb.a2 * sol.y[e] - lb.a3 * yh - lb.a4 * uh).squaredNorm();
    // (4.7b): A1 G + A2 z - A3 zhat = 0
    at_sq += (sol.G[e] + lb.a2 * sol.z[e] - lb.a3 * zh).squaredNorm();
    // momentum rows: -A2^T L + A5 y + A6 p - A7 yhat - A8 u = b1
    {
      const Eigen::VectorXd r = -lb.a2.transpose() * sol.L[e] + lb.a5 * sol.y[e] +
                                lb.a6 * sol.p[e] - lb.a7 * yh - lb.a8 * uh - lb.b1;
      sm_sq += r.squaredNorm();
    }
    // -A2^T G - A9 y + A5 z - A6 q - A7 zhat = -b2
    {
      const Eigen::VectorXd r = -lb.a2.transpose() * sol.G[e] - sol.y[e] + lb.a5 * sol.z[e] -
                                lb.a6 * sol.q[e] - lb.a7 * zh + lb.b2;
      am_sq += r.squaredNorm();
    }
    // mass rows (stationary): -A6^T y + A11 yhat = 0
    sc_sq += (-lb.a6.transpose() * sol.y[e] + lb.a11 * yh).squaredNorm();
    ac_sq += (-lb.a6.transpose() * sol.z[e] + lb.a11 * zh).squaredNorm();
    // flux-continuity rows (per interior face, accumulated over both sides)
    if (lb.n_int > 0) {
      const Eigen::VectorXd fy = lb.a3.transpose() * sol.L[e] - lb.a7.transpose() * sol.y[e] -
                                 lb.a11.transpose() * sol.p[e];
      const Eigen::VectorXd fz = lb.a3.transpose() * sol.G[e] - lb.a7.transpose() * sol.z[e] -
                                 lb.a11.transpose() * sol.q[e];
      for (const auto& ef : lb.faces) {
        if (ef.face < 0 || !ef.interior) continue;
        const int gi = dm.interior_id[ef.face] * 2 * nfe;
        const int li = ef.int_pos * 2 * nfe;
        ry.segment(gi, 2 * nfe) += fy.segment(li, 2 * nfe) +
            (1.0 / ef.hstab) * sol.yhat[dm.interior_id[ef.face]];
        rz.segment(gi, 2 * nfe) += fz.segment(li, 2 * nfe) +
            (1.0 / ef.hstab) * sol.zhat[dm.interior_id[ef.face]];
      }
    }
    // optimality rows: A13 G - A14 z - gamma A15 u = 0 (boundary faces)
    if (lb.n_bnd > 0) {
      const Eigen::VectorXd ro = lb.a4.transpose() * sol.G[e] - lb.a8.transpose() * sol.z[e] -
                                 cfg.gamma * uh;
      op_sq += ro.squaredNorm();
    }
  }
  R.state_tensor = std::sqrt(st_sq);
  R.adjoint_tensor = std::sqrt(at_sq);
  R.state_momentum = std::sqrt(sm_sq);
  R.adjoint_momentum = std::sqrt(am_sq);
  R.state_mass = std::sqrt(sc_sq);
  R.adjoint_mass = std::sqrt(ac_sq);
  R.state_flux = ry.norm();
  R.adjoint_flux = rz.norm();
  R.optimality = std::sqrt(op_sq);
  R.p_mean = std::abs(field_mean_integral(mesh, sol.p));
  R.q_mean = std::abs(field_mean_integral(mesh, sol.q));
  R.data_scale = std::sqrt(data_sq);
  return R;
}

}  // namespace hdgstokes
