#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#ifdef HDGSTOKES_WITH_UMFPACK
#include <Eigen/UmfPackSupport>
#endif
#include <memory>
#include <stdexcept>
#include <vector>

#include "hdgstokes/dofmap.hpp"
#include "hdgstokes/local.hpp"

namespace hdgstokes {

using SpMat = Eigen::SparseMatrix<double>;

/// Reduced globally coupled system A zeta = b over the trace/control
/// unknowns. The matrix and its factorization are fixed across
/// augmented-Lagrangian iterations; only b changes.
class TraceSystem {
public:
  SpMat A;
  Eigen::VectorXd b;

  void factorize() {
#ifdef HDGSTOKES_WITH_UMFPACK
    umf_ = std::make_unique<Eigen::UmfPackLU<SpMat>>();
    umf_->compute(A);
    if (umf_->info() != Eigen::Success)
      throw std::runtime_error("TraceSystem: UMFPACK factorization failed (singular system?)");
#else
    slu_ = std::make_unique<Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>>();
    slu_->compute(A);
    if (slu_->info() != Eigen::Success)
      throw std::runtime_error("TraceSystem: SparseLU factorization failed (singular system?)");
#endif
  }

  bool factorized() const {
#ifdef HDGSTOKES_WITH_UMFPACK
    return umf_ != nullptr;
#else
    return slu_ != nullptr;
#endif
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    if (!factorized()) throw std::runtime_error("TraceSystem: factorize() before solve()");
#ifdef HDGSTOKES_WITH_UMFPACK
    return umf_->solve(rhs);
#else
    return slu_->solve(rhs);
#endif
  }

  double relative_residual(const Eigen::VectorXd& x, const Eigen::VectorXd& rhs) const {
    const double nb = rhs.norm();
    if (nb == 0.0) return (A * x).norm();
    return (A * x - rhs).norm() / nb;
  }

private:
#ifdef HDGSTOKES_WITH_UMFPACK
  std::unique_ptr<Eigen::UmfPackLU<SpMat>> umf_;
#else
  std::unique_ptr<Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>> slu_;
#endif
};

/// Assemble A = sum_K scatter(B10 F1 + B11 F2 + B12 F3 + B13) once.
inline TraceSystem assemble_trace_system(const Mesh& mesh, const DofMap& dm,
                                         const std::vector<CondensedElement>& condensed) {
  if (static_cast<int>(condensed.size()) != mesh.num_elements())
    throw std::invalid_argument("assemble_trace_system: one CondensedElement per element required");
  TraceSystem sys;
  std::vector<Eigen::Triplet<double>> trips;
  std::size_t nnz_est = 0;
  for (const auto& ce : condensed) nnz_est += static_cast<std::size_t>(ce.nz()) * ce.nz();
  trips.reserve(nnz_est);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto idx = element_trace_dofs(mesh, dm, e);
    const auto& Az = condensed[e].Azeta;
    if (static_cast<int>(idx.size()) != Az.rows())
      throw std::invalid_argument("assemble_trace_system: inconsistent DOF dimensions");
    for (int i = 0; i < Az.rows(); ++i)
      for (int j = 0; j < Az.cols(); ++j)
        if (Az(i, j) != 0.0) trips.emplace_back(idx[i], idx[j], Az(i, j));
  }
  sys.A.resize(dm.total, dm.total);
  sys.A.setFromTriplets(trips.begin(), trips.end());
  sys.b = Eigen::VectorXd::Zero(dm.total);
  return sys;
}

/// b^{(m)} = -sum_K scatter(B10 J1 + B11 J2 + B12 J3), expressed through the
/// condensed pieces as -(r0 + W1 H1) with H1 = G3 [p;q]/dt + h0.
inline Eigen::VectorXd assemble_trace_rhs(const Mesh& mesh, const DofMap& dm,
                                          const std::vector<CondensedElement>& condensed,
                                          const std::vector<Eigen::VectorXd>& p_prev,
                                          const std::vector<Eigen::VectorXd>& q_prev) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(dm.total);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& ce = condensed[e];
    Eigen::VectorXd b2t(2 * ce.dk);
    b2t << p_prev[e] / ce.dt, q_prev[e] / ce.dt;
    const Eigen::VectorXd H1 = ce.G3 * b2t + ce.h0;
    const Eigen::VectorXd bloc = ce.r0 + ce.W1 * H1;
    const auto idx = element_trace_dofs(mesh, dm, e);
    for (std::size_t i = 0; i < idx.size(); ++i) b(idx[i]) += bloc(i);
  }
  return b;
}

}  // namespace hdgstokes
