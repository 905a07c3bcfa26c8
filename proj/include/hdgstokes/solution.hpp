#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hdgstokes/basis.hpp"
#include "hdgstokes/dofmap.hpp"
#include "hdgstokes/mesh.hpp"

namespace hdgstokes {

/// Coefficient vectors of the full HDG solution. Element fields are stored
/// per element against the orthonormal bases: tensors L,G with layout
/// (2r+c)*dk + m, vectors y,z with s*dk1 + b, scalars p,q with m.
/// Trace fields live on interior faces (zhat is identically zero on the
/// boundary; yhat equals P_M(u tau) there and is not stored).
struct DiscreteSolution {
  int k = 0;
  std::vector<Eigen::VectorXd> L, G;  // 4*dk
  std::vector<Eigen::VectorXd> y, z;  // 2*dk1
  std::vector<Eigen::VectorXd> p, q;  // dk
  std::vector<Eigen::VectorXd> yhat, zhat;  // per interior face, 2*(k+1)
  std::vector<Eigen::VectorXd> u;           // per boundary face, k+1

  static DiscreteSolution zero(const Mesh& mesh, int k) {
    DiscreteSolution s;
    s.k = k;
    const int dk = scalar_space_dim(k), dk1 = scalar_space_dim(k + 1);
    const int ne = mesh.num_elements();
    s.L.assign(ne, Eigen::VectorXd::Zero(4 * dk));
    s.G.assign(ne, Eigen::VectorXd::Zero(4 * dk));
    s.y.assign(ne, Eigen::VectorXd::Zero(2 * dk1));
    s.z.assign(ne, Eigen::VectorXd::Zero(2 * dk1));
    s.p.assign(ne, Eigen::VectorXd::Zero(dk));
    s.q.assign(ne, Eigen::VectorXd::Zero(dk));
    s.yhat.assign(mesh.num_interior_faces(), Eigen::VectorXd::Zero(2 * (k + 1)));
    s.zhat.assign(mesh.num_interior_faces(), Eigen::VectorXd::Zero(2 * (k + 1)));
    s.u.assign(mesh.num_boundary_faces(), Eigen::VectorXd::Zero(k + 1));
    return s;
  }
};

/// L2 norm over T_h of a per-element coefficient field (orthonormal basis:
/// the coefficient 2-norm).
inline double field_norm(const std::vector<Eigen::VectorXd>& coeffs) {
  double s = 0.0;
  for (const auto& c : coeffs) s += c.squaredNorm();
  return std::sqrt(s);
}

/// (field, 1)_Omega for a scalar field: only the constant modes contribute,
/// with weight sqrt(|K|).
inline double field_mean_integral(const Mesh& mesh, const std::vector<Eigen::VectorXd>& coeffs) {
  double s = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e)
    s += coeffs[e](0) * std::sqrt(mesh.element_area(e));
  return s;
}

/// Split a solved trace vector into per-face yhat/zhat/u blocks.
inline void split_trace_vector(const Mesh& mesh, const DofMap& dm, const Eigen::VectorXd& zeta,
                               DiscreteSolution& sol) {
  const int nfe = dm.nfe;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    if (mesh.faces[f].is_boundary()) {
      sol.u[dm.boundary_id[f]] = zeta.segment(dm.u_start(f), nfe);
    } else {
      sol.yhat[dm.interior_id[f]] = zeta.segment(dm.yhat_start(f), 2 * nfe);
      sol.zhat[dm.interior_id[f]] = zeta.segment(dm.zhat_start(f), 2 * nfe);
    }
  }
}

}  // namespace hdgstokes
