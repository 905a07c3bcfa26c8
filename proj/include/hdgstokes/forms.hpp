#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hdgstokes/local.hpp"
#include "hdgstokes/mesh.hpp"

namespace hdgstokes {

/// One argument tuple of the HDG operator B: a tensor field, a vector field,
/// a scalar field (mean-zero for the operator's domain), and a single-valued
/// trace on the interior faces.
struct HdgFields {
  std::vector<Eigen::VectorXd> tensor;    // per element, 4*dk
  std::vector<Eigen::VectorXd> velocity;  // per element, 2*dk1
  std::vector<Eigen::VectorXd> pressure;  // per element, dk
  std::vector<Eigen::VectorXd> trace;     // per interior face, 2*(k+1)

  static HdgFields zero(const Mesh& mesh, int k) {
    HdgFields x;
    const int dk = scalar_space_dim(k), dk1 = scalar_space_dim(k + 1);
    x.tensor.assign(mesh.num_elements(), Eigen::VectorXd::Zero(4 * dk));
    x.velocity.assign(mesh.num_elements(), Eigen::VectorXd::Zero(2 * dk1));
    x.pressure.assign(mesh.num_elements(), Eigen::VectorXd::Zero(dk));
    x.trace.assign(mesh.num_interior_faces(), Eigen::VectorXd::Zero(2 * (k + 1)));
    return x;
  }
};

/// Remove the constant so that (w,1)_Omega = 0 (W_h^0 membership).
inline void project_zero_mean(const Mesh& mesh, std::vector<Eigen::VectorXd>& pressure) {
  double mean = 0.0, area = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    mean += pressure[e](0) * std::sqrt(mesh.element_area(e));
    area += mesh.element_area(e);
  }
  const double c = mean / area;
  for (int e = 0; e < mesh.num_elements(); ++e)
    pressure[e](0) -= c * std::sqrt(mesh.element_area(e));
}

/// The HDG operator B of the error analysis: the sum of the nine terms,
/// assembled term by term from local quadrature (independent of the matrix
/// assembly path).
inline double hdg_bilinear_form(const Mesh& mesh, int k, const HdgFields& x,
                                const HdgFields& xp) {
  const int dk = scalar_space_dim(k), dk1 = scalar_space_dim(k + 1), nfe = k + 1;
  TriangleBasis bk(k), bk1(k + 1);
  EdgeBasis be(k);
  QuadratureRule vol = triangle_quadrature(2 * (k + 1) + 2);
  QuadratureRule edge = edge_quadrature(k + 2);
  Eigen::MatrixXd Vk, Gku, Gkv, Vk1, Gk1u, Gk1v;
  bk.eval(vol.points, Vk, Gku, Gkv);
  bk1.eval(vol.points, Vk1, Gk1u, Gk1v);
  const Eigen::MatrixXd FB = be.values(edge.points.col(0));
  const int nq = static_cast<int>(vol.weights.size());
  const int ne = static_cast<int>(edge.weights.size());

  // interior-face id lookup
  std::vector<int> int_id(mesh.num_faces(), -1);
  {
    int c = 0;
    for (int f = 0; f < mesh.num_faces(); ++f)
      if (!mesh.faces[f].is_boundary()) int_id[f] = c++;
  }

  double acc = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const ElementGeometry g(mesh, e);
    const Eigen::Matrix2d JinvT = g.Jinv.transpose();
    const double isq = g.inv_sqrt_detJ;
    // volume terms
    for (int q = 0; q < nq; ++q) {
      const double w = vol.weights(q) * g.detJ;
      Eigen::Matrix2d T = Eigen::Matrix2d::Zero(), Tp = Eigen::Matrix2d::Zero();
      Eigen::Vector2d divT = Eigen::Vector2d::Zero(), divTp = Eigen::Vector2d::Zero();
      for (int rc = 0; rc < 4; ++rc) {
        const int r = rc / 2, c = rc % 2;
        for (int m = 0; m < dk; ++m) {
          const double val = Vk(q, m) * isq;
          const Vec2 gp = JinvT * Vec2(Gku(q, m), Gkv(q, m)) * isq;
          T(r, c) += x.tensor[e](rc * dk + m) * val;
          Tp(r, c) += xp.tensor[e](rc * dk + m) * val;
          divT(r) += x.tensor[e](rc * dk + m) * gp(c);
          divTp(r) += xp.tensor[e](rc * dk + m) * gp(c);
        }
      }
      Eigen::Vector2d v = Eigen::Vector2d::Zero(), vp = Eigen::Vector2d::Zero();
      Eigen::Matrix2d gradv = Eigen::Matrix2d::Zero(), gradvp = Eigen::Matrix2d::Zero();
      for (int s = 0; s < 2; ++s)
        for (int b = 0; b < dk1; ++b) {
          const double val = Vk1(q, b) * isq;
          const Vec2 gp = JinvT * Vec2(Gk1u(q, b), Gk1v(q, b)) * isq;
          v(s) += x.velocity[e](s * dk1 + b) * val;
          vp(s) += xp.velocity[e](s * dk1 + b) * val;
          gradv.row(s) += x.velocity[e](s * dk1 + b) * gp.transpose();
          gradvp.row(s) += xp.velocity[e](s * dk1 + b) * gp.transpose();
        }
      double w_ = 0.0;
      Eigen::Vector2d gradwp = Eigen::Vector2d::Zero();
      for (int m = 0; m < dk; ++m) {
        const double val = Vk(q, m) * isq;
        const Vec2 gp = JinvT * Vec2(Gku(q, m), Gkv(q, m)) * isq;
        w_ += x.pressure[e](m) * val;
        gradwp += xp.pressure[e](m) * gp;
      }
      // (L,T') + (y, div T') - (p, div v') + (L, grad v') - (y, grad w')
      acc += w * (T.cwiseProduct(Tp).sum() + v.dot(divTp) - w_ * (gradvp(0, 0) + gradvp(1, 1)) +
                  T.cwiseProduct(gradvp).sum() - v.dot(gradwp));
    }
    // face terms
    for (int loc = 0; loc < 3; ++loc) {
      const int fidx = mesh.element_faces[e][loc];
      const Face& fc = mesh.faces[fidx];
      const bool interior = !fc.is_boundary();
      const double sign = (fc.left == e) ? 1.0 : -1.0;
      const Vec2 n = sign * fc.normal;
      const double L = fc.length;
      const double hinv = 1.0 / stabilization_h(mesh, fidx);
      const Vec2 pa = mesh.vertices[fc.v[0]], pb = mesh.vertices[fc.v[1]];
      Eigen::MatrixXd rq(ne, 2);
      for (int qq = 0; qq < ne; ++qq) {
        const double t = edge.points(qq, 0);
        rq.row(qq) = g.to_reference(0.5 * (pa + pb) + 0.5 * t * (pb - pa)).transpose();
      }
      Eigen::MatrixXd Vkf, Vk1f, tu, tv;
      bk.eval(rq, Vkf, tu, tv);
      bk1.eval(rq, Vk1f, tu, tv);
      const double fb_scale = std::sqrt(2.0 / L);
      // P_M of both velocities: face-basis coefficients via quadrature
      Eigen::MatrixXd pm_x = Eigen::MatrixXd::Zero(nfe, 2), pm_xp = Eigen::MatrixXd::Zero(nfe, 2);
      for (int qq = 0; qq < ne; ++qq) {
        const double wq = edge.weights(qq) * (L / 2.0);
        for (int s = 0; s < 2; ++s) {
          double vs = 0.0, vps = 0.0;
          for (int b = 0; b < dk1; ++b) {
            vs += x.velocity[e](s * dk1 + b) * Vk1f(qq, b) * isq;
            vps += xp.velocity[e](s * dk1 + b) * Vk1f(qq, b) * isq;
          }
          for (int a = 0; a < nfe; ++a) {
            const double ma = fb_scale * FB(qq, a);
            pm_x(a, s) += wq * ma * vs;
            pm_xp(a, s) += wq * ma * vps;
          }
        }
      }
      for (int qq = 0; qq < ne; ++qq) {
        const double wq = edge.weights(qq) * (L / 2.0);
        // pointwise values of both tuples
        Eigen::Matrix2d T = Eigen::Matrix2d::Zero(), Tp = Eigen::Matrix2d::Zero();
        for (int rc = 0; rc < 4; ++rc)
          for (int m = 0; m < dk; ++m) {
            T(rc / 2, rc % 2) += x.tensor[e](rc * dk + m) * Vkf(qq, m) * isq;
            Tp(rc / 2, rc % 2) += xp.tensor[e](rc * dk + m) * Vkf(qq, m) * isq;
          }
        Eigen::Vector2d v = Eigen::Vector2d::Zero(), vp = Eigen::Vector2d::Zero();
        for (int s = 0; s < 2; ++s)
          for (int b = 0; b < dk1; ++b) {
            v(s) += x.velocity[e](s * dk1 + b) * Vk1f(qq, b) * isq;
            vp(s) += xp.velocity[e](s * dk1 + b) * Vk1f(qq, b) * isq;
          }
        double pr = 0.0, prp = 0.0;
        for (int m = 0; m < dk; ++m) {
          pr += x.pressure[e](m) * Vkf(qq, m) * isq;
          prp += xp.pressure[e](m) * Vkf(qq, m) * isq;
        }
        Eigen::Vector2d PMv = Eigen::Vector2d::Zero(), mu = Eigen::Vector2d::Zero(),
                        mup = Eigen::Vector2d::Zero();
        for (int a = 0; a < nfe; ++a) {
          const double ma = fb_scale * FB(qq, a);
          for (int s = 0; s < 2; ++s) {
            PMv(s) += pm_x(a, s) * ma;
            if (interior) {
              mu(s) += x.trace[int_id[fidx]](s * nfe + a) * ma;
              mup(s) += xp.trace[int_id[fidx]](s * nfe + a) * ma;
            }
          }
        }
        const Eigen::Vector2d Tn = T * n, Tpn = Tp * n;
        // -<mu, T' n> (interior), -<L n - p n - h^{-1} P_M v, v'> (all faces),
        // -<h^{-1} mu, v'> (interior), +<mu.n, w'> (interior),
        // +<L n - p n - h^{-1}(P_M v - mu), mu'> (interior)
        double term = -(Tn - pr * n - hinv * PMv).dot(vp);
        if (interior) {
          term += -mu.dot(Tpn) - hinv * mu.dot(vp) + mu.dot(n) * prp +
                  (Tn - pr * n - hinv * (PMv - mu)).dot(mup);
        }
        acc += wq * term;
      }
    }
  }
  return acc;
}

/// The three terms of the energy identity, evaluated directly:
/// |T|^2_Th, |h^{-1/2}(P_M v - mu)|^2 over interior faces (both sides),
/// |h^{-1/2} P_M v|^2 over boundary faces.
struct EnergyTerms {
  double tensor_sq = 0.0;
  double interior_jump_sq = 0.0;
  double boundary_sq = 0.0;
  double total() const { return tensor_sq + interior_jump_sq + boundary_sq; }
};

inline EnergyTerms energy_identity_rhs(const Mesh& mesh, int k, const HdgFields& x) {
  const int dk1 = scalar_space_dim(k + 1), nfe = k + 1;
  TriangleBasis bk1(k + 1);
  EdgeBasis be(k);
  QuadratureRule edge = edge_quadrature(k + 2);
  const Eigen::MatrixXd FB = be.values(edge.points.col(0));
  const int ne = static_cast<int>(edge.weights.size());

  std::vector<int> int_id(mesh.num_faces(), -1);
  {
    int c = 0;
    for (int f = 0; f < mesh.num_faces(); ++f)
      if (!mesh.faces[f].is_boundary()) int_id[f] = c++;
  }

  EnergyTerms E;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    E.tensor_sq += x.tensor[e].squaredNorm();  // orthonormal tensor basis
    const ElementGeometry g(mesh, e);
    for (int loc = 0; loc < 3; ++loc) {
      const int fidx = mesh.element_faces[e][loc];
      const Face& fc = mesh.faces[fidx];
      const double L = fc.length;
      const double hinv = 1.0 / stabilization_h(mesh, fidx);
      const Vec2 pa = mesh.vertices[fc.v[0]], pb = mesh.vertices[fc.v[1]];
      Eigen::MatrixXd rq(ne, 2);
      for (int qq = 0; qq < ne; ++qq) {
        const double t = edge.points(qq, 0);
        rq.row(qq) = g.to_reference(0.5 * (pa + pb) + 0.5 * t * (pb - pa)).transpose();
      }
      Eigen::MatrixXd Vk1f, tu, tv;
      bk1.eval(rq, Vk1f, tu, tv);
      const double fb_scale = std::sqrt(2.0 / L);
      Eigen::MatrixXd pm = Eigen::MatrixXd::Zero(nfe, 2);
      for (int qq = 0; qq < ne; ++qq) {
        const double wq = edge.weights(qq) * (L / 2.0);
        for (int s = 0; s < 2; ++s) {
          double vs = 0.0;
          for (int b = 0; b < dk1; ++b)
            vs += x.velocity[e](s * dk1 + b) * Vk1f(qq, b) * g.inv_sqrt_detJ;
          for (int a = 0; a < nfe; ++a) pm(a, s) += wq * fb_scale * FB(qq, a) * vs;
        }
      }
      // orthonormal face basis: squared norms are coefficient norms
      if (fc.is_boundary()) {
        E.boundary_sq += hinv * pm.squaredNorm();
      } else {
        const auto& mu = x.trace[int_id[fidx]];
        double s2 = 0.0;
        for (int s = 0; s < 2; ++s)
          for (int a = 0; a < nfe; ++a) {
            const double d = pm(a, s) - mu(s * nfe + a);
            s2 += d * d;
          }
        E.interior_jump_sq += hinv * s2;
      }
    }
  }
  return E;
}

}  // namespace hdgstokes
