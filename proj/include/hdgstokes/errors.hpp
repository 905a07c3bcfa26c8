#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "hdgstokes/local.hpp"
#include "hdgstokes/solution.hpp"

namespace hdgstokes {

/// Point evaluation of a DiscreteSolution on a structured square mesh.
/// Locates the containing element in O(1) from the grid metadata.
class FieldEvaluator {
public:
  FieldEvaluator(const Mesh& mesh, const DiscreteSolution& sol)
      : mesh_(mesh), sol_(sol), bk_(sol.k), bk1_(sol.k + 1),
        dk_(scalar_space_dim(sol.k)), dk1_(scalar_space_dim(sol.k + 1)) {
    if (!mesh.structured)
      throw std::invalid_argument("FieldEvaluator: structured mesh required");
  }

  int locate(const Vec2& x) const {
    const int n = mesh_.grid_n;
    const double h = mesh_.side / n;
    const double lx = (x.x() - mesh_.origin.x()) / h;
    const double ly = (x.y() - mesh_.origin.y()) / h;
    int ix = std::min(std::max(static_cast<int>(std::floor(lx)), 0), n - 1);
    int iy = std::min(std::max(static_cast<int>(std::floor(ly)), 0), n - 1);
    const double fx = lx - ix, fy = ly - iy;
    // lower triangle (v00,v10,v11) covers fy <= fx
    const int cell = 2 * (iy * n + ix);
    return (fy <= fx) ? cell : cell + 1;
  }

  Vec2 velocity(const std::vector<Eigen::VectorXd>& field, const Vec2& x) const {
    const int e = locate(x);
    const ElementGeometry g(mesh_, e);
    Eigen::MatrixXd pt(1, 2), V, Gu, Gv;
    pt.row(0) = g.to_reference(x).transpose();
    bk1_.eval(pt, V, Gu, Gv);
    Vec2 out = Vec2::Zero();
    for (int s = 0; s < 2; ++s)
      for (int b = 0; b < dk1_; ++b) out(s) += field[e](s * dk1_ + b) * V(0, b) * g.inv_sqrt_detJ;
    return out;
  }

  double scalar(const std::vector<Eigen::VectorXd>& field, const Vec2& x) const {
    const int e = locate(x);
    const ElementGeometry g(mesh_, e);
    Eigen::MatrixXd pt(1, 2), V, Gu, Gv;
    pt.row(0) = g.to_reference(x).transpose();
    bk_.eval(pt, V, Gu, Gv);
    double out = 0.0;
    for (int m = 0; m < dk_; ++m) out += field[e](m) * V(0, m) * g.inv_sqrt_detJ;
    return out;
  }

  Eigen::Matrix2d tensor(const std::vector<Eigen::VectorXd>& field, const Vec2& x) const {
    const int e = locate(x);
    const ElementGeometry g(mesh_, e);
    Eigen::MatrixXd pt(1, 2), V, Gu, Gv;
    pt.row(0) = g.to_reference(x).transpose();
    bk_.eval(pt, V, Gu, Gv);
    Eigen::Matrix2d out = Eigen::Matrix2d::Zero();
    for (int rc = 0; rc < 4; ++rc)
      for (int m = 0; m < dk_; ++m)
        out(rc / 2, rc % 2) += field[e](rc * dk_ + m) * V(0, m) * g.inv_sqrt_detJ;
    return out;
  }

  /// Control value on a boundary point (nearest boundary face of the
  /// element located at x nudged inward). `face_hint` must be the boundary
  /// face containing x.
  double control_on_face(int face, double t) const {
    const Face& fc = mesh_.faces[face];
    if (!fc.is_boundary()) throw std::invalid_argument("control_on_face: boundary face required");
    int bid = 0;
    for (int f = 0; f < face; ++f)
      if (mesh_.faces[f].is_boundary()) ++bid;
    EdgeBasis be(sol_.k);
    Eigen::VectorXd tv(1);
    tv(0) = t;
    const Eigen::MatrixXd V = be.values(tv);
    const double scale = std::sqrt(2.0 / fc.length);
    double out = 0.0;
    for (int a = 0; a <= sol_.k; ++a) out += sol_.u[bid](a) * V(0, a) * scale;
    return out;
  }

  const Mesh& mesh() const { return mesh_; }
  const DiscreteSolution& solution() const { return sol_; }

private:
  const Mesh& mesh_;
  const DiscreteSolution& sol_;
  TriangleBasis bk_, bk1_;
  int dk_, dk1_;
};

namespace detail {

template <typename EvalDiscrete, typename EvalExact>
double l2_error_volume(const Mesh& mesh, int basis_degree, int components,
                       const QuadratureRule& rule, EvalDiscrete&& uh, EvalExact&& uex) {
  TriangleBasis basis(basis_degree);
  Eigen::MatrixXd V, Gu, Gv;
  basis.eval(rule.points, V, Gu, Gv);
  const int nq = static_cast<int>(rule.weights.size());
  const int dim = basis.dimension();
  double err = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const ElementGeometry g(mesh, e);
    for (int q = 0; q < nq; ++q) {
      const Vec2 x = g.to_physical(rule.points.row(q).transpose());
      const double w = rule.weights(q) * g.detJ;
      for (int comp = 0; comp < components; ++comp) {
        double vh = 0.0;
        for (int m = 0; m < dim; ++m) vh += uh(e, comp, m) * V(q, m) * g.inv_sqrt_detJ;
        const double d = vh - uex(x, comp);
        err += w * d * d;
      }
    }
  }
  return std::sqrt(err);
}

}  // namespace detail

/// ||p_ex - p_h||_{T_h} for a scalar field of degree k.
inline double l2_error_scalar(const Mesh& mesh, int k, const std::vector<Eigen::VectorXd>& coeffs,
                              const std::function<double(const Vec2&)>& exact,
                              const QuadratureRule& rule) {
  return detail::l2_error_volume(
      mesh, k, 1, rule, [&](int e, int, int m) { return coeffs[e](m); },
      [&](const Vec2& x, int) { return exact(x); });
}

/// ||y_ex - y_h||_{T_h} for a vector field of degree k+1.
inline double l2_error_vector(const Mesh& mesh, int k, const std::vector<Eigen::VectorXd>& coeffs,
                              const std::function<Vec2(const Vec2&)>& exact,
                              const QuadratureRule& rule) {
  const int dk1 = scalar_space_dim(k + 1);
  return detail::l2_error_volume(
      mesh, k + 1, 2, rule, [&](int e, int s, int b) { return coeffs[e](s * dk1 + b); },
      [&](const Vec2& x, int s) { return exact(x)(s); });
}

/// ||L_ex - L_h||_{T_h} for a tensor field of degree k.
inline double l2_error_tensor(const Mesh& mesh, int k, const std::vector<Eigen::VectorXd>& coeffs,
                              const std::function<Eigen::Matrix2d(const Vec2&)>& exact,
                              const QuadratureRule& rule) {
  const int dk = scalar_space_dim(k);
  return detail::l2_error_volume(
      mesh, k, 4, rule, [&](int e, int rc, int m) { return coeffs[e](rc * dk + m); },
      [&](const Vec2& x, int rc) { return exact(x)(rc / 2, rc % 2); });
}

/// ||u_ex - u_h|| over the boundary faces; the exact control is evaluated as
/// exact(x, tau) with the face tangent.
inline double l2_error_control(const Mesh& mesh, int k, const std::vector<Eigen::VectorXd>& u,
                               const std::function<double(const Vec2&, const Vec2&)>& exact,
                               int quad_points) {
  EdgeBasis be(k);
  QuadratureRule rule = edge_quadrature(quad_points);
  const Eigen::MatrixXd V = be.values(rule.points.col(0));
  double err = 0.0;
  int bid = 0;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& fc = mesh.faces[f];
    if (!fc.is_boundary()) continue;
    const Vec2 pa = mesh.vertices[fc.v[0]], pb = mesh.vertices[fc.v[1]];
    const double scale = std::sqrt(2.0 / fc.length);
    for (int q = 0; q < static_cast<int>(rule.weights.size()); ++q) {
      const double t = rule.points(q, 0);
      const Vec2 x = 0.5 * (pa + pb) + 0.5 * t * (pb - pa);
      double vh = 0.0;
      for (int a = 0; a <= k; ++a) vh += u[bid](a) * V(q, a) * scale;
      const double d = vh - exact(x, fc.tangent);
      err += rule.weights(q) * (fc.length / 2.0) * d * d;
    }
    ++bid;
  }
  return std::sqrt(err);
}

/// L2 distances between a coarse solution and a reference solution on a
/// finer mesh of the same family (used when no closed form exists).
struct SolutionDistances {
  double L, G, y, z, p, q, u;
};

inline SolutionDistances solution_distance(const Mesh& mesh, const DiscreteSolution& sol,
                                           const FieldEvaluator& ref, int error_exactness,
                                           int control_points) {
  QuadratureRule rule = triangle_quadrature(error_exactness);
  const int k = sol.k;
  SolutionDistances d{};
  d.L = l2_error_tensor(mesh, k, sol.L,
                        [&](const Vec2& x) { return ref.tensor(ref.solution().L, x); }, rule);
  d.G = l2_error_tensor(mesh, k, sol.G,
                        [&](const Vec2& x) { return ref.tensor(ref.solution().G, x); }, rule);
  d.y = l2_error_vector(mesh, k, sol.y,
                        [&](const Vec2& x) { return ref.velocity(ref.solution().y, x); }, rule);
  d.z = l2_error_vector(mesh, k, sol.z,
                        [&](const Vec2& x) { return ref.velocity(ref.solution().z, x); }, rule);
  d.p = l2_error_scalar(mesh, k, sol.p,
                        [&](const Vec2& x) { return ref.scalar(ref.solution().p, x); }, rule);
  d.q = l2_error_scalar(mesh, k, sol.q,
                        [&](const Vec2& x) { return ref.scalar(ref.solution().q, x); }, rule);

  // control distance: integrate over coarse boundary faces, evaluating the
  // reference control on the matching reference face
  EdgeBasis be(k);
  QuadratureRule erule = edge_quadrature(control_points);
  const Eigen::MatrixXd V = be.values(erule.points.col(0));
  const Mesh& rmesh = ref.mesh();
  double err = 0.0;
  int bid = 0;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& fc = mesh.faces[f];
    if (!fc.is_boundary()) continue;
    const Vec2 pa = mesh.vertices[fc.v[0]], pb = mesh.vertices[fc.v[1]];
    const double scale = std::sqrt(2.0 / fc.length);
    for (int q = 0; q < static_cast<int>(erule.weights.size()); ++q) {
      const double t = erule.points(q, 0);
      const Vec2 x = 0.5 * (pa + pb) + 0.5 * t * (pb - pa);
      double vh = 0.0;
      for (int a = 0; a <= k; ++a) vh += sol.u[bid](a) * V(q, a) * scale;
      // locate the reference boundary face containing x
      int rface = -1;
      double rt = 0.0;
      for (int rf = 0; rf < rmesh.num_faces(); ++rf) {
        const Face& rfc = rmesh.faces[rf];
        if (!rfc.is_boundary()) continue;
        const Vec2 ra = rmesh.vertices[rfc.v[0]], rb = rmesh.vertices[rfc.v[1]];
        const Vec2 dvec = rb - ra;
        const double len2 = dvec.squaredNorm();
        const double s = (x - ra).dot(dvec) / len2;
        const double off = ((x - ra) - s * dvec).norm();
        if (off < 1e-12 && s > -1e-12 && s < 1.0 + 1e-12) {
          rface = rf;
          rt = 2.0 * std::min(std::max(s, 0.0), 1.0) - 1.0;
          break;
        }
      }
      if (rface < 0) throw std::runtime_error("solution_distance: reference face not found");
      const double sign = fc.tangent.dot(rmesh.faces[rface].tangent) >= 0 ? 1.0 : -1.0;
      const double d2 = vh - sign * ref.control_on_face(rface, rt);
      err += erule.weights(q) * (fc.length / 2.0) * d2 * d2;
    }
    ++bid;
  }
  d.u = std::sqrt(err);
  return d;
}

}  // namespace hdgstokes
