#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace hdgstokes {

/// Quadrature rule on a reference domain (triangle or edge).
/// Points are reference coordinates: rows of `points` for the triangle
/// {u,v >= 0, u+v <= 1}, a single column for the edge [-1,1].
struct QuadratureRule {
  Eigen::MatrixXd points;   // n x 2 (triangle) or n x 1 (edge)
  Eigen::VectorXd weights;  // sums to the reference measure
  int exactness = 0;
};

namespace detail {

/// Gauss nodes/weights from a symmetric tridiagonal Jacobi matrix
/// (Golub-Welsch). `diag`/`offdiag` are the recurrence coefficients,
/// `mu0` the total weight mass.
inline void golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag,
                         double mu0, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  const int n = static_cast<int>(diag.size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, offdiag, Eigen::ComputeEigenvectors);
  nodes = es.eigenvalues();
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    weights(i) = mu0 * v0 * v0;
  }
}

/// Gauss-Legendre on [-1,1], exact to degree 2n-1.
inline void gauss_legendre(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd off(std::max(n - 1, 0));
  for (int j = 1; j < n; ++j) off(j - 1) = j / std::sqrt(4.0 * j * j - 1.0);
  golub_welsch(diag, off, 2.0, nodes, weights);
}

/// Gauss-Jacobi with weight (1-x) on [-1,1], exact to degree 2n-1.
inline void gauss_jacobi10(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  Eigen::VectorXd diag(n), off(std::max(n - 1, 0));
  for (int j = 0; j < n; ++j) diag(j) = -1.0 / ((2.0 * j + 1.0) * (2.0 * j + 3.0));
  for (int j = 1; j < n; ++j) {
    const double b = j * (j + 1.0) / ((2.0 * j + 1.0) * (2.0 * j + 1.0));
    off(j - 1) = std::sqrt(b);
  }
  golub_welsch(diag, off, 2.0, nodes, weights);
}

}  // namespace detail

/// Gauss rule on the reference edge [-1,1] with `points` nodes,
/// exact to degree 2*points-1.
inline QuadratureRule edge_quadrature(int points) {
  if (points < 1) throw std::invalid_argument("edge_quadrature: points >= 1 required");
  Eigen::VectorXd x, w;
  detail::gauss_legendre(points, x, w);
  QuadratureRule rule;
  rule.points = x;
  rule.weights = w;
  rule.exactness = 2 * points - 1;
  return rule;
}

/// Conical product rule on the reference triangle {u,v >= 0, u+v <= 1},
/// exact for all polynomials of total degree <= `exactness`.
inline QuadratureRule triangle_quadrature(int exactness) {
  if (exactness < 1) throw std::invalid_argument("triangle_quadrature: exactness >= 1 required");
  if (exactness > 60) throw std::invalid_argument("triangle_quadrature: exactness > 60 unsupported");
  const int n = exactness / 2 + 1;  // 2n-1 >= exactness
  Eigen::VectorXd xa, wa, xb, wb;
  detail::gauss_legendre(n, xa, wa);
  detail::gauss_jacobi10(n, xb, wb);
  QuadratureRule rule;
  rule.points.resize(n * n, 2);
  rule.weights.resize(n * n);
  int idx = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double xi = 0.5 * (1.0 + xa(i));
      const double eta = 0.5 * (1.0 + xb(j));
      rule.points(idx, 0) = xi * (1.0 - eta);
      rule.points(idx, 1) = eta;
      rule.weights(idx) = wa(i) * wb(j) / 8.0;
      ++idx;
    }
  }
  rule.exactness = 2 * n - 1;
  return rule;
}

}  // namespace hdgstokes
