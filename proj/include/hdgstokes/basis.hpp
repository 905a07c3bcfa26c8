#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace hdgstokes {

/// Orthonormal modal basis (Dubiner type) on the reference triangle
/// {u,v >= 0, u+v <= 1}. Modes are ordered by total degree; the first
/// mode is the constant 1/sqrt(|T|) = sqrt(2).
///
/// psi_{ij}(u,v) = N_ij * Q_i(u,v) * P_j^{(2i+1,0)}(2v-1), where
/// Q_i(u,v) = (1-v)^i P_i(s/(1-v)), s = 2u+v-1, evaluated through a
/// scaled three-term recurrence so everything stays polynomial.
class TriangleBasis {
public:
  explicit TriangleBasis(int degree) : degree_(degree) {
    if (degree < 0) throw std::invalid_argument("TriangleBasis: degree >= 0 required");
    for (int p = 0; p <= degree; ++p)
      for (int j = 0; j <= p; ++j) modes_.push_back({p - j, j});
  }

  int degree() const { return degree_; }
  int dimension() const { return static_cast<int>(modes_.size()); }

  /// Values and reference gradients at the given points (rows of `pts`).
  /// Output tables are (num points) x dimension.
  void eval(const Eigen::MatrixXd& pts, Eigen::MatrixXd& val,
            Eigen::MatrixXd& gu, Eigen::MatrixXd& gv) const {
    const int nq = static_cast<int>(pts.rows());
    const int nd = dimension();
    val.resize(nq, nd); gu.resize(nq, nd); gv.resize(nq, nd);
    const int d = degree_;
    // Q_i and derivatives for i = 0..d
    std::vector<Eigen::VectorXd> Q(d + 1), Qu(d + 1), Qv(d + 1);
    Eigen::VectorXd u = pts.col(0), v = pts.col(1);
    Eigen::VectorXd s = 2.0 * u + v - Eigen::VectorXd::Ones(nq);
    Eigen::VectorXd w = Eigen::VectorXd::Ones(nq) - v;
    Q[0] = Eigen::VectorXd::Ones(nq); Qu[0] = Eigen::VectorXd::Zero(nq); Qv[0] = Eigen::VectorXd::Zero(nq);
    if (d >= 1) { Q[1] = s; Qu[1] = Eigen::VectorXd::Constant(nq, 2.0); Qv[1] = Eigen::VectorXd::Ones(nq); }
    for (int n = 1; n < d; ++n) {
      const double a = (2.0 * n + 1.0) / (n + 1.0), b = n / (n + 1.0);
      Q[n + 1] = a * s.cwiseProduct(Q[n]) - b * w.cwiseProduct(w).cwiseProduct(Q[n - 1]);
      Qu[n + 1] = a * (2.0 * Q[n] + s.cwiseProduct(Qu[n])) - b * w.cwiseProduct(w).cwiseProduct(Qu[n - 1]);
      Qv[n + 1] = a * (Q[n] + s.cwiseProduct(Qv[n]))
                  - b * (-2.0 * w.cwiseProduct(Q[n - 1]) + w.cwiseProduct(w).cwiseProduct(Qv[n - 1]));
    }
    // Jacobi P_j^{(alpha,0)}(b), b = 2v-1, for each alpha = 2i+1
    Eigen::VectorXd bb = 2.0 * v - Eigen::VectorXd::Ones(nq);
    for (int m = 0; m < nd; ++m) {
      const int i = modes_[m].first, j = modes_[m].second;
      Eigen::VectorXd P, Pb;
      jacobi_with_derivative(2 * i + 1, j, bb, P, Pb);
      const double norm = std::sqrt(2.0 * (2.0 * i + 1.0) * (i + j + 1.0));
      val.col(m) = norm * Q[i].cwiseProduct(P);
      gu.col(m) = norm * Qu[i].cwiseProduct(P);
      gv.col(m) = norm * (Qv[i].cwiseProduct(P) + 2.0 * Q[i].cwiseProduct(Pb));
    }
  }

  Eigen::MatrixXd values(const Eigen::MatrixXd& pts) const {
    Eigen::MatrixXd val, gu, gv;
    eval(pts, val, gu, gv);
    return val;
  }

private:
  // P_j^{(alpha,0)} and its derivative w.r.t. its own argument.
  static void jacobi_with_derivative(int alpha, int j, const Eigen::VectorXd& x,
                                     Eigen::VectorXd& P, Eigen::VectorXd& Px) {
    const int nq = static_cast<int>(x.size());
    Eigen::VectorXd p0 = Eigen::VectorXd::Ones(nq), d0 = Eigen::VectorXd::Zero(nq);
    if (j == 0) { P = p0; Px = d0; return; }
    Eigen::VectorXd p1 = ((alpha + 2.0) / 2.0) * x + Eigen::VectorXd::Constant(nq, alpha / 2.0);
    Eigen::VectorXd d1 = Eigen::VectorXd::Constant(nq, (alpha + 2.0) / 2.0);
    for (int n = 2; n <= j; ++n) {
      // standard Jacobi recurrence with beta = 0
      const double c = 2.0 * n + alpha;
      const double a1 = 2.0 * n * (n + alpha) * (c - 2.0);
      const double a2 = (c - 1.0) * alpha * alpha;
      const double a3 = (c - 2.0) * (c - 1.0) * c;
      const double a4 = 2.0 * (n + alpha - 1.0) * (n - 1.0) * c;
      Eigen::VectorXd p2 = ((a2 * p1 + a3 * x.cwiseProduct(p1)) - a4 * p0) / a1;
      Eigen::VectorXd d2 = ((a2 * d1 + a3 * (p1 + x.cwiseProduct(d1))) - a4 * d0) / a1;
      p0 = p1; p1 = p2; d0 = d1; d1 = d2;
    }
    P = p1; Px = d1;
  }

  int degree_;
  std::vector<std::pair<int, int>> modes_;
};

/// Orthonormal Legendre basis on the reference edge [-1,1];
/// dimension is degree+1.
class EdgeBasis {
public:
  explicit EdgeBasis(int degree) : degree_(degree) {
    if (degree < 0) throw std::invalid_argument("EdgeBasis: degree >= 0 required");
  }

  int degree() const { return degree_; }
  int dimension() const { return degree_ + 1; }

  /// Values at parameter points t in [-1,1]; table is (num points) x (degree+1).
  Eigen::MatrixXd values(const Eigen::VectorXd& t) const {
    const int nq = static_cast<int>(t.size());
    Eigen::MatrixXd val(nq, degree_ + 1);
    val.col(0) = Eigen::VectorXd::Ones(nq);
    if (degree_ >= 1) val.col(1) = t;
    for (int n = 2; n <= degree_; ++n)
      val.col(n) = ((2.0 * n - 1.0) * t.cwiseProduct(val.col(n - 1)) - (n - 1.0) * val.col(n - 2)) / n;
    for (int n = 0; n <= degree_; ++n) val.col(n) *= std::sqrt((2.0 * n + 1.0) / 2.0);
    return val;
  }

private:
  int degree_;
};

inline int scalar_space_dim(int degree) { return (degree + 1) * (degree + 2) / 2; }

}  // namespace hdgstokes
