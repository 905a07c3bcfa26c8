#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "hdgstokes/local.hpp"

using namespace hdgstokes;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

const VecFn zero_fn = [](const Vec2&) { return Vec2::Zero(); };

// ---------------------------------------------------------------------------
// Brute-force assembly oracle: every block entry computed by direct
// quadrature of its defining inner product, one basis pair at a time, with
// P_M realized by a face Gram solve. No algebraic shortcuts shared with the
// implementation.
// ---------------------------------------------------------------------------
struct BruteForce {
  const Mesh& mesh;
  int e, k, dk, dk1, nfe;
  ElementGeometry g;
  QuadratureRule vol = triangle_quadrature(14);
  QuadratureRule edge = edge_quadrature(9);
  TriangleBasis bk, bk1;
  EdgeBasis be;
  MatrixXd Vk, Gku, Gkv, Vk1, Gk1u, Gk1v;

  BruteForce(const Mesh& m, int elem, int degree)
      : mesh(m), e(elem), k(degree), dk(scalar_space_dim(degree)),
        dk1(scalar_space_dim(degree + 1)), nfe(degree + 1), g(m, elem), bk(degree),
        bk1(degree + 1), be(degree) {
    bk.eval(vol.points, Vk, Gku, Gkv);
    bk1.eval(vol.points, Vk1, Gk1u, Gk1v);
  }

  double phi_k(int m, int q) const { return Vk(q, m) * g.inv_sqrt_detJ; }
  double phi_k1(int b, int q) const { return Vk1(q, b) * g.inv_sqrt_detJ; }
  Vec2 grad_k(int m, int q) const {
    return g.Jinv.transpose() * Vec2(Gku(q, m), Gkv(q, m)) * g.inv_sqrt_detJ;
  }
  double wvol(int q) const { return vol.weights(q) * g.detJ; }

  Eigen::Matrix2d tensor_at(int i, int q) const {
    Eigen::Matrix2d T = Eigen::Matrix2d::Zero();
    T(i / dk / 2, (i / dk) % 2) = phi_k(i % dk, q);
    return T;
  }

  MatrixXd A1() const {
    MatrixXd A = MatrixXd::Zero(4 * dk, 4 * dk);
    for (int i = 0; i < 4 * dk; ++i)
      for (int j = 0; j < 4 * dk; ++j)
        for (int q = 0; q < vol.weights.size(); ++q)
          A(i, j) += wvol(q) * tensor_at(j, q).cwiseProduct(tensor_at(i, q)).sum();
    return A;
  }

  MatrixXd A2() const {
    MatrixXd A = MatrixXd::Zero(4 * dk, 2 * dk1);
    for (int i = 0; i < 4 * dk; ++i) {
      const int r = i / dk / 2, c = (i / dk) % 2, m = i % dk;
      for (int s = 0; s < 2; ++s)
        for (int b = 0; b < dk1; ++b)
          for (int q = 0; q < vol.weights.size(); ++q) {
            // div(phi_m E_rc) = d_c phi_m e_r
            const double vj = (s == r) ? phi_k1(b, q) : 0.0;
            A(i, s * dk1 + b) += wvol(q) * vj * grad_k(m, q)(c);
          }
    }
    return A;
  }

  MatrixXd A9() const {
    MatrixXd A = MatrixXd::Zero(2 * dk1, 2 * dk1);
    for (int s = 0; s < 2; ++s)
      for (int b = 0; b < dk1; ++b)
        for (int b2 = 0; b2 < dk1; ++b2)
          for (int q = 0; q < vol.weights.size(); ++q)
            A(s * dk1 + b, s * dk1 + b2) += wvol(q) * phi_k1(b, q) * phi_k1(b2, q);
    return A;
  }

  MatrixXd A10() const {
    MatrixXd A = MatrixXd::Zero(dk, dk);
    for (int m = 0; m < dk; ++m)
      for (int m2 = 0; m2 < dk; ++m2)
        for (int q = 0; q < vol.weights.size(); ++q)
          A(m, m2) += wvol(q) * phi_k(m, q) * phi_k(m2, q);
    return A;
  }

  MatrixXd A6() const {
    MatrixXd A = MatrixXd::Zero(2 * dk1, dk);
    for (int s = 0; s < 2; ++s)
      for (int b = 0; b < dk1; ++b)
        for (int m = 0; m < dk; ++m)
          for (int q = 0; q < vol.weights.size(); ++q)
            A(s * dk1 + b, m) += wvol(q) * grad_k(m, q)(s) * phi_k1(b, q);
    return A;
  }

  struct FaceData {
    Vec2 n, tau;
    double L, h;
    bool interior;
    std::vector<Vec2> x;
    std::vector<double> w;
    MatrixXd face_vals;  // nq x nfe
    MatrixXd tr_k, tr_k1;
    MatrixXd pm_k1;  // P_M of the k+1 traces at quad points
  };

  FaceData face_data(int loc) const {
    const int fidx = mesh.element_faces[e][loc];
    const Face& fc = mesh.faces[fidx];
    FaceData fd;
    fd.interior = !fc.is_boundary();
    fd.n = (fc.left == e ? 1.0 : -1.0) * fc.normal;
    fd.tau = fc.tangent;
    fd.L = fc.length;
    fd.h = stabilization_h(mesh, fidx);
    const Vec2 pa = mesh.vertices[fc.v[0]], pb = mesh.vertices[fc.v[1]];
    const int nq = static_cast<int>(edge.weights.size());
    MatrixXd rq(nq, 2);
    for (int q = 0; q < nq; ++q) {
      const double t = edge.points(q, 0);
      const Vec2 x = 0.5 * (pa + pb) + 0.5 * t * (pb - pa);
      fd.x.push_back(x);
      fd.w.push_back(edge.weights(q) * fd.L / 2.0);
      rq.row(q) = g.to_reference(x).transpose();
    }
    MatrixXd tu, tv;
    bk.eval(rq, fd.tr_k, tu, tv);
    bk1.eval(rq, fd.tr_k1, tu, tv);
    fd.tr_k *= g.inv_sqrt_detJ;
    fd.tr_k1 *= g.inv_sqrt_detJ;
    fd.face_vals = be.values(edge.points.col(0)) * std::sqrt(2.0 / fd.L);
    MatrixXd Gram = MatrixXd::Zero(nfe, nfe);
    for (int a = 0; a < nfe; ++a)
      for (int b = 0; b < nfe; ++b)
        for (int q = 0; q < nq; ++q)
          Gram(a, b) += fd.w[q] * fd.face_vals(q, a) * fd.face_vals(q, b);
    MatrixXd rhs = MatrixXd::Zero(nfe, dk1);
    for (int a = 0; a < nfe; ++a)
      for (int b = 0; b < dk1; ++b)
        for (int q = 0; q < nq; ++q) rhs(a, b) += fd.w[q] * fd.face_vals(q, a) * fd.tr_k1(q, b);
    const MatrixXd coef = Gram.fullPivLu().solve(rhs);
    fd.pm_k1 = fd.face_vals * coef;
    return fd;
  }

  Eigen::Matrix2d tensor_at_face(int i, const FaceData& fd, std::size_t q) const {
    Eigen::Matrix2d T = Eigen::Matrix2d::Zero();
    T(i / dk / 2, (i / dk) % 2) = fd.tr_k(q, i % dk);
    return T;
  }

  MatrixXd A5() const {
    MatrixXd A = MatrixXd::Zero(2 * dk1, 2 * dk1);
    for (int loc = 0; loc < 3; ++loc) {
      const FaceData fd = face_data(loc);
      for (int s = 0; s < 2; ++s)
        for (int bi = 0; bi < dk1; ++bi)
          for (int bj = 0; bj < dk1; ++bj)
            for (std::size_t q = 0; q < fd.w.size(); ++q)
              A(s * dk1 + bi, s * dk1 + bj) += fd.w[q] / fd.h * fd.pm_k1(q, bj) * fd.tr_k1(q, bi);
    }
    return A;
  }

  void interior_blocks(MatrixXd& A3, MatrixXd& A7, MatrixXd& A11, MatrixXd& A12) const {
    std::vector<int> ifaces;
    for (int loc = 0; loc < 3; ++loc)
      if (!mesh.faces[mesh.element_faces[e][loc]].is_boundary()) ifaces.push_back(loc);
    const int ni = static_cast<int>(ifaces.size());
    A3 = MatrixXd::Zero(4 * dk, 2 * nfe * ni);
    A7 = MatrixXd::Zero(2 * dk1, 2 * nfe * ni);
    A11 = MatrixXd::Zero(dk, 2 * nfe * ni);
    A12 = MatrixXd::Zero(2 * nfe * ni, 2 * nfe * ni);
    for (int pos = 0; pos < ni; ++pos) {
      const FaceData fd = face_data(ifaces[pos]);
      for (int d = 0; d < 2; ++d)
        for (int a = 0; a < nfe; ++a) {
          const int col = pos * 2 * nfe + d * nfe + a;
          for (std::size_t q = 0; q < fd.w.size(); ++q) {
            const double psi = fd.face_vals(q, a);
            for (int i = 0; i < 4 * dk; ++i)
              A3(i, col) += fd.w[q] * psi * (tensor_at_face(i, fd, q) * fd.n)(d);
            for (int b = 0; b < dk1; ++b)
              A7(d * dk1 + b, col) += fd.w[q] / fd.h * psi * fd.tr_k1(q, b);
            for (int m = 0; m < dk; ++m)
              A11(m, col) += fd.w[q] * psi * fd.n(d) * fd.tr_k(q, m);
            for (int a2 = 0; a2 < nfe; ++a2)
              A12(pos * 2 * nfe + d * nfe + a2, col) +=
                  fd.w[q] / fd.h * psi * fd.face_vals(q, a2);
          }
        }
    }
  }

  void boundary_blocks(MatrixXd& A4, MatrixXd& A8, MatrixXd& A15) const {
    std::vector<int> bfaces;
    for (int loc = 0; loc < 3; ++loc)
      if (mesh.faces[mesh.element_faces[e][loc]].is_boundary()) bfaces.push_back(loc);
    const int nb = static_cast<int>(bfaces.size());
    A4 = MatrixXd::Zero(4 * dk, nfe * nb);
    A8 = MatrixXd::Zero(2 * dk1, nfe * nb);
    A15 = MatrixXd::Zero(nfe * nb, nfe * nb);
    for (int pos = 0; pos < nb; ++pos) {
      const FaceData fd = face_data(bfaces[pos]);
      for (int a = 0; a < nfe; ++a) {
        const int col = pos * nfe + a;
        for (std::size_t q = 0; q < fd.w.size(); ++q) {
          const double psi = fd.face_vals(q, a);
          for (int i = 0; i < 4 * dk; ++i)
            A4(i, col) += fd.w[q] * psi * fd.tau.dot(tensor_at_face(i, fd, q) * fd.n);
          for (int s = 0; s < 2; ++s)
            for (int b = 0; b < dk1; ++b)
              A8(s * dk1 + b, col) += fd.w[q] / fd.h * psi * fd.tau(s) * fd.tr_k1(q, b);
          for (int a2 = 0; a2 < nfe; ++a2)
            A15(pos * nfe + a2, col) += fd.w[q] * psi * fd.face_vals(q, a2);
        }
      }
    }
  }
};

double max_abs_diff(const MatrixXd& A, const MatrixXd& B) {
  if (A.size() == 0 && B.size() == 0) return 0.0;
  return (A - B).cwiseAbs().maxCoeff();
}

MatrixXd blkdiag2(const MatrixXd& A) {
  MatrixXd M = MatrixXd::Zero(2 * A.rows(), 2 * A.cols());
  M.topLeftCorner(A.rows(), A.cols()) = A;
  M.bottomRightCorner(A.rows(), A.cols()) = A;
  return M;
}

// test-side composition of the grouped local system (3.4) from the
// (brute-force-verified) A-blocks
struct LocalSystem {
  MatrixXd B1, B2, B3, B4, B5, B6, B7, B8, B9, B10, B11, B12, B13;
  VectorXd b1t;

  LocalSystem(const LocalBlocks& lb, double gamma, double dt) {
    const int dk = lb.dk, dk1 = lb.dk1;
    const int nyh = lb.ny(), nu = lb.nfe * lb.n_bnd, nz = lb.nz();
    B1 = blkdiag2(lb.A1());
    B2 = blkdiag2(lb.a2);
    B4 = blkdiag2(lb.a5);
    B4.block(2 * dk1, 0, 2 * dk1, 2 * dk1) = -lb.A9();
    B5 = MatrixXd::Zero(4 * dk1, 2 * dk);
    B5.topLeftCorner(2 * dk1, dk) = lb.a6;
    B5.bottomRightCorner(2 * dk1, dk) = -lb.a6;
    B7 = MatrixXd::Zero(2 * dk, 4 * dk1);
    B7.topLeftCorner(dk, 2 * dk1) = -lb.a6.transpose();
    B7.bottomRightCorner(dk, 2 * dk1) = -lb.a6.transpose();
    B8 = blkdiag2(lb.A10()) / dt;
    B3 = MatrixXd::Zero(8 * dk, nz);
    B6 = MatrixXd::Zero(4 * dk1, nz);
    B9 = MatrixXd::Zero(2 * dk, nz);
    B10 = MatrixXd::Zero(nz, 8 * dk);
    B11 = MatrixXd::Zero(nz, 4 * dk1);
    B12 = MatrixXd::Zero(nz, 2 * dk);
    B13 = MatrixXd::Zero(nz, nz);
    if (nyh > 0) {
      B3.block(0, 0, 4 * dk, nyh) = -lb.a3;
      B3.block(4 * dk, nyh, 4 * dk, nyh) = -lb.a3;
      B6.block(0, 0, 2 * dk1, nyh) = -lb.a7;
      B6.block(2 * dk1, nyh, 2 * dk1, nyh) = -lb.a7;
      B9.block(0, 0, dk, nyh) = lb.a11;
      B9.block(dk, nyh, dk, nyh) = lb.a11;
      B10.block(0, 0, nyh, 4 * dk) = lb.a3.transpose();
      B10.block(nyh, 4 * dk, nyh, 4 * dk) = lb.a3.transpose();
      B11.block(0, 0, nyh, 2 * dk1) = -lb.a7.transpose();
      B11.block(nyh, 2 * dk1, nyh, 2 * dk1) = -lb.a7.transpose();
      B12.block(0, 0, nyh, dk) = -lb.a11.transpose();
      B12.block(nyh, dk, nyh, dk) = -lb.a11.transpose();
      B13.block(0, 0, nyh, nyh) = lb.A12();
      B13.block(nyh, nyh, nyh, nyh) = lb.A12();
    }
    if (nu > 0) {
      B3.block(0, 2 * nyh, 4 * dk, nu) = -lb.a4;
      B6.block(0, 2 * nyh, 2 * dk1, nu) = -lb.a8;
      B10.block(2 * nyh, 4 * dk, nu, 4 * dk) = lb.a4.transpose();     // A13 = A4^T
      B11.block(2 * nyh, 2 * dk1, nu, 2 * dk1) = -lb.a8.transpose();  // A14 = A8^T
      B13.block(2 * nyh, 2 * nyh, nu, nu) = -gamma * lb.A15();
    }
    b1t.resize(4 * dk1);
    b1t << lb.b1, -lb.b2;
  }

  void dense_solve(const VectorXd& zeta, const VectorXd& b2t, VectorXd& alpha, VectorXd& beta,
                   VectorXd& gamma_) const {
    const int na = static_cast<int>(B1.rows()), nb = static_cast<int>(B4.rows()),
              ng = static_cast<int>(B8.rows());
    MatrixXd M = MatrixXd::Zero(na + nb + ng, na + nb + ng);
    M.block(0, 0, na, na) = B1;
    M.block(0, na, na, nb) = B2;
    M.block(na, 0, nb, na) = -B2.transpose();
    M.block(na, na, nb, nb) = B4;
    M.block(na, na + nb, nb, ng) = B5;
    M.block(na + nb, na, ng, nb) = B7;
    M.block(na + nb, na + nb, ng, ng) = B8;
    VectorXd rhs(na + nb + ng);
    rhs.head(na) = -B3 * zeta;
    rhs.segment(na, nb) = b1t - B6 * zeta;
    rhs.tail(ng) = b2t - B9 * zeta;
    const VectorXd sol = M.fullPivLu().solve(rhs);
    alpha = sol.head(na);
    beta = sol.segment(na, nb);
    gamma_ = sol.tail(ng);
  }
};

LocalBlocks make_blocks(const Mesh& mesh, const AssemblyContext& ctx, int e) {
  const VecFn f = [](const Vec2& x) { return Vec2(std::sin(3 * x.x()), x.y() * x.x()); };
  const VecFn yd = [](const Vec2& x) { return Vec2(std::cos(2 * x.y()), x.x() - x.y()); };
  return assemble_local_blocks(ctx, e, f, yd);
}

}  // namespace

TEST(LocalBlocks, MassBlocksAreIdentities) {
  const Mesh mesh = build_square_mesh(2);
  for (int k : {0, 1, 2}) {
    for (int e : {0, 3}) {
      BruteForce bf(mesh, e, k);
      const int dk = bf.dk, dk1 = bf.dk1;
      EXPECT_LT((bf.A1() - MatrixXd::Identity(4 * dk, 4 * dk)).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT((bf.A9() - MatrixXd::Identity(2 * dk1, 2 * dk1)).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT((bf.A10() - MatrixXd::Identity(dk, dk)).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(LocalBlocks, MatchBruteForceOracle) {
  const Mesh mesh = build_square_mesh(2);
  for (int k : {0, 1, 2}) {
    AssemblyContext ctx(mesh, k, 1.0, 256.0);
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const LocalBlocks lb = make_blocks(mesh, ctx, e);
      BruteForce bf(mesh, e, k);
      EXPECT_LT((lb.a2 - bf.A2()).cwiseAbs().maxCoeff(), 1e-12) << "A2 e=" << e << " k=" << k;
      EXPECT_LT((lb.a5 - bf.A5()).cwiseAbs().maxCoeff(), 1e-12) << "A5 e=" << e << " k=" << k;
      EXPECT_LT((lb.a6 - bf.A6()).cwiseAbs().maxCoeff(), 1e-12) << "A6 e=" << e << " k=" << k;
      MatrixXd A3, A7, A11, A12, A4, A8, A15;
      bf.interior_blocks(A3, A7, A11, A12);
      bf.boundary_blocks(A4, A8, A15);
      EXPECT_LT(max_abs_diff(lb.a3, A3), 1e-12) << "A3 e=" << e << " k=" << k;
      EXPECT_LT(max_abs_diff(lb.a7, A7), 1e-12) << "A7 e=" << e << " k=" << k;
      EXPECT_LT(max_abs_diff(lb.a11, A11), 1e-12) << "A11 e=" << e << " k=" << k;
      EXPECT_LT(max_abs_diff(lb.A12(), A12), 1e-12) << "A12 e=" << e << " k=" << k;
      EXPECT_LT(max_abs_diff(lb.a4, A4), 1e-12) << "A4 e=" << e << " k=" << k;
      EXPECT_LT(max_abs_diff(lb.a8, A8), 1e-12) << "A8 e=" << e << " k=" << k;
      EXPECT_LT(max_abs_diff(lb.A15(), A15), 1e-12) << "A15 e=" << e << " k=" << k;
    }
  }
}

TEST(LocalBlocks, StabilizationBlocksSymmetricPSD) {
  const Mesh mesh = build_square_mesh(2);
  AssemblyContext ctx(mesh, 1, 1.0, 256.0);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const LocalBlocks lb = make_blocks(mesh, ctx, e);
    EXPECT_LT((lb.a5 - lb.a5.transpose()).cwiseAbs().maxCoeff(), 1e-14);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(lb.a5, Eigen::EigenvaluesOnly);
    EXPECT_GT(es.eigenvalues().minCoeff(), -1e-12);
    const MatrixXd A12 = lb.A12();
    if (A12.rows() > 0) {
      EXPECT_LT((A12 - A12.transpose()).cwiseAbs().maxCoeff(), 1e-14);
      Eigen::SelfAdjointEigenSolver<MatrixXd> es12(A12, Eigen::EigenvaluesOnly);
      EXPECT_GT(es12.eigenvalues().minCoeff(), -1e-12);
    }
  }
}

TEST(LocalBlocks, RejectsDegenerateElement) {
  Mesh mesh = build_square_mesh(1);
  mesh.vertices[1] = mesh.vertices[0];  // collapse one edge
  AssemblyContext ctx(mesh, 1, 1.0, 256.0);
  EXPECT_THROW(make_blocks(mesh, ctx, 0), std::runtime_error);
}

TEST(Condense, ZeroDataGivesZeroJ) {
  const Mesh mesh = build_square_mesh(2);
  AssemblyContext ctx(mesh, 1, 1.0, 256.0);
  const LocalBlocks lb = assemble_local_blocks(ctx, 0, zero_fn, zero_fn);
  const CondensedElement ce = condense(ctx, lb);
  VectorXd J1, J2, J3;
  const VectorXd zp = VectorXd::Zero(lb.dk);
  local_iteration_rhs(ce, zp, zp, J1, J2, J3);
  EXPECT_LT(J1.cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT(J2.cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT(J3.cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Condense, DtScalingWithZeroDataKeepsZeroJ) {
  const Mesh mesh = build_square_mesh(2);
  AssemblyContext ctx2(mesh, 1, 1.0, 512.0);
  const LocalBlocks lb = assemble_local_blocks(ctx2, 0, zero_fn, zero_fn);
  const CondensedElement ce = condense(ctx2, lb);
  VectorXd J1, J2, J3;
  const VectorXd zp = VectorXd::Zero(lb.dk);
  local_iteration_rhs(ce, zp, zp, J1, J2, J3);
  EXPECT_LT(J3.cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Condense, BlockTriangularInverseMatchesDense) {
  const Mesh mesh = build_square_mesh(2);
  for (int k : {0, 1, 2}) {
    AssemblyContext ctx(mesh, k, 1.0, 256.0);
    for (int e : {0, 1, 5}) {
      const LocalBlocks lb = make_blocks(mesh, ctx, e);
      const int dk1 = lb.dk1;
      const MatrixXd C = lb.a5 + lb.a2.transpose() * lb.a2;
      MatrixXd M = MatrixXd::Zero(4 * dk1, 4 * dk1);
      M.topLeftCorner(2 * dk1, 2 * dk1) = C;
      M.bottomRightCorner(2 * dk1, 2 * dk1) = C;
      M.bottomLeftCorner(2 * dk1, 2 * dk1) = -lb.A9();
      const MatrixXd dense_inv = M.fullPivLu().inverse();
      const MatrixXd Cinv = C.llt().solve(MatrixXd::Identity(2 * dk1, 2 * dk1));
      MatrixXd formula = MatrixXd::Zero(4 * dk1, 4 * dk1);
      formula.topLeftCorner(2 * dk1, 2 * dk1) = Cinv;
      formula.bottomRightCorner(2 * dk1, 2 * dk1) = Cinv;
      formula.bottomLeftCorner(2 * dk1, 2 * dk1) = Cinv * lb.A9() * Cinv;
      EXPECT_LT((dense_inv - formula).cwiseAbs().maxCoeff(), 1e-12) << "e=" << e << " k=" << k;
    }
  }
}

TEST(Condense, MatchesDenseLocalSolve) {
  const Mesh mesh = build_square_mesh(2);
  std::mt19937 rng(17);
  std::normal_distribution<double> dist;
  for (int k : {0, 1, 2}) {
    AssemblyContext ctx(mesh, k, 1.0, 64.0);
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const LocalBlocks lb = make_blocks(mesh, ctx, e);
      const CondensedElement ce = condense(ctx, lb);
      const LocalSystem ls(lb, ctx.gamma, ctx.dt);
      VectorXd zeta(lb.nz()), pp(lb.dk), qp(lb.dk);
      for (int i = 0; i < zeta.size(); ++i) zeta(i) = dist(rng);
      for (int i = 0; i < lb.dk; ++i) {
        pp(i) = dist(rng);
        qp(i) = dist(rng);
      }
      VectorXd b2t(2 * lb.dk);
      b2t << pp / ctx.dt, qp / ctx.dt;

      VectorXd J1, J2, J3, alpha, beta, gamma_;
      local_iteration_rhs(ce, pp, qp, J1, J2, J3);
      recover_fields(ce, zeta, J1, J2, J3, alpha, beta, gamma_);

      VectorXd da, db, dg;
      ls.dense_solve(zeta, b2t, da, db, dg);
      const double scale = std::max({da.norm(), db.norm(), dg.norm(), 1.0});
      EXPECT_LT((alpha - da).norm() / scale, 1e-11) << "alpha e=" << e << " k=" << k;
      EXPECT_LT((beta - db).norm() / scale, 1e-11) << "beta e=" << e << " k=" << k;
      EXPECT_LT((gamma_ - dg).norm() / scale, 1e-11) << "gamma e=" << e << " k=" << k;

      // residual of the first three block rows of the grouped system
      const VectorXd r1 = ls.B1 * alpha + ls.B2 * beta + ls.B3 * zeta;
      const VectorXd r2 =
          -ls.B2.transpose() * alpha + ls.B4 * beta + ls.B5 * gamma_ + ls.B6 * zeta - ls.b1t;
      const VectorXd r3 = ls.B7 * beta + ls.B8 * gamma_ + ls.B9 * zeta - b2t;
      EXPECT_LT(r1.norm() / scale, 1e-11);
      EXPECT_LT(r2.norm() / scale, 1e-11);
      EXPECT_LT(r3.norm() / scale, 1e-11);

      // iteration-path RHS equals -(B10 J1 + B11 J2 + B12 J3)
      const VectorXd bJ = -(ls.B10 * J1 + ls.B11 * J2 + ls.B12 * J3);
      const VectorXd H1 = ce.G3 * b2t + ce.h0;
      const VectorXd blean = ce.r0 + ce.W1 * H1;
      EXPECT_LT((bJ - blean).norm() / std::max(bJ.norm(), 1.0), 1e-12);

      // Azeta equals the Schur composition from the verified blocks
      const MatrixXd Az = ls.B10 * ce.F1 + ls.B11 * ce.F2 + ls.B12 * ce.F3 + ls.B13;
      EXPECT_LT(max_abs_diff(Az, ce.Azeta), 1e-11);
    }
  }
}

TEST(RecoverFields, ZeroInputsGiveZeroFields) {
  const Mesh mesh = build_square_mesh(1);
  AssemblyContext ctx(mesh, 1, 1.0, 256.0);
  const LocalBlocks lb = assemble_local_blocks(ctx, 0, zero_fn, zero_fn);
  const CondensedElement ce = condense(ctx, lb);
  const VectorXd zeta = VectorXd::Zero(lb.nz());
  const VectorXd J1 = VectorXd::Zero(8 * lb.dk), J2 = VectorXd::Zero(4 * lb.dk1),
                 J3 = VectorXd::Zero(2 * lb.dk);
  VectorXd a, b, g;
  recover_fields(ce, zeta, J1, J2, J3, a, b, g);
  EXPECT_EQ(a.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(b.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(g.cwiseAbs().maxCoeff(), 0.0);
}

TEST(RecoverFields, Linearity) {
  const Mesh mesh = build_square_mesh(2);
  AssemblyContext ctx(mesh, 1, 1.0, 256.0);
  const LocalBlocks lb = assemble_local_blocks(ctx, 0, zero_fn, zero_fn);
  const CondensedElement ce = condense(ctx, lb);
  std::mt19937 rng(3);
  std::normal_distribution<double> dist;
  VectorXd z1(lb.nz()), z2(lb.nz());
  for (int i = 0; i < z1.size(); ++i) {
    z1(i) = dist(rng);
    z2(i) = dist(rng);
  }
  const VectorXd J1 = VectorXd::Zero(8 * lb.dk), J2 = VectorXd::Zero(4 * lb.dk1),
                 J3 = VectorXd::Zero(2 * lb.dk);
  VectorXd a1, b1_, g1, a2, b2_, g2, a12, b12, g12;
  recover_fields(ce, z1, J1, J2, J3, a1, b1_, g1);
  recover_fields(ce, z2, J1, J2, J3, a2, b2_, g2);
  recover_fields(ce, z1 + z2, J1, J2, J3, a12, b12, g12);
  EXPECT_LT((a12 - a1 - a2).cwiseAbs().maxCoeff(), 1e-13 * std::max(1.0, a12.norm()));
  EXPECT_LT((b12 - b1_ - b2_).cwiseAbs().maxCoeff(), 1e-13 * std::max(1.0, b12.norm()));
  EXPECT_LT((g12 - g1 - g2).cwiseAbs().maxCoeff(), 1e-13 * std::max(1.0, g12.norm()));
}
