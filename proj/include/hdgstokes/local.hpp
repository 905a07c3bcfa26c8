#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <array>
#include <functional>
#include <stdexcept>
#include <vector>

#include "hdgstokes/basis.hpp"
#include "hdgstokes/mesh.hpp"
#include "hdgstokes/quadrature.hpp"

namespace hdgstokes {

using VecFn = std::function<Vec2(const Vec2&)>;

/// Affine map from the reference triangle to element e.
struct ElementGeometry {
  Vec2 v0;
  Eigen::Matrix2d J, Jinv;
  double detJ = 0.0;
  double inv_sqrt_detJ = 0.0;

  ElementGeometry() = default;
  ElementGeometry(const Mesh& mesh, int e) {
    const Vec2& a = mesh.vertices[mesh.elements[e][0]];
    const Vec2& b = mesh.vertices[mesh.elements[e][1]];
    const Vec2& c = mesh.vertices[mesh.elements[e][2]];
    v0 = a;
    J.col(0) = b - a;
    J.col(1) = c - a;
    detJ = J.determinant();
    if (detJ <= 0.0) throw std::runtime_error("ElementGeometry: degenerate or flipped element");
    Jinv = J.inverse();
    inv_sqrt_detJ = 1.0 / std::sqrt(detJ);
  }

  Vec2 to_physical(const Vec2& ref) const { return v0 + J * ref; }
  Vec2 to_reference(const Vec2& x) const { return Jinv * (x - v0); }
};

/// One face of an element, as the element sees it.
struct ElementFace {
  int face = -1;        // global face index
  bool interior = false;
  Vec2 normal;          // outward from this element
  Vec2 tangent;         // global face tangent (single-valued)
  double length = 0.0;
  double hstab = 0.0;   // stabilization h for this face
  int int_pos = -1;     // position among this element's interior faces
  int bnd_pos = -1;     // position among this element's boundary faces
};

/// Shared reference-space tables for one (mesh, k, gamma, dt) configuration.
struct AssemblyContext {
  const Mesh& mesh;
  int k;
  double gamma;
  double dt;

  QuadratureRule vol_rule;   // exact for every bilinear term
  QuadratureRule rhs_rule;   // higher rule for data integrals
  QuadratureRule edge_rule;
  TriangleBasis basis_k, basis_k1;
  EdgeBasis edge_basis;

  // reference tables at vol_rule points
  Eigen::MatrixXd Vk, Gku, Gkv;
  Eigen::MatrixXd Vk1, Gk1u, Gk1v;
  // reference tables at rhs_rule points
  Eigen::MatrixXd Vk1r;
  // orthonormal-on-[-1,1] edge basis at edge_rule points
  Eigen::MatrixXd FB;

  AssemblyContext(const Mesh& m, int degree, double gamma_, double dt_)
      : mesh(m), k(degree), gamma(gamma_), dt(dt_),
        vol_rule(triangle_quadrature(2 * (degree + 1) + 2)),
        rhs_rule(triangle_quadrature(2 * (degree + 1) + 6)),
        edge_rule(edge_quadrature(degree + 2)),
        basis_k(degree), basis_k1(degree + 1), edge_basis(degree) {
    if (degree < 0 || degree > 3) throw std::invalid_argument("AssemblyContext: k in 0..3 required");
    if (gamma <= 0.0) throw std::invalid_argument("AssemblyContext: gamma > 0 required");
    if (dt <= 0.0) throw std::invalid_argument("AssemblyContext: dt > 0 required");
    basis_k.eval(vol_rule.points, Vk, Gku, Gkv);
    basis_k1.eval(vol_rule.points, Vk1, Gk1u, Gk1v);
    Eigen::MatrixXd tmp_u, tmp_v;
    basis_k1.eval(rhs_rule.points, Vk1r, tmp_u, tmp_v);
    FB = edge_basis.values(edge_rule.points.col(0));
  }

  int dk() const { return scalar_space_dim(k); }
  int dk1() const { return scalar_space_dim(k + 1); }
  int nfe() const { return k + 1; }
};

/// Per-element dense blocks of the matrix system: the restrictions of
/// A_1..A_15 plus the local load vectors. With the orthonormal bases the
/// mass blocks A_1, A_9, A_10, A_15 are identities and are not stored.
///
/// Local trace ("zeta") layout: interior-face state traces, then
/// interior-face adjoint traces, then boundary controls; within a face,
/// component-major, mode-minor.
struct LocalBlocks {
  int k = 0, dk = 0, dk1 = 0, nfe = 0;
  int n_int = 0, n_bnd = 0;
  std::array<ElementFace, 3> faces;
  ElementGeometry geom;

  Eigen::MatrixXd a2;   // 4dk x 2dk1   (velocity, div of tensor basis)
  Eigen::MatrixXd a3;   // 4dk x 2nfe*n_int
  Eigen::MatrixXd a4;   // 4dk x nfe*n_bnd
  Eigen::MatrixXd a5;   // 2dk1 x 2dk1  stabilization velocity mass
  Eigen::MatrixXd a6;   // 2dk1 x dk    pressure gradient
  Eigen::MatrixXd a7;   // 2dk1 x 2nfe*n_int
  Eigen::MatrixXd a8;   // 2dk1 x nfe*n_bnd
  Eigen::MatrixXd a11;  // dk x 2nfe*n_int
  Eigen::VectorXd b1, b2;  // loads (f, .), (y_d, .)

  int nz() const { return 2 * (2 * nfe * n_int) + nfe * n_bnd; }
  int ny() const { return 2 * nfe * n_int; }  // per trace field
  int yhat_col(int int_pos) const { return int_pos * 2 * nfe; }
  int zhat_col(int int_pos) const { return ny() + int_pos * 2 * nfe; }
  int u_col(int bnd_pos) const { return 2 * ny() + bnd_pos * nfe; }

  // Explicit A-matrices for verification against brute-force assembly.
  Eigen::MatrixXd A1() const { return Eigen::MatrixXd::Identity(4 * dk, 4 * dk); }
  Eigen::MatrixXd A2() const { return a2; }
  Eigen::MatrixXd A3() const { return a3; }
  Eigen::MatrixXd A4() const { return a4; }
  Eigen::MatrixXd A5() const { return a5; }
  Eigen::MatrixXd A6() const { return a6; }
  Eigen::MatrixXd A7() const { return a7; }
  Eigen::MatrixXd A8() const { return a8; }
  Eigen::MatrixXd A9() const { return Eigen::MatrixXd::Identity(2 * dk1, 2 * dk1); }
  Eigen::MatrixXd A10() const { return Eigen::MatrixXd::Identity(dk, dk); }
  Eigen::MatrixXd A11() const { return a11; }
  Eigen::MatrixXd A12() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(ny(), ny());
    for (const auto& fc : faces)
      if (fc.face >= 0 && fc.interior)
        m.block(fc.int_pos * 2 * nfe, fc.int_pos * 2 * nfe, 2 * nfe, 2 * nfe) =
            Eigen::MatrixXd::Identity(2 * nfe, 2 * nfe) / fc.hstab;
    return m;
  }
  Eigen::MatrixXd A13() const { return a4.transpose(); }
  Eigen::MatrixXd A14() const { return a8.transpose(); }
  Eigen::MatrixXd A15() const {
    return Eigen::MatrixXd::Identity(nfe * n_bnd, nfe * n_bnd);
  }
};

/// Assemble the restrictions of A_1..A_15 and the load vectors on one
/// element. Control-related blocks are present iff the element touches the
/// domain boundary. The pressure pseudo-time terms are handled at the
/// condensation stage (they scale the identity pressure mass by 1/dt).
inline LocalBlocks assemble_local_blocks(const AssemblyContext& ctx, int e,
                                         const VecFn& f, const VecFn& y_d) {
  const Mesh& mesh = ctx.mesh;
  LocalBlocks lb;
  lb.k = ctx.k;
  lb.dk = ctx.dk();
  lb.dk1 = ctx.dk1();
  lb.nfe = ctx.nfe();
  lb.geom = ElementGeometry(mesh, e);
  const int dk = lb.dk, dk1 = lb.dk1, nfe = lb.nfe;

  for (int loc = 0; loc < 3; ++loc) {
    const int fidx = mesh.element_faces[e][loc];
    const Face& f_ = mesh.faces[fidx];
    ElementFace& ef = lb.faces[loc];
    ef.face = fidx;
    ef.interior = !f_.is_boundary();
    const double sign = (f_.left == e) ? 1.0 : -1.0;
    ef.normal = sign * f_.normal;
    ef.tangent = f_.tangent;
    ef.length = f_.length;
    ef.hstab = stabilization_h(mesh, fidx);
    if (ef.interior) ef.int_pos = lb.n_int++;
    else ef.bnd_pos = lb.n_bnd++;
  }

  lb.a2 = Eigen::MatrixXd::Zero(4 * dk, 2 * dk1);
  lb.a5 = Eigen::MatrixXd::Zero(2 * dk1, 2 * dk1);
  lb.a6 = Eigen::MatrixXd::Zero(2 * dk1, dk);
  lb.a3 = Eigen::MatrixXd::Zero(4 * dk, 2 * nfe * lb.n_int);
  lb.a7 = Eigen::MatrixXd::Zero(2 * dk1, 2 * nfe * lb.n_int);
  lb.a11 = Eigen::MatrixXd::Zero(dk, 2 * nfe * lb.n_int);
  lb.a4 = Eigen::MatrixXd::Zero(4 * dk, nfe * lb.n_bnd);
  lb.a8 = Eigen::MatrixXd::Zero(2 * dk1, nfe * lb.n_bnd);

  const ElementGeometry& g = lb.geom;
  const auto& w = ctx.vol_rule.weights;
  const int nq = static_cast<int>(w.size());

  // volume blocks: D[c](m,b) = (d_c phi_m^k, phi_b^{k+1})_K in physical space
  std::array<Eigen::MatrixXd, 2> D;
  D[0] = Eigen::MatrixXd::Zero(dk, dk1);
  D[1] = Eigen::MatrixXd::Zero(dk, dk1);
  const Eigen::Matrix2d JinvT = g.Jinv.transpose();
  for (int q = 0; q < nq; ++q) {
    for (int m = 0; m < dk; ++m) {
      const Vec2 gref(ctx.Gku(q, m), ctx.Gkv(q, m));
      const Vec2 gphys = JinvT * gref;
      for (int b = 0; b < dk1; ++b) {
        const double vb = ctx.Vk1(q, b);
        D[0](m, b) += w(q) * gphys.x() * vb;
        D[1](m, b) += w(q) * gphys.y() * vb;
      }
    }
  }
  // a2[(2r+c)dk+m, r*dk1+b] = D[c](m,b)
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      for (int m = 0; m < dk; ++m)
        for (int b = 0; b < dk1; ++b)
          lb.a2((2 * r + c) * dk + m, r * dk1 + b) = D[c](m, b);
  for (int s = 0; s < 2; ++s)
    for (int m = 0; m < dk; ++m)
      for (int b = 0; b < dk1; ++b)
        lb.a6(s * dk1 + b, m) = D[s](m, b);

  // face blocks
  const auto& ew = ctx.edge_rule.weights;
  const int ne = static_cast<int>(ew.size());
  for (int loc = 0; loc < 3; ++loc) {
    const ElementFace& ef = lb.faces[loc];
    const Face& fc = mesh.faces[ef.face];
    const Vec2 pa = mesh.vertices[fc.v[0]], pb = mesh.vertices[fc.v[1]];
    const double L = ef.length;
    // element bases at the face quadrature points
    Eigen::MatrixXd rq(ne, 2);
    for (int q = 0; q < ne; ++q) {
      const double t = ctx.edge_rule.points(q, 0);
      const Vec2 x = 0.5 * (pa + pb) + 0.5 * t * (pb - pa);
      rq.row(q) = g.to_reference(x).transpose();
    }
    Eigen::MatrixXd Vkf, Vk1f, tu, tv;
    ctx.basis_k.eval(rq, Vkf, tu, tv);
    ctx.basis_k1.eval(rq, Vk1f, tu, tv);
    // face-orthonormal basis values: FB * sqrt(2/L)
    const double fb_scale = std::sqrt(2.0 / L);
    // Tk(a,m) = <phi_m^k, m_a>_face ; Tk1(a,b) = <phi_b^{k+1}, m_a>_face
    Eigen::MatrixXd Tk = Eigen::MatrixXd::Zero(nfe, dk);
    Eigen::MatrixXd Tk1 = Eigen::MatrixXd::Zero(nfe, dk1);
    for (int q = 0; q < ne; ++q) {
      const double wq = ew(q) * (L / 2.0);
      for (int a = 0; a < nfe; ++a) {
        const double ma = fb_scale * ctx.FB(q, a);
        for (int m = 0; m < dk; ++m) Tk(a, m) += wq * ma * Vkf(q, m) * g.inv_sqrt_detJ;
        for (int b = 0; b < dk1; ++b) Tk1(a, b) += wq * ma * Vk1f(q, b) * g.inv_sqrt_detJ;
      }
    }
    const double hinv = 1.0 / ef.hstab;
    for (int s = 0; s < 2; ++s)
      lb.a5.block(s * dk1, s * dk1, dk1, dk1) += hinv * Tk1.transpose() * Tk1;
    if (ef.interior) {
      const int col0 = ef.int_pos * 2 * nfe;
      for (int d = 0; d < 2; ++d) {
        for (int a = 0; a < nfe; ++a) {
          const int col = col0 + d * nfe + a;
          for (int m = 0; m < dk; ++m) {
            for (int c = 0; c < 2; ++c)
              lb.a3((2 * d + c) * dk + m, col) = ef.normal(c) * Tk(a, m);
            lb.a11(m, col) = ef.normal(d) * Tk(a, m);
          }
          for (int b = 0; b < dk1; ++b) lb.a7(d * dk1 + b, col) = hinv * Tk1(a, b);
        }
      }
    } else {
      const int col0 = ef.bnd_pos * nfe;
      for (int a = 0; a < nfe; ++a) {
        const int col = col0 + a;
        for (int m = 0; m < dk; ++m)
          for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c)
              lb.a4((2 * r + c) * dk + m, col) += ef.tangent(r) * ef.normal(c) * Tk(a, m);
        for (int b = 0; b < dk1; ++b)
          for (int s = 0; s < 2; ++s)
            lb.a8(s * dk1 + b, col) += hinv * ef.tangent(s) * Tk1(a, b);
      }
    }
  }

  // loads with the higher data rule
  lb.b1 = Eigen::VectorXd::Zero(2 * dk1);
  lb.b2 = Eigen::VectorXd::Zero(2 * dk1);
  const auto& wr = ctx.rhs_rule.weights;
  const double sq = std::sqrt(g.detJ);
  for (int q = 0; q < static_cast<int>(wr.size()); ++q) {
    const Vec2 x = g.to_physical(ctx.rhs_rule.points.row(q).transpose());
    const Vec2 fv = f(x), yv = y_d(x);
    for (int b = 0; b < dk1; ++b) {
      const double vb = wr(q) * sq * ctx.Vk1r(q, b);
      lb.b1(b) += vb * fv.x();
      lb.b1(dk1 + b) += vb * fv.y();
      lb.b2(b) += vb * yv.x();
      lb.b2(dk1 + b) += vb * yv.y();
    }
  }
  return lb;
}

/// Element-local elimination data: maps from the element's trace/control
/// unknowns to (flux, velocity, pressure) coefficients, plus the pieces
/// needed to form the iteration-dependent vectors and the element's
/// contribution to the global trace matrix.
struct CondensedElement {
  int dk = 0, dk1 = 0, nfe = 0, nz_ = 0;
  double dt = 0.0;
  std::array<ElementFace, 3> faces;
  int n_int = 0, n_bnd = 0;

  Eigen::MatrixXd F1, F2, F3;       // alpha/beta/gamma = F * zeta + J  (F1,F2 empty in lean mode)
  Eigen::MatrixXd Azeta;            // B10 F1 + B11 F2 + B12 F3 + B13
  Eigen::MatrixXd G3;               // 2dk x 2dk
  Eigen::VectorXd h0;               // G3 * (b2tilde-independent part): H1 = G3*[p;q]/dt + h0
  Eigen::MatrixXd W1;               // nz x 2dk : rhs contribution = r0 + W1 * H1
  Eigen::VectorXd r0;               // nz
  // recovery pieces (full mode only)
  Eigen::LLT<Eigen::MatrixXd> Cllt;
  Eigen::MatrixXd a2, B5;
  Eigen::VectorXd H2;
  bool full = false;

  int nz() const { return nz_; }
  int yhat_col(int int_pos) const { return int_pos * 2 * nfe; }
  int zhat_col(int int_pos) const { return 2 * nfe * n_int + int_pos * 2 * nfe; }
  int u_col(int bnd_pos) const { return 2 * (2 * nfe * n_int) + bnd_pos * nfe; }

  /// alpha/beta/gamma block sizes
  int na() const { return 8 * dk; }
  int nb() const { return 4 * dk1; }
  int ng() const { return 2 * dk; }

  /// G1 = (B4 + B2^T B1^{-1} B2)^{-1} applied through the blockwise formula
  /// [[C,0],[-I,C]]^{-1} = [[C^{-1},0],[C^{-1}C^{-1},C^{-1}]].
  Eigen::MatrixXd applyG1(const Eigen::MatrixXd& X) const {
    Eigen::MatrixXd out(X.rows(), X.cols());
    const int m = 2 * dk1;
    out.topRows(m) = Cllt.solve(X.topRows(m));
    out.bottomRows(m) = Cllt.solve(X.bottomRows(m) + out.topRows(m));
    return out;
  }
};

enum class CondenseMode { full, lean };

/// Eliminate the element unknowns of the grouped system (3.4):
///   G1 = (B4 + B2^T B1^{-1} B2)^{-1},      G2 = B6 + B2^T B1^{-1} B3,
///   G3 = (B8 - B7 G1 B5)^{-1},             G4 = B9 - B7 G1 G2,
///   F3 = -G3 G4,  F2 = -G1 (B5 F3 + G2),   F1 = -B1^{-1} (B2 F2 + B3),
/// exploiting that B1 is the identity and B4 + B2^T B2 is block triangular
/// with SSPD diagonal blocks C = A5 + A2^T A2.
inline CondensedElement condense(const AssemblyContext& ctx, const LocalBlocks& lb,
                                 CondenseMode mode = CondenseMode::full) {
  CondensedElement ce;
  ce.dk = lb.dk; ce.dk1 = lb.dk1; ce.nfe = lb.nfe;
  ce.n_int = lb.n_int; ce.n_bnd = lb.n_bnd;
  ce.nz_ = lb.nz();
  ce.dt = ctx.dt;
  ce.faces = lb.faces;
  const int dk = lb.dk, dk1 = lb.dk1, nz = lb.nz();
  const int na = 8 * dk, nb = 4 * dk1, ng = 2 * dk;

  // C = A5 + A2^T A2 must be SSPD
  Eigen::MatrixXd C = lb.a5 + lb.a2.transpose() * lb.a2;
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff(), lmax = es.eigenvalues().maxCoeff();
    if (!(lmin > 1e-12 * lmax))
      throw std::runtime_error("condense: SSPD block not positive definite");
  }
  ce.Cllt.compute(C);

  // grouped blocks
  Eigen::MatrixXd B2 = Eigen::MatrixXd::Zero(na, nb);
  B2.topLeftCorner(4 * dk, 2 * dk1) = lb.a2;
  B2.bottomRightCorner(4 * dk, 2 * dk1) = lb.a2;

  Eigen::MatrixXd B3 = Eigen::MatrixXd::Zero(na, nz);
  Eigen::MatrixXd B6 = Eigen::MatrixXd::Zero(nb, nz);
  Eigen::MatrixXd B9 = Eigen::MatrixXd::Zero(ng, nz);
  Eigen::MatrixXd B10 = Eigen::MatrixXd::Zero(nz, na);
  Eigen::MatrixXd B11 = Eigen::MatrixXd::Zero(nz, nb);
  Eigen::MatrixXd B12 = Eigen::MatrixXd::Zero(nz, ng);
  Eigen::MatrixXd B13 = Eigen::MatrixXd::Zero(nz, nz);
  const int ny = lb.ny();
  if (ny > 0) {
    B3.block(0, 0, 4 * dk, ny) = -lb.a3;
    B3.block(4 * dk, ny, 4 * dk, ny) = -lb.a3;
    B6.block(0, 0, 2 * dk1, ny) = -lb.a7;
    B6.block(2 * dk1, ny, 2 * dk1, ny) = -lb.a7;
    B9.block(0, 0, dk, ny) = lb.a11;
    B9.block(dk, ny, dk, ny) = lb.a11;
    B10.block(0, 0, ny, 4 * dk) = lb.a3.transpose();
    B10.block(ny, 4 * dk, ny, 4 * dk) = lb.a3.transpose();
    B11.block(0, 0, ny, 2 * dk1) = -lb.a7.transpose();
    B11.block(ny, 2 * dk1, ny, 2 * dk1) = -lb.a7.transpose();
    B12.block(0, 0, ny, dk) = -lb.a11.transpose();
    B12.block(ny, dk, ny, dk) = -lb.a11.transpose();
    for (const auto& ef : lb.faces)
      if (ef.face >= 0 && ef.interior) {
        const int o = ef.int_pos * 2 * lb.nfe;
        const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2 * lb.nfe, 2 * lb.nfe) / ef.hstab;
        B13.block(o, o, 2 * lb.nfe, 2 * lb.nfe) = id;
        B13.block(ny + o, ny + o, 2 * lb.nfe, 2 * lb.nfe) = id;
      }
  }
  const int nu = lb.nfe * lb.n_bnd;
  if (nu > 0) {
    const int uo = 2 * ny;
    B3.block(0, uo, 4 * dk, nu) = -lb.a4;
    B6.block(0, uo, 2 * dk1, nu) = -lb.a8;
    B10.block(uo, 4 * dk, nu, 4 * dk) = lb.a4.transpose();
    B11.block(uo, 2 * dk1, nu, 2 * dk1) = -lb.a8.transpose();
    B13.block(uo, uo, nu, nu) = -ctx.gamma * Eigen::MatrixXd::Identity(nu, nu);
  }

  Eigen::MatrixXd B5 = Eigen::MatrixXd::Zero(nb, ng);
  B5.block(0, 0, 2 * dk1, dk) = lb.a6;
  B5.block(2 * dk1, dk, 2 * dk1, dk) = -lb.a6;
  Eigen::MatrixXd B7 = Eigen::MatrixXd::Zero(ng, nb);
  B7.block(0, 0, dk, 2 * dk1) = -lb.a6.transpose();
  B7.block(dk, 2 * dk1, dk, 2 * dk1) = -lb.a6.transpose();

  // compositions
  Eigen::MatrixXd G2 = B6;
  G2.topRows(2 * dk1) += lb.a2.transpose() * B3.topRows(4 * dk);
  G2.bottomRows(2 * dk1) += lb.a2.transpose() * B3.bottomRows(4 * dk);

  Eigen::MatrixXd G1B5 = ce.applyG1(B5);
  Eigen::MatrixXd M3 = Eigen::MatrixXd::Identity(ng, ng) / ctx.dt - B7 * G1B5;  // B8 - B7 G1 B5
  ce.G3 = M3.partialPivLu().inverse();
  Eigen::MatrixXd G1G2 = ce.applyG1(G2);
  Eigen::MatrixXd G4 = B9 - B7 * G1G2;
  ce.F3 = -ce.G3 * G4;
  ce.F2 = -(G1B5 * ce.F3.eval() + G1G2);
  // F2 = G1 B5 G3 G4 - G1 G2 = -(G1B5*F3 + G1G2)
  ce.F1 = -(B2 * ce.F2 + B3);
  ce.Azeta = B10 * ce.F1 + B11 * ce.F2 + B12 * ce.F3 + B13;

  Eigen::VectorXd b1t(nb);
  b1t << lb.b1, -lb.b2;
  ce.H2 = ce.applyG1(b1t);
  Eigen::VectorXd B7H2 = B7 * ce.H2;
  ce.h0 = -ce.G3 * B7H2;

  Eigen::MatrixXd R1 = B11 - B10 * B2;
  ce.r0 = -R1 * ce.H2;
  ce.W1 = R1 * G1B5 - B12;

  if (mode == CondenseMode::full) {
    ce.full = true;
    ce.a2 = lb.a2;
    ce.B5 = B5;
  } else {
    ce.F1.resize(0, 0);
    ce.F2.resize(0, 0);
    ce.B5.resize(0, 0);
    ce.H2.resize(0);
  }
  return ce;
}

/// Iteration-dependent local right-hand-side vectors J_1, J_2, J_3 of the
/// appendix, from the previous pressure/dual-pressure coefficients:
///   H1 = G3 (b2tilde - B7 H2),  b2tilde = [p_prev; q_prev]/dt,
///   J3 = H1,  J2 = H2 - G1 B5 H1,  J1 = -B2 J2.
inline void local_iteration_rhs(const CondensedElement& ce, const Eigen::VectorXd& p_prev,
                                const Eigen::VectorXd& q_prev, Eigen::VectorXd& J1,
                                Eigen::VectorXd& J2, Eigen::VectorXd& J3) {
  if (!ce.full) throw std::runtime_error("local_iteration_rhs: requires full condensation mode");
  if (p_prev.size() != ce.dk || q_prev.size() != ce.dk)
    throw std::invalid_argument("local_iteration_rhs: pressure coefficient size mismatch");
  Eigen::VectorXd b2t(2 * ce.dk);
  b2t << p_prev / ce.dt, q_prev / ce.dt;
  Eigen::VectorXd H1 = ce.G3 * b2t + ce.h0;
  J3 = H1;
  J2 = ce.H2 - ce.applyG1(ce.B5 * H1);
  J1.resize(8 * ce.dk);
  J1.head(4 * ce.dk) = -ce.a2 * J2.head(2 * ce.dk1);
  J1.tail(4 * ce.dk) = -ce.a2 * J2.tail(2 * ce.dk1);
}

/// (alpha, beta, gamma) = F zeta + J.
inline void recover_fields(const CondensedElement& ce, const Eigen::VectorXd& zeta,
                           const Eigen::VectorXd& J1, const Eigen::VectorXd& J2,
                           const Eigen::VectorXd& J3, Eigen::VectorXd& alpha,
                           Eigen::VectorXd& beta, Eigen::VectorXd& gamma) {
  if (!ce.full) throw std::runtime_error("recover_fields: requires full condensation mode");
  if (zeta.size() != ce.nz()) throw std::invalid_argument("recover_fields: zeta size mismatch");
  alpha = ce.F1 * zeta + J1;
  beta = ce.F2 * zeta + J2;
  gamma = ce.F3 * zeta + J3;
}

}  // namespace hdgstokes
