#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "hdgstokes/mesh.hpp"

using namespace hdgstokes;

TEST(Mesh, MinimalSplit) {
  const Mesh m = build_square_mesh(1);
  EXPECT_EQ(m.num_elements(), 2);
  EXPECT_EQ(m.num_faces(), 5);
  EXPECT_EQ(m.num_boundary_faces(), 4);
  EXPECT_EQ(m.num_interior_faces(), 1);
}

TEST(Mesh, CountsN8) {
  const Mesh m = build_square_mesh(8);
  EXPECT_EQ(m.num_elements(), 128);
  EXPECT_EQ(static_cast<int>(m.vertices.size()), 81);
  EXPECT_EQ(m.num_faces(), 208);
  EXPECT_EQ(m.num_interior_faces(), 176);
  EXPECT_EQ(m.num_boundary_faces(), 32);
  EXPECT_NEAR(m.h_max, std::sqrt(2.0) / 8.0, 1e-15);
}

// independent edge enumeration: deduplicate all element edges
TEST(Mesh, FaceCountMatchesEdgeEnumeration) {
  const Mesh m = build_square_mesh(8);
  std::set<std::pair<int, int>> edges;
  for (const auto& el : m.elements)
    for (int loc = 0; loc < 3; ++loc) {
      const auto mm = std::minmax(el[loc], el[(loc + 1) % 3]);
      edges.insert(mm);
    }
  EXPECT_EQ(static_cast<int>(edges.size()), m.num_faces());
}

TEST(Mesh, EulerRelation) {
  for (int n : {1, 2, 3, 8}) {
    const Mesh m = build_square_mesh(n);
    const int V = static_cast<int>(m.vertices.size());
    const int E = m.num_faces();
    const int T = m.num_elements();
    EXPECT_EQ(V - E + (T + 1), 2) << "n=" << n;
  }
}

TEST(Mesh, PositiveAreasAndAdjacency) {
  const Mesh m = build_square_mesh(4);
  for (int e = 0; e < m.num_elements(); ++e) EXPECT_GT(m.element_area(e), 0.0);
  std::vector<int> refs(m.num_faces(), 0);
  for (int e = 0; e < m.num_elements(); ++e)
    for (int loc = 0; loc < 3; ++loc) refs[m.element_faces[e][loc]]++;
  for (int f = 0; f < m.num_faces(); ++f)
    EXPECT_EQ(refs[f], m.faces[f].is_boundary() ? 1 : 2);
}

TEST(Mesh, FaceFrames) {
  const Mesh m = build_square_mesh(3);
  for (int f = 0; f < m.num_faces(); ++f) {
    const Face& fc = m.faces[f];
    EXPECT_NEAR(fc.normal.norm(), 1.0, 1e-14);
    EXPECT_NEAR(fc.tangent.norm(), 1.0, 1e-14);
    EXPECT_NEAR(fc.normal.dot(fc.tangent), 0.0, 1e-14);
    // tau = (-n2, n1)
    EXPECT_NEAR(fc.tangent.x(), -fc.normal.y(), 1e-14);
    EXPECT_NEAR(fc.tangent.y(), fc.normal.x(), 1e-14);
    // normal points out of the left element
    const Vec2 mid = 0.5 * (m.vertices[fc.v[0]] + m.vertices[fc.v[1]]);
    EXPECT_GT(fc.normal.dot(mid - m.element_centroid(fc.left)), 0.0);
  }
}

TEST(Mesh, BottomEdgeFrame) {
  const Mesh m = build_square_mesh(2);
  for (int f = 0; f < m.num_faces(); ++f) {
    const Face& fc = m.faces[f];
    if (!fc.is_boundary()) continue;
    const Vec2 mid = 0.5 * (m.vertices[fc.v[0]] + m.vertices[fc.v[1]]);
    if (std::abs(mid.y()) < 1e-14) {
      const auto [n, tau] = face_trace_frame(m, f, FaceSide::left);
      EXPECT_NEAR(n.x(), 0.0, 1e-14);
      EXPECT_NEAR(n.y(), -1.0, 1e-14);
      EXPECT_NEAR(tau.x(), 1.0, 1e-14);
      EXPECT_NEAR(tau.y(), 0.0, 1e-14);
    }
  }
}

TEST(Mesh, OppositeSidesNegate) {
  const Mesh m = build_square_mesh(3);
  for (int f = 0; f < m.num_faces(); ++f) {
    if (m.faces[f].is_boundary()) {
      EXPECT_THROW(face_trace_frame(m, f, FaceSide::right), std::invalid_argument);
      continue;
    }
    const auto [nl, tl] = face_trace_frame(m, f, FaceSide::left);
    const auto [nr, tr] = face_trace_frame(m, f, FaceSide::right);
    EXPECT_NEAR((nl + nr).norm(), 0.0, 1e-15);
    EXPECT_NEAR((tl + tr).norm(), 0.0, 1e-15);
  }
}

// single-valued face functions integrate to zero over interior element
// boundaries: sum_K <w n, 1>_{dK \ Gamma} = 0 component-wise
TEST(Mesh, InteriorNormalsCancel) {
  const Mesh m = build_square_mesh(4);
  Vec2 acc = Vec2::Zero();
  for (int e = 0; e < m.num_elements(); ++e)
    for (int loc = 0; loc < 3; ++loc) {
      const int f = m.element_faces[e][loc];
      if (m.faces[f].is_boundary()) continue;
      const double sgn = m.element_face_sign[e][loc];
      acc += sgn * m.faces[f].normal * m.faces[f].length;
    }
  EXPECT_LT(acc.norm(), 1e-12);
}

TEST(Mesh, RefinementQuartersAreas) {
  const Mesh m1 = build_square_mesh(3);
  const Mesh m2 = build_square_mesh(6);
  EXPECT_NEAR(m2.element_area(0), 0.25 * m1.element_area(0), 1e-15);
  EXPECT_NEAR(m2.h_max, 0.5 * m1.h_max, 1e-15);
}

TEST(Mesh, RejectsZeroSubdivisions) {
  EXPECT_THROW(build_square_mesh(0), std::invalid_argument);
}

TEST(Mesh, StabilizationAccessorIsFaceLength) {
  const Mesh m = build_square_mesh(2);
  for (int f = 0; f < m.num_faces(); ++f)
    EXPECT_EQ(stabilization_h(m, f), m.faces[f].length);
}

TEST(Mesh, CsvDumpSections) {
  const Mesh m = build_square_mesh(1);
  std::ostringstream os;
  write_mesh_csv(m, os);
  const std::string s = os.str();
  EXPECT_NE(s.find("vertices\n"), std::string::npos);
  EXPECT_NE(s.find("elements\n"), std::string::npos);
  EXPECT_NE(s.find("faces\n"), std::string::npos);
}
