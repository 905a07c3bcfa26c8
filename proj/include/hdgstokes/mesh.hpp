#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace hdgstokes {

using Vec2 = Eigen::Vector2d;

/// Oriented mesh face (edge). The unit normal points out of the left
/// element; the tangent is the normal rotated by +90 degrees,
/// tau = (-n2, n1), which is also the direction of the face
/// parametrization from vertex v[0] to v[1].
struct Face {
  std::array<int, 2> v{};   // endpoint vertex indices, ordered along tau
  int left = -1;            // always present
  int right = -1;           // -1 on boundary faces
  double length = 0.0;
  Vec2 normal = Vec2::Zero();
  Vec2 tangent = Vec2::Zero();

  bool is_boundary() const { return right < 0; }
};

/// Conforming simplicial triangulation with oriented face geometry.
/// Immutable after construction; safe for shared read-only access.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> elements;    // CCW vertex triples
  std::vector<Face> faces;
  std::vector<std::array<int, 3>> element_faces;
  std::vector<std::array<int, 3>> element_face_sign;  // +1 if element is left
  double h_max = 0.0;

  // structured-grid metadata (set by build_square_mesh, used for point location)
  bool structured = false;
  int grid_n = 0;
  double side = 0.0;
  Vec2 origin = Vec2::Zero();

  int num_elements() const { return static_cast<int>(elements.size()); }
  int num_faces() const { return static_cast<int>(faces.size()); }
  int num_interior_faces() const {
    int c = 0;
    for (const auto& f : faces) c += f.is_boundary() ? 0 : 1;
    return c;
  }
  int num_boundary_faces() const { return num_faces() - num_interior_faces(); }

  double element_area(int e) const {
    const Vec2& a = vertices[elements[e][0]];
    const Vec2& b = vertices[elements[e][1]];
    const Vec2& c = vertices[elements[e][2]];
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
  }

  Vec2 element_centroid(int e) const {
    return (vertices[elements[e][0]] + vertices[elements[e][1]] + vertices[elements[e][2]]) / 3.0;
  }

  double element_diameter(int e) const {
    const Vec2& a = vertices[elements[e][0]];
    const Vec2& b = vertices[elements[e][1]];
    const Vec2& c = vertices[elements[e][2]];
    return std::max({(a - b).norm(), (b - c).norm(), (c - a).norm()});
  }
};

/// The h used by every h^{-1} stabilization term. Single shared accessor:
/// all assembly paths must call this (the energy identity test fails if any
/// term uses a different convention).
inline double stabilization_h(const Mesh& mesh, int face) {
  return mesh.faces[face].length;
}

/// Uniform triangulation of the square [origin, origin+side]^2 with n
/// subdivisions per side, each grid cell split along the lower-left to
/// upper-right diagonal. 2n^2 elements, (n+1)^2 vertices, 4n boundary faces,
/// h_max = side*sqrt(2)/n.
inline Mesh build_square_mesh(int n, double side = 1.0, Vec2 origin = Vec2::Zero()) {
  if (n < 1) throw std::invalid_argument("build_square_mesh: n >= 1 required");
  if (side <= 0.0) throw std::invalid_argument("build_square_mesh: side > 0 required");
  Mesh mesh;
  mesh.structured = true;
  mesh.grid_n = n;
  mesh.side = side;
  mesh.origin = origin;
  const double h = side / n;
  mesh.vertices.reserve((n + 1) * (n + 1));
  for (int iy = 0; iy <= n; ++iy)
    for (int ix = 0; ix <= n; ++ix)
      mesh.vertices.emplace_back(origin.x() + ix * h, origin.y() + iy * h);
  mesh.elements.reserve(2 * n * n);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const int v00 = iy * (n + 1) + ix;
      const int v10 = v00 + 1;
      const int v01 = v00 + (n + 1);
      const int v11 = v01 + 1;
      mesh.elements.push_back({v00, v10, v11});
      mesh.elements.push_back({v00, v11, v01});
    }
  }

  std::map<std::pair<int, int>, int> edge_ids;
  mesh.element_faces.resize(mesh.elements.size());
  mesh.element_face_sign.resize(mesh.elements.size());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    for (int loc = 0; loc < 3; ++loc) {
      const int a = mesh.elements[e][loc];
      const int b = mesh.elements[e][(loc + 1) % 3];
      const auto key = std::minmax(a, b);
      auto it = edge_ids.find(key);
      if (it == edge_ids.end()) {
        Face f;
        f.v = {a, b};
        f.left = e;
        edge_ids.emplace(key, static_cast<int>(mesh.faces.size()));
        mesh.element_faces[e][loc] = static_cast<int>(mesh.faces.size());
        mesh.faces.push_back(f);
      } else {
        mesh.faces[it->second].right = e;
        mesh.element_faces[e][loc] = it->second;
      }
    }
  }

  for (auto& f : mesh.faces) {
    Vec2 pa = mesh.vertices[f.v[0]], pb = mesh.vertices[f.v[1]];
    f.length = (pb - pa).norm();
    Vec2 tau = (pb - pa) / f.length;
    Vec2 nrm(tau.y(), -tau.x());  // so that tau = (-n2, n1)
    const Vec2 mid = 0.5 * (pa + pb);
    if (nrm.dot(mid - mesh.element_centroid(f.left)) < 0.0) {
      std::swap(f.v[0], f.v[1]);
      tau = -tau;
      nrm = -nrm;
    }
    f.tangent = tau;
    f.normal = nrm;
  }
  for (int e = 0; e < mesh.num_elements(); ++e)
    for (int loc = 0; loc < 3; ++loc)
      mesh.element_face_sign[e][loc] = (mesh.faces[mesh.element_faces[e][loc]].left == e) ? 1 : -1;

  mesh.h_max = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e)
    mesh.h_max = std::max(mesh.h_max, mesh.element_diameter(e));
  return mesh;
}

enum class FaceSide { left, right };

/// Outward normal and tangent of a face as seen from one of its sides.
/// The right side exists only for interior faces; opposite sides see
/// negated frames.
inline std::pair<Vec2, Vec2> face_trace_frame(const Mesh& mesh, int face, FaceSide side) {
  const Face& f = mesh.faces[face];
  if (side == FaceSide::left) return {f.normal, f.tangent};
  if (f.is_boundary())
    throw std::invalid_argument("face_trace_frame: right side requested on boundary face");
  return {-f.normal, -f.tangent};
}

/// CSV dump with sections `vertices`, `elements`, `faces` (0-based indices).
inline void write_mesh_csv(const Mesh& mesh, std::ostream& os) {
  os << "vertices\n";
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
    os << i << "," << mesh.vertices[i].x() << "," << mesh.vertices[i].y() << "\n";
  os << "elements\n";
  for (std::size_t e = 0; e < mesh.elements.size(); ++e)
    os << e << "," << mesh.elements[e][0] << "," << mesh.elements[e][1] << ","
       << mesh.elements[e][2] << "\n";
  os << "faces\n";
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Face& fc = mesh.faces[f];
    os << f << "," << fc.v[0] << "," << fc.v[1] << "," << fc.left << "," << fc.right << ","
       << fc.length << "," << fc.normal.x() << "," << fc.normal.y() << "," << fc.tangent.x()
       << "," << fc.tangent.y() << "\n";
  }
}

}  // namespace hdgstokes
