#pragma once

#include <stdexcept>
#include <vector>

#include "hdgstokes/local.hpp"
#include "hdgstokes/mesh.hpp"

namespace hdgstokes {

/// Global numbering of the coupled trace/control unknowns: interior-face
/// state traces, then interior-face adjoint traces, then boundary controls,
/// each ordered by face index, then component, then mode.
struct DofMap {
  int k = 0, nfe = 0;
  int n_interior = 0, n_boundary = 0;
  std::vector<int> interior_id;  // face -> 0..n_interior-1, or -1
  std::vector<int> boundary_id;  // face -> 0..n_boundary-1, or -1
  int zhat_base = 0, u_base = 0, total = 0;

  int yhat_start(int face) const { return interior_id[face] * 2 * nfe; }
  int zhat_start(int face) const { return zhat_base + interior_id[face] * 2 * nfe; }
  int u_start(int face) const { return u_base + boundary_id[face] * nfe; }
};

inline DofMap build_dof_map(const Mesh& mesh, int k) {
  if (k < 0) throw std::invalid_argument("build_dof_map: k >= 0 required");
  DofMap dm;
  dm.k = k;
  dm.nfe = k + 1;
  dm.interior_id.assign(mesh.num_faces(), -1);
  dm.boundary_id.assign(mesh.num_faces(), -1);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    if (mesh.faces[f].is_boundary()) dm.boundary_id[f] = dm.n_boundary++;
    else dm.interior_id[f] = dm.n_interior++;
  }
  dm.zhat_base = dm.n_interior * 2 * dm.nfe;
  dm.u_base = 2 * dm.zhat_base;
  dm.total = dm.u_base + dm.n_boundary * dm.nfe;
  return dm;
}

/// Global indices of one element's local zeta unknowns, in the local
/// condensation order.
inline std::vector<int> element_trace_dofs(const Mesh& mesh, const DofMap& dm, int e) {
  const int nfe = dm.nfe;
  std::vector<int> idx;
  // interior faces in local order: yhat then zhat then boundary u
  for (int pass = 0; pass < 2; ++pass)
    for (int loc = 0; loc < 3; ++loc) {
      const int f = mesh.element_faces[e][loc];
      if (mesh.faces[f].is_boundary()) continue;
      const int start = (pass == 0) ? dm.yhat_start(f) : dm.zhat_start(f);
      for (int i = 0; i < 2 * nfe; ++i) idx.push_back(start + i);
    }
  for (int loc = 0; loc < 3; ++loc) {
    const int f = mesh.element_faces[e][loc];
    if (!mesh.faces[f].is_boundary()) continue;
    const int start = dm.u_start(f);
    for (int i = 0; i < nfe; ++i) idx.push_back(start + i);
  }
  return idx;
}

}  // namespace hdgstokes
