#include "dphase/problem.hpp"

#include <stdexcept>

namespace dphase {

SystemState constant_state(const Mesh& mesh, double v1, double v2) {
  SystemState s;
  s.u1 = NodalField::Constant(mesh.n_vertices(), v1);
  s.u2 = NodalField::Constant(mesh.n_vertices(), v2);
  return s;
}

bool region_ordered(const TrappingRegion& region) {
  for (int k = 0; k < 2; ++k) {
    const auto& lo = region.lower.component(k);
    const auto& up = region.upper.component(k);
    if (lo.size() != up.size()) return false;
    if (((up - lo).array() < 0.0).any()) return false;
  }
  return true;
}

void check_region(const TrappingRegion& region, const Mesh* mesh, BoundaryKind kind) {
  for (int k = 0; k < 2; ++k) {
    const auto& lo = region.lower.component(k);
    const auto& up = region.upper.component(k);
    if (lo.size() != up.size())
      throw std::invalid_argument("trapping region: component " + std::to_string(k + 1) +
                                  " bounds live on different meshes");
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
      if (!(lo[i] <= up[i]))
        throw std::invalid_argument("trapping region: lower > upper for component " +
                                    std::to_string(k + 1) + " at node " + std::to_string(i));
    }
  }
  if (mesh != nullptr && kind == BoundaryKind::dirichlet_zero) {
    for (int k = 0; k < 2; ++k) {
      const auto& lo = region.lower.component(k);
      const auto& up = region.upper.component(k);
      for (int v : mesh->boundary_vertices()) {
        if (!(lo[v] <= 0.0 && 0.0 <= up[v]))
          throw std::invalid_argument(
              "trapping region: Dirichlet problems require lower <= 0 <= upper at boundary "
              "nodes; violated for component " +
              std::to_string(k + 1) + " at node " + std::to_string(v));
      }
    }
  }
}

SystemState region_midpoint(const TrappingRegion& region) {
  SystemState mid;
  mid.u1 = 0.5 * (region.lower.u1 + region.upper.u1);
  mid.u2 = 0.5 * (region.lower.u2 + region.upper.u2);
  return mid;
}

}  // namespace dphase
