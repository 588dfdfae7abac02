#pragma once

#include <array>
#include <optional>

#include "dphase/expr.hpp"
#include "dphase/field.hpp"
#include "dphase/mesh.hpp"

namespace dphase {

enum class BoundaryKind { neumann_nonlinear, dirichlet_zero };

/// Data of one component k: exponents/weight plus the nonlinearities.
/// f uses variables x1, x2, s1, s2, g1, g2; g uses x1, x2, s1, s2.
/// The growth fields mirror the optional local growth metadata and are used
/// for diagnostics only.
struct ComponentSpec {
  ExponentData exponents;
  expr::Expr f;
  expr::Expr g;  // ignored under dirichlet_zero
  std::optional<ScalarField> growth_phi;
  std::optional<double> growth_c;
  std::optional<ScalarField> growth_psi;
};

struct ProblemSpec {
  const Mesh* mesh = nullptr;
  BoundaryKind boundary_kind = BoundaryKind::neumann_nonlinear;
  std::array<ComponentSpec, 2> comp;
};

/// Pair (u1, u2) of nodal fields on one mesh.
struct SystemState {
  NodalField u1, u2;

  NodalField& component(int k) { return k == 0 ? u1 : u2; }
  const NodalField& component(int k) const { return k == 0 ? u1 : u2; }
};

SystemState constant_state(const Mesh& mesh, double v1, double v2);

/// Order interval [lower, upper]; lower <= upper node-wise per component.
/// For Dirichlet problems the boundary nodes must additionally satisfy
/// lower <= 0 <= upper (the trace condition of the Dirichlet sub/supersolution
/// definition).
struct TrappingRegion {
  SystemState lower, upper;
};

bool region_ordered(const TrappingRegion& region);
/// Throws std::invalid_argument when the ordering invariant fails; with a
/// mesh given, also enforces the Dirichlet boundary sign condition.
void check_region(const TrappingRegion& region, const Mesh* mesh = nullptr,
                  BoundaryKind kind = BoundaryKind::neumann_nonlinear);

SystemState region_midpoint(const TrappingRegion& region);

}  // namespace dphase
