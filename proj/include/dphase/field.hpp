#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "dphase/expr.hpp"
#include "dphase/mesh.hpp"

namespace dphase {

/// Spatial scalar field: either a constant or a compiled expression in x1, x2.
/// Deterministic and total on mesh quadrature points and nodes (expression
/// domain errors surface as expr::EvalError).
class ScalarField {
public:
  ScalarField() : const_(0.0) {}

  static ScalarField constant(double value);
  /// Parses `source`; rejects non-spatial variables (s1, s2, g1, g2, n).
  static ScalarField expression(const std::string& source);

  bool is_constant() const { return const_.has_value(); }
  double constant_value() const { return *const_; }
  const std::string& source() const { return source_; }

  double operator()(double x1, double x2 = 0.0) const;

private:
  std::optional<double> const_;
  expr::Expr ast_;
  std::string source_;
};

/// Compile an expression source into a field; pure literals become the
/// constant kind.
ScalarField compile_field(const std::string& source);

NodalField interpolate(const Mesh& mesh, const ScalarField& f);

/// Variable exponents p, q and weight mu of one component, with values cached
/// at every cell/facet quadrature point and node of a fixed mesh. Immutable
/// after construction; safe to share across threads.
struct ExponentData {
  ScalarField p, q, mu;
  int dimension = 0;  // N, taken from the mesh

  // Sampled bounds over the union of quadrature points and nodes.
  double p_minus = 0.0, p_plus = 0.0;
  double q_minus = 0.0, q_plus = 0.0;

  Eigen::VectorXd p_cell, q_cell, mu_cell;     // per cell quadrature point
  Eigen::VectorXd p_facet, q_facet, mu_facet;  // per facet quadrature point
  Eigen::VectorXd p_node, q_node, mu_node;     // per vertex

  const Mesh* mesh = nullptr;  // identity of the mesh the caches belong to
};

ExponentData make_exponent_data(ScalarField p, ScalarField q, ScalarField mu, const Mesh& mesh);

struct H1Violation {
  std::string condition;        // e.g. "q <= p", "p >= N", "q >= p*", "p <= 1", "mu < 0"
  std::array<double, 2> point;  // offending sample point
  double observed = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<H1Violation> violations;
  std::vector<std::string> notes;  // e.g. the 1D relaxation flag
  bool valid() const { return violations.empty(); }
};

/// Pointwise hypothesis check at every quadrature point and node:
/// p > 1, mu >= 0, p < q, and for N >= 2 additionally p < N and
/// q < p* = N p / (N - p). In 1D the p* constraint is relaxed (flagged
/// as a note, not a failure).
ValidationReport validate_h1(const ExponentData& data, const Mesh& mesh);

}  // namespace dphase
