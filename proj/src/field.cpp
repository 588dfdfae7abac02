#include "dphase/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dphase {

ScalarField ScalarField::constant(double value) {
  ScalarField f;
  f.const_ = value;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  f.source_ = buf;
  return f;
}

ScalarField ScalarField::expression(const std::string& source) {
  if (source.empty()) throw expr::ParseError("empty field source", 0);
  expr::Expr ast = expr::parse(source);
  std::array<bool, expr::kVarCount> used{};
  ast.collect_vars(used);
  for (int i = 0; i < expr::kVarCount; ++i) {
    const auto v = static_cast<expr::Var>(i);
    if (used[static_cast<std::size_t>(i)] && v != expr::Var::x1 && v != expr::Var::x2)
      throw expr::ParseError(std::string("variable '") + expr::var_name(v) +
                                 "' not allowed in a spatial field",
                             0);
  }
  ScalarField f;
  if (ast.root() && ast.root()->op == expr::Op::literal) {
    f.const_ = ast.root()->value;
  }
  f.ast_ = ast;
  f.source_ = source;
  return f;
}

double ScalarField::operator()(double x1, double x2) const {
  if (const_ && ast_.empty()) return *const_;
  if (const_) return *const_;
  expr::Bindings env;
  env.set(expr::Var::x1, x1).set(expr::Var::x2, x2);
  return ast_.evaluate(env);
}

ScalarField compile_field(const std::string& source) { return ScalarField::expression(source); }

NodalField interpolate(const Mesh& mesh, const ScalarField& f) {
  return interpolate(mesh, [&f](double x1, double x2) { return f(x1, x2); });
}

ExponentData make_exponent_data(ScalarField p, ScalarField q, ScalarField mu, const Mesh& mesh) {
  ExponentData data;
  data.p = std::move(p);
  data.q = std::move(q);
  data.mu = std::move(mu);
  data.dimension = mesh.dim;
  data.mesh = &mesh;

  const int ncq = mesh.n_cells() * mesh.qp_per_cell;
  const int nfq = mesh.n_facets() * mesh.qp_per_facet;
  const int nv = mesh.n_vertices();
  data.p_cell.resize(ncq);
  data.q_cell.resize(ncq);
  data.mu_cell.resize(ncq);
  data.p_facet.resize(nfq);
  data.q_facet.resize(nfq);
  data.mu_facet.resize(nfq);
  data.p_node.resize(nv);
  data.q_node.resize(nv);
  data.mu_node.resize(nv);

  for (int i = 0; i < ncq; ++i) {
    const auto& x = mesh.cell_qp[static_cast<std::size_t>(i)].x;
    data.p_cell[i] = data.p(x[0], x[1]);
    data.q_cell[i] = data.q(x[0], x[1]);
    data.mu_cell[i] = data.mu(x[0], x[1]);
  }
  for (int i = 0; i < nfq; ++i) {
    const auto& x = mesh.facet_qp[static_cast<std::size_t>(i)].x;
    data.p_facet[i] = data.p(x[0], x[1]);
    data.q_facet[i] = data.q(x[0], x[1]);
    data.mu_facet[i] = data.mu(x[0], x[1]);
  }
  for (int v = 0; v < nv; ++v) {
    const auto& x = mesh.vertices[static_cast<std::size_t>(v)];
    data.p_node[v] = data.p(x[0], x[1]);
    data.q_node[v] = data.q(x[0], x[1]);
    data.mu_node[v] = data.mu(x[0], x[1]);
  }

  double pmin = std::numeric_limits<double>::infinity(), pmax = -pmin;
  double qmin = pmin, qmax = -pmin;
  auto fold = [&](const Eigen::VectorXd& pv, const Eigen::VectorXd& qv) {
    if (pv.size() == 0) return;
    pmin = std::min(pmin, pv.minCoeff());
    pmax = std::max(pmax, pv.maxCoeff());
    qmin = std::min(qmin, qv.minCoeff());
    qmax = std::max(qmax, qv.maxCoeff());
  };
  fold(data.p_cell, data.q_cell);
  fold(data.p_facet, data.q_facet);
  fold(data.p_node, data.q_node);
  data.p_minus = pmin;
  data.p_plus = pmax;
  data.q_minus = qmin;
  data.q_plus = qmax;
  return data;
}

namespace {

void check_point(const ExponentData& data, std::array<double, 2> x, double p, double q, double mu,
                 ValidationReport& report) {
  auto add = [&](const char* condition, double observed, std::string detail) {
    report.violations.push_back({condition, x, observed, std::move(detail)});
  };
  const int N = data.dimension;
  if (!(p > 1.0)) add("p <= 1", p, "requires p(x) > 1");
  if (mu < 0.0) add("mu < 0", mu, "requires mu(x) >= 0");
  if (!(q > p)) add("q <= p", q, "requires p(x) < q(x)");
  if (N >= 2) {
    if (!(p < N)) {
      add("p >= N", p, "requires p(x) < N");
    } else if (p > 1.0) {
      const double p_star = N * p / (N - p);
      if (!(q < p_star)) add("q >= p*", q, "requires q(x) < N p(x)/(N - p(x))");
    }
  }
}

}  // namespace

ValidationReport validate_h1(const ExponentData& data, const Mesh& mesh) {
  if (data.mesh != &mesh)
    throw std::invalid_argument("validate_h1: exponent data was built for a different mesh");
  ValidationReport report;
  if (mesh.dim == 1)
    report.notes.push_back("1D relaxation: p* treated as +infinity (q < p* not enforced)");

  for (int i = 0; i < mesh.n_cells() * mesh.qp_per_cell; ++i)
    check_point(data, mesh.cell_qp[static_cast<std::size_t>(i)].x, data.p_cell[i], data.q_cell[i],
                data.mu_cell[i], report);
  for (int i = 0; i < mesh.n_facets() * mesh.qp_per_facet; ++i)
    check_point(data, mesh.facet_qp[static_cast<std::size_t>(i)].x, data.p_facet[i],
                data.q_facet[i], data.mu_facet[i], report);
  for (int v = 0; v < mesh.n_vertices(); ++v)
    check_point(data, mesh.vertices[static_cast<std::size_t>(v)], data.p_node[v], data.q_node[v],
                data.mu_node[v], report);
  return report;
}

}  // namespace dphase
