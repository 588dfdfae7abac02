#include "dphase/config.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace dphase {

namespace {

using nlohmann::json;

std::string require_string(const json& j, const std::string& key) {
  if (!j.contains(key)) throw ConfigError("config: missing key '" + key + "'");
  if (!j.at(key).is_string()) throw ConfigError("config: key '" + key + "' must be a string");
  return j.at(key).get<std::string>();
}

double number_or(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError("config: key '" + key + "' must be a number");
  return j.at(key).get<double>();
}

int int_or(const json& j, const std::string& key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer())
    throw ConfigError("config: key '" + key + "' must be an integer");
  return j.at(key).get<int>();
}

DomainConfig parse_domain(const json& j) {
  DomainConfig d;
  const std::string kind = require_string(j, "kind");
  if (kind == "interval") {
    d.dim = 1;
    d.a = number_or(j, "a", 0.0);
    d.b = number_or(j, "b", 1.0);
    d.cells = int_or(j, "cells", 16);
    if (!(d.a < d.b)) throw ConfigError("config: interval requires a < b");
    if (d.cells < 1) throw ConfigError("config: interval requires cells >= 1");
  } else if (kind == "rectangle") {
    d.dim = 2;
    d.x_extent = number_or(j, "x_extent", 1.0);
    d.y_extent = number_or(j, "y_extent", 1.0);
    d.nx = int_or(j, "nx", 8);
    d.ny = int_or(j, "ny", 8);
    if (!(d.x_extent > 0.0) || !(d.y_extent > 0.0))
      throw ConfigError("config: rectangle extents must be positive");
    if (d.nx < 1 || d.ny < 1) throw ConfigError("config: rectangle requires nx, ny >= 1");
  } else {
    throw ConfigError("config: domain.kind must be 'interval' or 'rectangle'");
  }
  return d;
}

RegionConfig parse_region(const json& j, BoundaryKind boundary) {
  RegionConfig r;
  const std::string kind = require_string(j, "kind");
  if (kind == "constants") {
    r.kind = RegionConfig::Kind::constants;
    if (!j.contains("lower") || !j.contains("upper"))
      throw ConfigError("config: constants region requires 'lower' and 'upper' arrays");
    const auto lower = j.at("lower");
    const auto upper = j.at("upper");
    if (!lower.is_array() || lower.size() != 2 || !upper.is_array() || upper.size() != 2)
      throw ConfigError("config: region bounds must be arrays of two numbers");
    for (int i = 0; i < 2; ++i) {
      r.lower[static_cast<std::size_t>(i)] = lower.at(static_cast<std::size_t>(i)).get<double>();
      r.upper[static_cast<std::size_t>(i)] = upper.at(static_cast<std::size_t>(i)).get<double>();
    }
    if (boundary == BoundaryKind::dirichlet_zero) {
      for (int i = 0; i < 2; ++i) {
        if (!(r.lower[static_cast<std::size_t>(i)] <= 0.0 &&
              0.0 <= r.upper[static_cast<std::size_t>(i)]))
          throw ConfigError(
              "config: Dirichlet constant regions require lower <= 0 <= upper (boundary trace "
              "condition)");
      }
    }
  } else if (kind == "ladder") {
    r.kind = RegionConfig::Kind::ladder;
    r.h1 = require_string(j, "h1");
    r.k1 = require_string(j, "k1");
    r.h2 = require_string(j, "h2");
    r.k2 = require_string(j, "k2");
    r.n_max = int_or(j, "n_max", 0);
    if (boundary == BoundaryKind::dirichlet_zero)
      throw ConfigError("config: band ladders are supported on the Neumann path only");
  } else if (kind == "bracket") {
    r.kind = RegionConfig::Kind::bracket;
    r.phi_hat = {require_string(j, "phi1"), require_string(j, "phi2")};
    r.psi_hat = {require_string(j, "psi1"), require_string(j, "psi2")};
    if (boundary != BoundaryKind::dirichlet_zero)
      throw ConfigError("config: bracket regions require the dirichlet boundary kind");
  } else {
    throw ConfigError("config: region.kind must be 'constants', 'ladder', or 'bracket'");
  }
  return r;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
  }

  RunConfig cfg;
  if (!root.contains("domain")) throw ConfigError("config: missing 'domain' section");
  cfg.domain = parse_domain(root.at("domain"));

  const std::string boundary = require_string(root, "boundary");
  if (boundary == "neumann")
    cfg.boundary = BoundaryKind::neumann_nonlinear;
  else if (boundary == "dirichlet")
    cfg.boundary = BoundaryKind::dirichlet_zero;
  else
    throw ConfigError("config: boundary must be 'neumann' or 'dirichlet'");

  if (!root.contains("components") || !root.at("components").is_array() ||
      root.at("components").size() != 2)
    throw ConfigError("config: 'components' must be an array of two entries");
  for (int k = 0; k < 2; ++k) {
    const auto& jc = root.at("components").at(static_cast<std::size_t>(k));
    auto& c = cfg.components[static_cast<std::size_t>(k)];
    c.p = require_string(jc, "p");
    c.q = require_string(jc, "q");
    c.mu = require_string(jc, "mu");
    if (jc.contains("growth_phi")) c.growth_phi = require_string(jc, "growth_phi");
    if (jc.contains("growth_c")) c.growth_c = number_or(jc, "growth_c", 0.0);
    if (jc.contains("growth_psi")) c.growth_psi = require_string(jc, "growth_psi");
  }

  if (!root.contains("reaction")) throw ConfigError("config: missing 'reaction' section");
  const auto& jr = root.at("reaction");
  cfg.f1 = require_string(jr, "f1");
  cfg.f2 = require_string(jr, "f2");
  if (cfg.boundary == BoundaryKind::dirichlet_zero) {
    if (jr.contains("g1") || jr.contains("g2"))
      throw ConfigError("config: boundary terms g1/g2 are forbidden under dirichlet");
  } else {
    cfg.g1 = require_string(jr, "g1");
    cfg.g2 = require_string(jr, "g2");
  }

  if (!root.contains("region")) throw ConfigError("config: missing 'region' section");
  cfg.region = parse_region(root.at("region"), cfg.boundary);

  if (root.contains("solver")) {
    const auto& js = root.at("solver");
    auto& s = cfg.solver;
    s.newton_tol = number_or(js, "newton_tol", s.newton_tol);
    s.max_newton = int_or(js, "max_newton", s.max_newton);
    s.max_picard = int_or(js, "max_picard", s.max_picard);
    s.picard_tol = number_or(js, "picard_tol", s.picard_tol);
    s.damping = number_or(js, "damping", s.damping);
    s.lambda_init = number_or(js, "lambda_init", s.lambda_init);
    s.lambda_growth = number_or(js, "lambda_growth", s.lambda_growth);
    s.lambda_max = number_or(js, "lambda_max", s.lambda_max);
    s.epsilon_reg = number_or(js, "epsilon_reg", s.epsilon_reg);
    s.comparison_tol = number_or(js, "comparison_tol", s.comparison_tol);
    s.comparison_relax_h2 = number_or(js, "comparison_relax_h2", s.comparison_relax_h2);
    try {
      s.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }

  if (root.contains("sampling")) {
    const auto& js = root.at("sampling");
    cfg.sampling.random_samples = int_or(js, "random_samples", cfg.sampling.random_samples);
    cfg.sampling.seed = static_cast<std::uint64_t>(int_or(js, "seed", 7781));
    cfg.sampling.tolerance = number_or(js, "tolerance", cfg.sampling.tolerance);
  }

  if (root.contains("output")) {
    cfg.output_dir = require_string(root.at("output"), "directory");
  }

  // Expression syntax surfaces early: compile everything once here.
  auto check_expr = [](const std::string& source, const char* what,
                       std::initializer_list<expr::Var> allowed) {
    expr::Expr e;
    try {
      e = expr::parse(source);
    } catch (const expr::ParseError& err) {
      throw ConfigError(std::string("config: ") + what + ": " + err.what());
    }
    std::array<bool, expr::kVarCount> used{};
    e.collect_vars(used);
    for (int i = 0; i < expr::kVarCount; ++i) {
      if (!used[static_cast<std::size_t>(i)]) continue;
      bool ok = false;
      for (auto v : allowed)
        if (static_cast<int>(v) == i) ok = true;
      if (!ok)
        throw ConfigError(std::string("config: ") + what + ": variable '" +
                          expr::var_name(static_cast<expr::Var>(i)) + "' not allowed here");
    }
  };
  using expr::Var;
  const auto spatial = {Var::x1, Var::x2};
  const auto reaction_vars = {Var::x1, Var::x2, Var::s1, Var::s2, Var::g1, Var::g2};
  const auto boundary_vars = {Var::x1, Var::x2, Var::s1, Var::s2};
  for (int k = 0; k < 2; ++k) {
    const auto& c = cfg.components[static_cast<std::size_t>(k)];
    check_expr(c.p, "exponent p", spatial);
    check_expr(c.q, "exponent q", spatial);
    check_expr(c.mu, "weight mu", spatial);
    if (c.growth_phi) check_expr(*c.growth_phi, "growth_phi", spatial);
    if (c.growth_psi) check_expr(*c.growth_psi, "growth_psi", spatial);
  }
  check_expr(cfg.f1, "reaction f1", reaction_vars);
  check_expr(cfg.f2, "reaction f2", reaction_vars);
  if (cfg.boundary == BoundaryKind::neumann_nonlinear) {
    check_expr(cfg.g1, "boundary g1", boundary_vars);
    check_expr(cfg.g2, "boundary g2", boundary_vars);
  }
  if (cfg.region.kind == RegionConfig::Kind::ladder) {
    const auto ladder_vars = {Var::n};
    check_expr(cfg.region.h1, "ladder h1", ladder_vars);
    check_expr(cfg.region.k1, "ladder k1", ladder_vars);
    check_expr(cfg.region.h2, "ladder h2", ladder_vars);
    check_expr(cfg.region.k2, "ladder k2", ladder_vars);
  }
  if (cfg.region.kind == RegionConfig::Kind::bracket) {
    for (int k = 0; k < 2; ++k) {
      check_expr(cfg.region.phi_hat[static_cast<std::size_t>(k)], "bracket phi_hat", spatial);
      check_expr(cfg.region.psi_hat[static_cast<std::size_t>(k)], "bracket psi_hat", spatial);
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::unique_ptr<BuiltProblem> build_problem(const RunConfig& config) {
  auto built = std::make_unique<BuiltProblem>();
  if (config.domain.dim == 1)
    built->mesh = std::make_unique<Mesh>(
        build_interval_mesh(config.domain.a, config.domain.b, config.domain.cells));
  else
    built->mesh = std::make_unique<Mesh>(build_rectangle_mesh(
        config.domain.x_extent, config.domain.y_extent, config.domain.nx, config.domain.ny));

  built->spec.mesh = built->mesh.get();
  built->spec.boundary_kind = config.boundary;
  for (int k = 0; k < 2; ++k) {
    const auto& cc = config.components[static_cast<std::size_t>(k)];
    auto& comp = built->spec.comp[static_cast<std::size_t>(k)];
    comp.exponents = make_exponent_data(compile_field(cc.p), compile_field(cc.q),
                                        compile_field(cc.mu), *built->mesh);
    comp.f = expr::parse(k == 0 ? config.f1 : config.f2);
    if (config.boundary == BoundaryKind::neumann_nonlinear)
      comp.g = expr::parse(k == 0 ? config.g1 : config.g2);
    if (cc.growth_phi) comp.growth_phi = compile_field(*cc.growth_phi);
    if (cc.growth_c) comp.growth_c = *cc.growth_c;
    if (cc.growth_psi) comp.growth_psi = compile_field(*cc.growth_psi);
  }
  return built;
}

}  // namespace dphase
