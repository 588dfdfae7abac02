#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "dphase/problem.hpp"
#include "dphase/solver.hpp"
#include "dphase/trapping.hpp"

namespace dphase {

/// Configuration/usage errors; the CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainConfig {
  int dim = 1;
  double a = 0.0, b = 1.0;  // interval bounds
  int cells = 16;
  double x_extent = 1.0, y_extent = 1.0;  // rectangle extents
  int nx = 8, ny = 8;
};

struct RegionConfig {
  enum class Kind { constants, ladder, bracket } kind = Kind::constants;
  std::array<double, 2> lower{0.0, 0.0};  // constants
  std::array<double, 2> upper{0.0, 0.0};
  std::string h1, k1, h2, k2;  // ladder formulas in n
  int n_max = 0;
  std::array<std::string, 2> phi_hat;  // bracket sources
  std::array<std::string, 2> psi_hat;
};

struct ComponentConfig {
  std::string p = "2", q = "3", mu = "0";
  std::optional<std::string> growth_phi;
  std::optional<double> growth_c;
  std::optional<std::string> growth_psi;
};

struct RunConfig {
  DomainConfig domain;
  BoundaryKind boundary = BoundaryKind::neumann_nonlinear;
  std::array<ComponentConfig, 2> components;
  std::string f1, f2;
  std::string g1, g2;  // empty under dirichlet_zero
  RegionConfig region;
  SolveOptions solver;
  SamplingPolicy sampling;
  std::string output_dir = "out";
};

/// Parses the JSON configuration document; throws ConfigError on I/O,
/// syntax, or cross-validation failures.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text);

/// Mesh + compiled ProblemSpec for a configuration. Owns the mesh; the
/// embedded spec points into it, so the struct must stay alive while the
/// spec is in use (and must not be moved).
struct BuiltProblem {
  BuiltProblem() = default;
  BuiltProblem(const BuiltProblem&) = delete;
  BuiltProblem& operator=(const BuiltProblem&) = delete;

  std::unique_ptr<Mesh> mesh;
  ProblemSpec spec;
};

std::unique_ptr<BuiltProblem> build_problem(const RunConfig& config);

}  // namespace dphase
