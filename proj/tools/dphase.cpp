#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dphase/assembly.hpp"
#include "dphase/config.hpp"
#include "dphase/io.hpp"
#include "dphase/musielak.hpp"
#include "dphase/solver.hpp"
#include "dphase/trapping.hpp"

namespace fs = std::filesystem;
using namespace dphase;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitMath = 1;
constexpr int kExitUsage = 2;

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << content;
}

fs::path ensure_output_dir(const RunConfig& cfg) {
  fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "'");
  return dir;
}

void add_mesh_info(ReportWriter& report, const RunConfig& cfg, const Mesh& mesh) {
  report.add("mesh.dim", mesh.dim);
  report.add("mesh.vertices", mesh.n_vertices());
  report.add("mesh.cells", mesh.n_cells());
  report.add("boundary",
             cfg.boundary == BoundaryKind::neumann_nonlinear ? "neumann" : "dirichlet");
}

void add_solve_info(ReportWriter& report, const SolveReport& sr) {
  report.add("converged", sr.converged);
  report.add("picard_iterations", sr.picard_iterations);
  report.add("newton_iterations_total", sr.newton_iterations_total);
  report.add("final_residual_norm", sr.final_residual_norm);
  report.add("lambda_used.1", sr.lambda_used[0]);
  report.add("lambda_used.2", sr.lambda_used[1]);
  report.add("enclosure_violation", sr.enclosure_violation);
  if (!sr.failure_reason.empty()) report.add("failure_reason", sr.failure_reason);
}

void add_comparison_info(ReportWriter& report, const ComparisonStats& stats) {
  for (int k = 0; k < 2; ++k) {
    const std::string tag = std::to_string(k + 1);
    report.add("comparison.overshoot." + tag, stats.overshoot[static_cast<std::size_t>(k)]);
    report.add("comparison.undershoot." + tag, stats.undershoot[static_cast<std::size_t>(k)]);
    report.add("comparison.overshoot_modular." + tag,
               stats.overshoot_modular[static_cast<std::size_t>(k)]);
    report.add("comparison.undershoot_modular." + tag,
               stats.undershoot_modular[static_cast<std::size_t>(k)]);
  }
}

int cmd_validate(const std::string& config_path) {
  const RunConfig cfg = load_config(config_path);
  auto built = build_problem(cfg);
  const fs::path dir = ensure_output_dir(cfg);

  ReportWriter report;
  report.add("command", "validate");
  report.add("config", config_path);
  add_mesh_info(report, cfg, *built->mesh);

  bool clean = true;
  for (int k = 0; k < 2; ++k) {
    const auto& data = built->spec.comp[static_cast<std::size_t>(k)].exponents;
    const ValidationReport vr = validate_h1(data, *built->mesh);
    const std::string tag = "component." + std::to_string(k + 1);
    report.add(tag + ".p_minus", data.p_minus);
    report.add(tag + ".p_plus", data.p_plus);
    report.add(tag + ".q_minus", data.q_minus);
    report.add(tag + ".q_plus", data.q_plus);
    report.add(tag + ".h1_violations", static_cast<int>(vr.violations.size()));
    for (const auto& note : vr.notes) report.add(tag + ".note", note);
    const std::size_t cap = 20;
    for (std::size_t i = 0; i < vr.violations.size() && i < cap; ++i) {
      const auto& v = vr.violations[i];
      char where[64];
      std::snprintf(where, sizeof where, "(%.6g, %.6g)", v.point[0], v.point[1]);
      report.add(tag + ".violation", v.condition + " at " + where + " (" + v.detail +
                                         ", observed " + format_g17(v.observed) + ")");
    }
    if (!vr.valid()) clean = false;
  }

  if (cfg.region.kind == RegionConfig::Kind::constants) {
    const auto growth =
        check_growth(built->spec, cfg.region.lower, cfg.region.upper, 256, cfg.sampling.seed);
    report.add("growth_check.samples", 256);
    report.add("growth_check.violations", static_cast<int>(growth.size()));
    for (const auto& g : growth) report.add("growth_check.violation", g);
    if (!growth.empty()) clean = false;
  }

  report.add("valid", clean);
  const std::string text = report.str();
  write_file(dir / "validation_report.txt", text);
  std::cout << text;
  return clean ? kExitOk : kExitMath;
}

TrappingRegion region_for_solve(const RunConfig& cfg, const ProblemSpec& spec,
                                const fs::path& dir) {
  if (cfg.region.kind == RegionConfig::Kind::constants)
    return constant_region(cfg.region.lower, cfg.region.upper, *spec.mesh);
  if (cfg.region.kind == RegionConfig::Kind::bracket) {
    std::array<ScalarField, 2> phi = {compile_field(cfg.region.phi_hat[0]),
                                      compile_field(cfg.region.phi_hat[1])};
    std::array<ScalarField, 2> psi = {compile_field(cfg.region.psi_hat[0]),
                                      compile_field(cfg.region.psi_hat[1])};
    TrappingRegion region = dirichlet_bracket(spec, phi, psi, cfg.solver);
    write_file(dir / "region_lower.csv", solution_csv(*spec.mesh, region.lower));
    write_file(dir / "region_upper.csv", solution_csv(*spec.mesh, region.upper));
    return region;
  }
  throw ConfigError("solve: ladder regions are handled by the multi-solve command");
}

int cmd_solve(const std::string& config_path) {
  const RunConfig cfg = load_config(config_path);
  auto built = build_problem(cfg);
  const fs::path dir = ensure_output_dir(cfg);

  ReportWriter report;
  report.add("command", "solve");
  report.add("config", config_path);
  add_mesh_info(report, cfg, *built->mesh);
  report.add("epsilon_reg", cfg.solver.epsilon_reg);

  int exit_code = kExitOk;
  try {
    const TrappingRegion region = region_for_solve(cfg, built->spec, dir);
    const LambdaScheduleResult result = select_lambda(built->spec, region, cfg.solver);

    report.add("lambda.accepted", result.accepted);
    report.add("lambda.attempts", result.attempts);
    add_solve_info(report, result.report);
    add_comparison_info(report, comparison_check(result.state, region, built->spec));
    if (!result.failure_reason.empty()) report.add("schedule_failure", result.failure_reason);

    const auto weak = weak_residual(result.state, built->spec, cfg.solver.epsilon_reg);
    report.add("weak_residual_norm", std::hypot(weak[0].norm(), weak[1].norm()));

    write_file(dir / "solution.csv", solution_csv(*built->mesh, result.state));
    std::ostringstream history;
    write_residual_history_csv(history, result.report.residual_history);
    write_file(dir / "residual_history.csv", history.str());

    if (!result.accepted) exit_code = kExitMath;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    report.add("error", e.what());
    exit_code = kExitMath;
  }
  const std::string text = report.str();
  write_file(dir / "report.txt", text);
  std::cout << text;
  return exit_code;
}

int cmd_multi_solve(const std::string& config_path, int n_max_override) {
  const RunConfig cfg = load_config(config_path);
  if (cfg.region.kind != RegionConfig::Kind::ladder)
    throw ConfigError("multi-solve: the config must define a ladder region");
  auto built = build_problem(cfg);
  const fs::path dir = ensure_output_dir(cfg);

  ReportWriter report;
  report.add("command", "multi-solve");
  report.add("config", config_path);
  add_mesh_info(report, cfg, *built->mesh);

  const int n_max = n_max_override >= 0 ? n_max_override : cfg.region.n_max;
  report.add("n_max", n_max);

  int exit_code = kExitOk;
  try {
    LadderFormulas formulas;
    formulas.h1 = expr::parse(cfg.region.h1);
    formulas.k1 = expr::parse(cfg.region.k1);
    formulas.h2 = expr::parse(cfg.region.h2);
    formulas.k2 = expr::parse(cfg.region.k2);
    const BandLadder ladder = enumerate_bands(formulas, n_max);
    report.add("bands", static_cast<int>(ladder.bands.size()));
    report.add("direction.1", ladder.direction[0]);
    report.add("direction.2", ladder.direction[1]);

    const MultiSolveResult result = multi_solve(built->spec, ladder, cfg.solver, cfg.sampling);
    for (std::size_t n = 0; n < result.bands.size(); ++n) {
      const auto& band = result.bands[n];
      const std::string tag = "band." + std::to_string(n);
      report.add(tag + ".solved", band.solved);
      report.add(tag + ".lambda", band.lambda[0]);
      report.add(tag + ".enclosure_violation", band.report.enclosure_violation);
      report.add(tag + ".final_residual_norm", band.report.final_residual_norm);
      if (band.solved)
        write_file(dir / ("band_" + std::to_string(n) + ".csv"),
                   solution_csv(*built->mesh, band.state));
    }
    report.add("all_solved", result.all_solved);
    report.add("ordering_ok", result.ordering_ok);
    report.add("distinct_ok", result.distinct_ok);
    if (!result.failure_reason.empty()) report.add("failure_reason", result.failure_reason);
    if (!result.ok()) exit_code = kExitMath;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    report.add("error", e.what());
    exit_code = kExitMath;
  }
  const std::string text = report.str();
  write_file(dir / "ladder_report.txt", text);
  std::cout << text;
  return exit_code;
}

void add_verification(ReportWriter& report, const std::string& tag, const VerificationReport& vr) {
  report.add(tag + "pass", vr.pass);
  report.add(tag + "max_sub_violation", vr.max_sub_violation);
  report.add(tag + "max_super_violation", vr.max_super_violation);
  report.add(tag + "samples_used", vr.samples_used);
  report.add(tag + "findings", static_cast<int>(vr.findings.size()));
  const std::size_t cap = 10;
  for (std::size_t i = 0; i < vr.findings.size() && i < cap; ++i) {
    const auto& f = vr.findings[i];
    report.add(tag + "finding", std::string(f.sub ? "sub" : "super") +
                                    " inequality violated by " + format_g17(f.value) +
                                    " (component " + std::to_string(f.component) + ", hat " +
                                    std::to_string(f.node) + ", sample " +
                                    std::to_string(f.sample) + ")");
  }
  report.add(tag + "note", vr.note);
}

int cmd_verify(const std::string& config_path) {
  const RunConfig cfg = load_config(config_path);
  auto built = build_problem(cfg);
  const fs::path dir = ensure_output_dir(cfg);

  ReportWriter report;
  report.add("command", "verify");
  report.add("config", config_path);
  add_mesh_info(report, cfg, *built->mesh);

  int exit_code = kExitOk;
  try {
    bool pass = true;
    if (cfg.region.kind == RegionConfig::Kind::ladder) {
      LadderFormulas formulas;
      formulas.h1 = expr::parse(cfg.region.h1);
      formulas.k1 = expr::parse(cfg.region.k1);
      formulas.h2 = expr::parse(cfg.region.h2);
      formulas.k2 = expr::parse(cfg.region.k2);
      const BandLadder ladder = enumerate_bands(formulas, cfg.region.n_max);
      for (std::size_t n = 0; n < ladder.bands.size(); ++n) {
        const TrappingRegion region =
            constant_region(ladder.bands[n].lower, ladder.bands[n].upper, *built->mesh);
        const VerificationReport vr = verify_pair(region, built->spec, cfg.sampling);
        add_verification(report, "band." + std::to_string(n) + ".", vr);
        pass = pass && vr.pass;
      }
    } else {
      const TrappingRegion region = region_for_solve(cfg, built->spec, dir);
      const VerificationReport vr = verify_pair(region, built->spec, cfg.sampling);
      add_verification(report, "", vr);
      pass = vr.pass;
    }
    report.add("pass", pass);
    if (!pass) exit_code = kExitMath;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    report.add("error", e.what());
    exit_code = kExitMath;
  }
  const std::string text = report.str();
  write_file(dir / "verification_report.txt", text);
  std::cout << text;
  return exit_code;
}

int cmd_norms(const std::string& config_path, const std::string& field_path) {
  const RunConfig cfg = load_config(config_path);
  auto built = build_problem(cfg);
  const fs::path dir = ensure_output_dir(cfg);

  std::ifstream in(field_path);
  if (!in) throw ConfigError("norms: cannot open field CSV '" + field_path + "'");
  const SystemState state = read_solution_csv(in, *built->mesh);

  ReportWriter report;
  report.add("command", "norms");
  report.add("config", config_path);
  report.add("field", field_path);

  std::cout << "component  modular        norm           grad_modular   boundary_norm  "
               "sign  small  large\n";
  for (int k = 0; k < 2; ++k) {
    const auto& data = built->spec.comp[static_cast<std::size_t>(k)].exponents;
    const auto& u = state.component(k);
    const double rho = modular(u, data, *built->mesh).value;
    const double norm = luxemburg_norm(u, data, *built->mesh).value;
    const double grad_rho = gradient_modular(u, data, *built->mesh).value;
    const double bnorm = boundary_norm(u, data, *built->mesh).value;
    const bool zero = u.size() == 0 || u.lpNorm<Eigen::Infinity>() == 0.0;
    RelationReport rel;
    if (!zero) rel = check_norm_modular_relations(u, data, *built->mesh);

    const std::string tag = "component." + std::to_string(k + 1);
    report.add(tag + ".modular", rho);
    report.add(tag + ".norm", norm);
    report.add(tag + ".gradient_modular", grad_rho);
    report.add(tag + ".boundary_modular", boundary_modular(u, data, *built->mesh).value);
    report.add(tag + ".boundary_norm", bnorm);
    report.add(tag + ".relation.sign_agreement", rel.sign_agreement);
    report.add(tag + ".relation.small_norm_bounds", rel.small_norm_bounds);
    report.add(tag + ".relation.large_norm_bounds", rel.large_norm_bounds);

    char row[160];
    std::snprintf(row, sizeof row, "u%-9d %-14.8g %-14.8g %-14.8g %-14.8g %-5s %-6s %-5s\n", k + 1,
                  rho, norm, grad_rho, bnorm, rel.sign_agreement ? "ok" : "FAIL",
                  rel.small_norm_bounds ? "ok" : "FAIL", rel.large_norm_bounds ? "ok" : "FAIL");
    std::cout << row;
  }
  write_file(dir / "norms_report.txt", report.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Double phase elliptic system solver with trapping-region enclosures"};
  app.require_subcommand(1);

  std::string config_path;
  std::string field_path;
  int n_max_override = -1;

  auto* validate = app.add_subcommand("validate", "Check hypotheses and expressions");
  validate->add_option("config", config_path, "configuration file")->required();

  auto* solve = app.add_subcommand("solve", "Solve inside a trapping region");
  solve->add_option("config", config_path, "configuration file")->required();

  auto* multi = app.add_subcommand("multi-solve", "Solve every band of a ladder");
  multi->add_option("config", config_path, "configuration file")->required();
  multi->add_option("--n-max", n_max_override, "override the ladder band count");

  auto* verify = app.add_subcommand("verify", "Verify the sub/supersolution inequalities");
  verify->add_option("config", config_path, "configuration file")->required();

  auto* norms = app.add_subcommand("norms", "Modular/norm table for a field CSV");
  norms->add_option("config", config_path, "configuration file")->required();
  norms->add_option("field", field_path, "solution CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(config_path);
    if (solve->parsed()) return cmd_solve(config_path);
    if (multi->parsed()) return cmd_multi_solve(config_path, n_max_override);
    if (verify->parsed()) return cmd_verify(config_path);
    if (norms->parsed()) return cmd_norms(config_path, field_path);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const expr::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitMath;
  }
  return kExitUsage;
}
