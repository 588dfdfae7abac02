#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "dphase/problem.hpp"

namespace dphase {

/// Full-precision decimal rendering (17 significant digits).
std::string format_g17(double v);

/// Per-vertex solution CSV. Columns:
///   1D: index,x1,u1,u2
///   2D: index,x1,x2,u1,u2
void write_solution_csv(std::ostream& os, const Mesh& mesh, const SystemState& state);
std::string solution_csv(const Mesh& mesh, const SystemState& state);
SystemState read_solution_csv(std::istream& is, const Mesh& mesh);

/// Residual history CSV with columns iteration,residual.
void write_residual_history_csv(std::ostream& os, const std::vector<double>& history);

/// Ordered key-value report document ("key = value" per line).
class ReportWriter {
public:
  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, const char* value);
  void add(const std::string& key, double value);
  void add(const std::string& key, int value);
  void add(const std::string& key, bool value);
  void write(std::ostream& os) const;
  std::string str() const;

private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace dphase
