#include "dphase/io.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dphase {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_solution_csv(std::ostream& os, const Mesh& mesh, const SystemState& state) {
  if (mesh.dim == 1)
    os << "index,x1,u1,u2\n";
  else
    os << "index,x1,x2,u1,u2\n";
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const auto& p = mesh.vertices[static_cast<std::size_t>(v)];
    os << v << ',' << format_g17(p[0]);
    if (mesh.dim == 2) os << ',' << format_g17(p[1]);
    os << ',' << format_g17(state.u1[v]) << ',' << format_g17(state.u2[v]) << '\n';
  }
}

std::string solution_csv(const Mesh& mesh, const SystemState& state) {
  std::ostringstream os;
  write_solution_csv(os, mesh, state);
  return os.str();
}

SystemState read_solution_csv(std::istream& is, const Mesh& mesh) {
  SystemState state = constant_state(mesh, 0.0, 0.0);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("solution CSV: missing header");
  int rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
    const std::size_t expected = mesh.dim == 1 ? 4 : 5;
    if (values.size() != expected)
      throw std::runtime_error("solution CSV: wrong column count on row " + std::to_string(rows));
    const int index = static_cast<int>(values[0]);
    if (index < 0 || index >= mesh.n_vertices())
      throw std::runtime_error("solution CSV: vertex index out of range");
    state.u1[index] = values[expected - 2];
    state.u2[index] = values[expected - 1];
    ++rows;
  }
  if (rows != mesh.n_vertices())
    throw std::runtime_error("solution CSV: expected " + std::to_string(mesh.n_vertices()) +
                             " rows, found " + std::to_string(rows));
  return state;
}

void write_residual_history_csv(std::ostream& os, const std::vector<double>& history) {
  os << "iteration,residual\n";
  for (std::size_t i = 0; i < history.size(); ++i)
    os << i << ',' << format_g17(history[i]) << '\n';
}

void ReportWriter::add(const std::string& key, const std::string& value) {
  entries_.emplace_back(key, value);
}
void ReportWriter::add(const std::string& key, const char* value) {
  entries_.emplace_back(key, std::string(value));
}
void ReportWriter::add(const std::string& key, double value) {
  entries_.emplace_back(key, format_g17(value));
}
void ReportWriter::add(const std::string& key, int value) {
  entries_.emplace_back(key, std::to_string(value));
}
void ReportWriter::add(const std::string& key, bool value) {
  entries_.emplace_back(key, value ? "true" : "false");
}

void ReportWriter::write(std::ostream& os) const {
  for (const auto& [key, value] : entries_) os << key << " = " << value << '\n';
}

std::string ReportWriter::str() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

}  // namespace dphase
