#include "krigcov/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace krigcov {
namespace {

std::string format_g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

void write_grid_csv(const std::string& path, const MissionGrid& grid,
                    const std::vector<double>& values, double t_label) {
  if (static_cast<int>(values.size()) != grid.cells())
    throw std::invalid_argument("write_grid_csv: value count does not match grid");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_grid_csv: cannot open " + path);
  out << "# t=" << format_g9(t_label) << "\n";
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      if (i) out << ',';
      out << format_g9(values[static_cast<size_t>(grid.linear_index(i, j))]);
    }
    out << '\n';
  }
}

GridScalarField read_grid_csv(const std::string& path, const MissionGrid& grid) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_grid_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# t=", 0) != 0)
    throw std::runtime_error("read_grid_csv: missing '# t=' header in " + path);
  GridScalarField field(grid);
  for (int j = 0; j < grid.ny(); ++j) {
    if (!std::getline(in, line))
      throw std::runtime_error("read_grid_csv: truncated file " + path);
    std::stringstream row(line);
    std::string cell;
    for (int i = 0; i < grid.nx(); ++i) {
      if (!std::getline(row, cell, ','))
        throw std::runtime_error("read_grid_csv: short row " + std::to_string(j));
      size_t pos = 0;
      double v = std::stod(cell, &pos);
      field.at(i, j) = v;
    }
  }
  return field;
}

}  // namespace krigcov
