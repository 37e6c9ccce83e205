#include "erg/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace erg {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(const std::string& path, const std::vector<Trajectory>& trajs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  const int n = static_cast<int>(trajs[0].states[0].size());
  const int m = static_cast<int>(trajs[0].controls.empty() ? 0 : trajs[0].controls[0].size());
  out << "t,robot_id";
  for (int d = 0; d < n; ++d) out << ",x" << (d + 1);
  for (int d = 0; d < m; ++d) out << ",u" << (d + 1);
  out << "\n";
  for (size_t i = 0; i < trajs.size(); ++i) {
    const Trajectory& traj = trajs[i];
    for (size_t t = 0; t < traj.states.size(); ++t) {
      out << format_double(static_cast<double>(t) * traj.dt) << "," << i;
      for (int d = 0; d < n; ++d) out << "," << format_double(traj.states[t][d]);
      for (int d = 0; d < m; ++d) {
        out << ",";
        if (t < traj.controls.size()) out << format_double(traj.controls[t][d]);
      }
      out << "\n";
    }
  }
}

std::vector<Trajectory> read_trajectory_csv(const std::string& path, int state_dim,
                                            int control_dim, double dt) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty trajectory file");

  std::vector<Trajectory> trajs;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    // trailing empty control fields are dropped by getline; pad
    while (static_cast<int>(cells.size()) < 2 + state_dim + control_dim) cells.emplace_back();
    if (static_cast<int>(cells.size()) != 2 + state_dim + control_dim) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad column count");
    }
    const int robot = std::stoi(cells[1]);
    while (static_cast<int>(trajs.size()) <= robot) {
      trajs.emplace_back();
      trajs.back().dt = dt;
    }
    Eigen::VectorXd x(state_dim);
    for (int d = 0; d < state_dim; ++d) {
      try {
        x[d] = std::stod(cells[2 + d]);
      } catch (...) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad state value");
      }
    }
    trajs[robot].states.push_back(std::move(x));
    if (!cells[2 + state_dim].empty()) {
      Eigen::VectorXd u(control_dim);
      for (int d = 0; d < control_dim; ++d) {
        try {
          u[d] = std::stod(cells[2 + state_dim + d]);
        } catch (...) {
          throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad control value");
        }
      }
      trajs[robot].controls.push_back(std::move(u));
    }
  }
  for (const auto& traj : trajs) {
    if (traj.states.empty() || traj.states.size() != traj.controls.size() + 1) {
      throw std::runtime_error(path + ": inconsistent state/control counts");
    }
  }
  if (trajs.empty()) throw std::runtime_error(path + ": no trajectory rows");
  return trajs;
}

void write_iteration_csv(const std::string& path, const std::vector<IterationRecord>& log) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "iteration,ergodicity,control_cost,max_constraint_violation\n";
  for (const auto& rec : log) {
    out << rec.iteration << "," << format_double(rec.ergodicity) << ","
        << format_double(rec.control_cost) << "," << format_double(rec.max_violation)
        << "\n";
  }
}

void write_pgm(const std::string& path, const GridMap& grid) {
  if (grid.resolution.size() != 2) {
    throw std::invalid_argument("write_pgm: only 2D grids");
  }
  const int nx = grid.resolution[0];
  const int ny = grid.resolution[1];
  double lo = *std::min_element(grid.cells.begin(), grid.cells.end());
  double hi = *std::max_element(grid.cells.begin(), grid.cells.end());
  const double span = (hi > lo) ? hi - lo : 1.0;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "P2\n# row 0 = top edge of the workspace (w2 = L2), columns run along w1\n";
  out << nx << " " << ny << "\n255\n";
  for (int row = 0; row < ny; ++row) {
    const int j = ny - 1 - row;  // image rows top-down
    for (int i = 0; i < nx; ++i) {
      const double v = grid.cells[static_cast<size_t>(i) * ny + j];
      const int pix = static_cast<int>(std::lround(255.0 * (v - lo) / span));
      out << pix << (i + 1 == nx ? "" : " ");
    }
    out << "\n";
  }
}

}  // namespace erg
