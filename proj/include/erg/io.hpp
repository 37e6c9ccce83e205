#pragma once

#include <string>
#include <vector>

#include "erg/dynamics.hpp"
#include "erg/infomap.hpp"
#include "erg/optimize.hpp"

namespace erg {

// Shortest-round-trip formatting so identical doubles always print the
// same bytes.
std::string format_double(double v);

// Columns: t, robot_id, x1..xn, u1..um (controls blank on the final row).
void write_trajectory_csv(const std::string& path, const std::vector<Trajectory>& trajs);
std::vector<Trajectory> read_trajectory_csv(const std::string& path, int state_dim,
                                            int control_dim, double dt);

void write_iteration_csv(const std::string& path, const std::vector<IterationRecord>& log);

// P2 PGM, maxval 255, min-max scaled. Row 0 is the w2 = L2 edge of the
// workspace (image rows run top-down); only 2D grids are supported.
void write_pgm(const std::string& path, const GridMap& grid);

}  // namespace erg
