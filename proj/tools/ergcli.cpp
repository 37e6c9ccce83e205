#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

#include "erg/config.hpp"
#include "erg/io.hpp"
#include "erg/metric.hpp"
#include "erg/surface3d.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<uint64_t> seed;
  int threads = 0;
};

void apply_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

// Mean sampled-footprint coefficients of the final trajectories.
erg::CoeffVector final_coeffs(const erg::ProblemSpec& spec,
                              const std::vector<erg::Trajectory>& trajs) {
  std::vector<erg::CoeffVector> per_robot;
  if (spec.surface_mode()) {
    for (size_t i = 0; i < trajs.size(); ++i) {
      const auto frozen =
          erg::cast_rays(*spec.cloud, spec.footprint, trajs[i].states, spec.steps,
                         spec.robots[i].projection, spec.hit_radius);
      per_robot.push_back(erg::footprint_coeffs(
          erg::surface_samples(*spec.cloud, spec.footprint, frozen, trajs[i].states,
                               spec.steps, spec.robots[i].projection, spec.workspace),
          *spec.basis));
    }
  } else {
    const auto pattern = erg::sample_pattern(spec.footprint);
    for (size_t i = 0; i < trajs.size(); ++i) {
      per_robot.push_back(erg::footprint_coeffs(
          erg::realize_samples(spec.footprint, pattern, trajs[i].states, spec.steps,
                               spec.robots[i].projection, spec.workspace),
          *spec.basis));
    }
  }
  return erg::multi_robot_coeffs(per_robot);
}

int run_plan(erg::RunConfig cfg, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const auto t0 = std::chrono::steady_clock::now();
  const erg::SolveResult result = erg::solve(cfg.spec);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (result.trajectories.empty()) {
    std::cerr << "error: " << result.message << "\n";
    return 3;
  }

  erg::write_trajectory_csv((out_dir / "trajectory.csv").string(), result.trajectories);
  erg::write_iteration_csv((out_dir / "iterations.csv").string(), result.log);
  if (cfg.spec.workspace.dim() == 2) {
    const auto cbar = final_coeffs(cfg.spec, result.trajectories);
    erg::write_pgm((out_dir / "coverage.pgm").string(),
                   erg::reconstruct(cbar, {100, 100}));
    erg::write_pgm((out_dir / "map_recon.pgm").string(),
                   erg::reconstruct(cfg.spec.phi, {100, 100}));
  }

  json summary;
  summary["ergodicity"] = result.ergodicity;
  summary["control_cost"] = result.control_cost;
  summary["violation"] = result.max_violation;
  summary["wall_time"] = wall;
  summary["seed"] = cfg.spec.seed;
  summary["config_hash"] = erg::fnv1a64(cfg.canonical + "#" + std::to_string(cfg.spec.seed));
  summary["success"] = result.success;
  std::ofstream(out_dir / "summary.json") << summary.dump(2) << "\n";
  std::cout << summary.dump(2) << "\n";
  return 0;
}

struct SweepPoint {
  std::string label;
  erg::ProblemSpec spec;
};

std::vector<SweepPoint> expand_sweep(const erg::RunConfig& cfg, const std::string& sweep) {
  const auto eq = sweep.find('=');
  if (eq == std::string::npos) {
    throw std::invalid_argument("sweep: expected VAR=v1,v2,...");
  }
  const std::string var = sweep.substr(0, eq);
  std::vector<std::string> vals;
  std::stringstream ss(sweep.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ',')) vals.push_back(item);
  if (vals.empty()) throw std::invalid_argument("sweep: no values");

  std::vector<SweepPoint> out;
  for (const std::string& v : vals) {
    SweepPoint pt{var + "_" + v, cfg.spec};
    if (var == "horizon") {
      const double horizon = std::stod(v);
      pt.spec.steps = static_cast<int>(std::lround(horizon / pt.spec.dt));
      if (pt.spec.steps < 1) throw std::invalid_argument("sweep: horizon shorter than dt");
    } else if (var == "k_h") {
      pt.spec.footprint.k_h = std::stod(v);
    } else if (var == "fixed_radius") {
      pt.spec.footprint.kind = erg::FootprintModel::Kind::FixedDisk;
      pt.spec.footprint.radius = std::stod(v);
    } else if (var == "mode") {
      if (v == "dynamic") {
        // as configured
      } else if (v == "point") {
        pt.spec.footprint.kind = erg::FootprintModel::Kind::Point;
      } else if (v.rfind("fixed:", 0) == 0) {
        pt.spec.footprint.kind = erg::FootprintModel::Kind::FixedDisk;
        pt.spec.footprint.radius = std::stod(v.substr(6));
      } else {
        throw std::invalid_argument("sweep: mode must be dynamic, point, or fixed:R");
      }
      pt.label = "mode_" + v;
      std::replace(pt.label.begin(), pt.label.end(), ':', '_');
    } else {
      throw std::invalid_argument("sweep: variable must be horizon, k_h, fixed_radius, or mode");
    }
    out.push_back(std::move(pt));
  }
  return out;
}

int run_sweep(const erg::RunConfig& cfg, const std::string& sweep, const fs::path& out_dir,
              int threads) {
  const auto points = expand_sweep(cfg, sweep);
  fs::create_directories(out_dir);

  struct Row {
    std::string label;
    double ergodicity = std::numeric_limits<double>::quiet_NaN();
    bool ok = false;
  };
  std::vector<Row> rows(points.size());
  std::atomic<size_t> next{0};
  std::mutex io_mutex;

  const int workers =
      std::max(1, std::min<int>(threads > 0 ? threads : 1, static_cast<int>(points.size())));
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < points.size(); i = next.fetch_add(1)) {
      rows[i].label = points[i].label;
      try {
        const fs::path run_dir = out_dir / points[i].label;
        fs::create_directories(run_dir);
        const erg::SolveResult result = erg::solve(points[i].spec);
        if (result.trajectories.empty()) throw std::runtime_error(result.message);
        erg::write_trajectory_csv((run_dir / "trajectory.csv").string(), result.trajectories);
        erg::write_iteration_csv((run_dir / "iterations.csv").string(), result.log);
        rows[i].ergodicity = result.ergodicity;
        rows[i].ok = true;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(io_mutex);
        std::cerr << "sweep " << points[i].label << " failed: " << e.what() << "\n";
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    apply_threads(1);  // run-level parallelism instead of kernel-level
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::ofstream cmp(out_dir / "comparison.csv");
  cmp << "value,final_ergodicity\n";
  bool all_ok = true;
  for (const auto& row : rows) {
    cmp << row.label << "," << (row.ok ? erg::format_double(row.ergodicity) : "nan") << "\n";
    all_ok = all_ok && row.ok;
  }
  return all_ok ? 0 : 3;
}

int run_eval(const erg::RunConfig& cfg, const std::string& traj_path) {
  const auto& spec = cfg.spec;
  const int n = spec.robots[0].dynamics.state_dim;
  const int m = spec.robots[0].dynamics.control_dim();
  const auto trajs = erg::read_trajectory_csv(traj_path, n, m, spec.dt);
  if (trajs.size() != spec.robots.size()) {
    throw std::invalid_argument("eval: robot count mismatch between config and trajectory");
  }
  for (const auto& traj : trajs) {
    if (traj.num_steps() != spec.steps) {
      throw std::invalid_argument("eval: trajectory step count mismatch");
    }
  }

  const auto cbar = final_coeffs(spec, trajs);
  const double footprint_erg = erg::ergodicity(cbar, spec.phi);

  std::vector<erg::CoeffVector> point_per_robot;
  for (size_t i = 0; i < trajs.size(); ++i) {
    point_per_robot.push_back(erg::point_coeffs(trajs[i].states, spec.steps,
                                                spec.robots[i].projection, *spec.basis));
  }
  const double point_erg =
      erg::ergodicity(erg::multi_robot_coeffs(point_per_robot), spec.phi);

  std::vector<erg::FrozenRays> frozen;
  if (spec.surface_mode()) {
    for (size_t i = 0; i < trajs.size(); ++i) {
      frozen.push_back(erg::cast_rays(*spec.cloud, spec.footprint, trajs[i].states,
                                      spec.steps, spec.robots[i].projection,
                                      spec.hit_radius));
    }
  }
  const auto cv = erg::constraint_eval(spec, trajs, frozen);

  double control_cost = 0.0;
  for (const auto& traj : trajs) {
    for (const auto& u : traj.controls) {
      control_cost += spec.dt * (spec.control_weight.array() * u.array().square()).sum();
    }
  }

  json out;
  out["ergodicity"] = footprint_erg;
  out["point_ergodicity"] = point_erg;
  out["control_cost"] = control_cost;
  out["violation"] = cv.max_violation();
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ergodic trajectory optimization with dynamic sensor footprints"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string sweep_expr;
  std::string traj_path;

  auto add_common = [&](CLI::App* cmd, bool needs_out) {
    cmd->add_option("--config", opts.config_path, "run configuration (JSON)")->required();
    if (needs_out) cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "override the config seed");
    cmd->add_option("--threads", opts.threads, "worker threads (0 = library default)");
  };

  CLI::App* plan = app.add_subcommand("plan", "solve one instance and write artifacts");
  add_common(plan, true);
  CLI::App* sweep = app.add_subcommand("sweep", "solve a family of instances");
  add_common(sweep, true);
  sweep->add_option("--sweep", sweep_expr, "VAR=v1,v2,... (horizon, k_h, fixed_radius, mode)")
      ->required();
  CLI::App* eval = app.add_subcommand("eval", "recompute metrics for a trajectory CSV");
  add_common(eval, false);
  eval->add_option("--trajectory", traj_path, "trajectory CSV from plan")->required();
  CLI::App* version = app.add_subcommand("version", "print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (version->parsed()) {
    std::cout << "ergcli " << kVersion << "\n";
    return 0;
  }

  try {
    apply_threads(opts.threads);
    erg::RunConfig cfg = erg::load_run_config(opts.config_path);
    if (opts.seed) cfg.spec.seed = *opts.seed;
    if (plan->parsed()) return run_plan(std::move(cfg), opts.out_dir);
    if (sweep->parsed()) return run_sweep(cfg, sweep_expr, opts.out_dir, opts.threads);
    return run_eval(cfg, traj_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
