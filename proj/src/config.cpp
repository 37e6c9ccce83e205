#include "erg/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace erg {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw std::invalid_argument("config: " + where + ": " + what);
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) fail(where, "unknown key '" + key + "'");
  }
}

const json& require(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) fail(where, std::string("missing key '") + key + "'");
  return j.at(key);
}

std::vector<double> as_doubles(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) fail(where, "expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Eigen::VectorXd as_vector(const json& j, const std::string& where) {
  const auto v = as_doubles(j, where);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<long>(v.size()));
}

Bounds parse_bounds(const json& j, const std::string& where, int dim) {
  check_keys(j, where, {"lo", "hi"});
  Bounds b;
  b.lo = as_vector(require(j, where, "lo"), where + ".lo");
  b.hi = as_vector(require(j, where, "hi"), where + ".hi");
  if (b.lo.size() != dim || b.hi.size() != dim) fail(where, "bound dimension mismatch");
  if ((b.lo.array() > b.hi.array()).any()) fail(where, "lo exceeds hi");
  return b;
}

InfoMap parse_map(const json& j, const Workspace& ws, const std::string& base_dir) {
  check_keys(j, "map", {"type", "components", "resolution", "cells", "points", "weights",
                        "points_file"});
  const std::string type = require(j, "map", "type").get<std::string>();
  if (type == "gmm") {
    GaussianMixture gmm;
    for (const auto& c : require(j, "map", "components")) {
      check_keys(c, "map.components[]", {"weight", "mean", "sigma"});
      GaussianMixture::Component comp;
      comp.weight = require(c, "map.components[]", "weight").get<double>();
      comp.mean = as_vector(require(c, "map.components[]", "mean"), "map mean");
      comp.sigma = as_vector(require(c, "map.components[]", "sigma"), "map sigma");
      gmm.components.push_back(std::move(comp));
    }
    return InfoMap(ws, std::move(gmm));
  }
  if (type == "grid") {
    GridMap grid;
    for (const auto& r : require(j, "map", "resolution")) grid.resolution.push_back(r.get<int>());
    grid.cells = as_doubles(require(j, "map", "cells"), "map.cells");
    return InfoMap(ws, std::move(grid));
  }
  if (type == "cloud") {
    DeltaCloud cloud;
    if (j.contains("points_file")) {
      const std::string file =
          (std::filesystem::path(base_dir) / j.at("points_file").get<std::string>()).string();
      std::ifstream in(file);
      if (!in) fail("map.points_file", "cannot open " + file);
      double x, y, z;
      while (in >> x >> y >> z) {
        Eigen::VectorXd p(3);
        p << x, y, z;
        cloud.points.push_back(std::move(p));
      }
    } else {
      for (const auto& p : require(j, "map", "points")) {
        cloud.points.push_back(as_vector(p, "map.points[]"));
      }
    }
    if (j.contains("weights")) cloud.weights = as_doubles(j.at("weights"), "map.weights");
    return InfoMap(ws, std::move(cloud));
  }
  fail("map.type", "must be gmm, grid, or cloud");
}

FootprintModel parse_footprint(const json& j) {
  check_keys(j, "footprint", {"variant", "k_h", "radius", "k_d", "samples", "axis"});
  FootprintModel fp;
  const std::string variant = require(j, "footprint", "variant").get<std::string>();
  if (variant == "point") {
    fp.kind = FootprintModel::Kind::Point;
  } else if (variant == "fixed_disk") {
    fp.kind = FootprintModel::Kind::FixedDisk;
  } else if (variant == "altitude_disk") {
    fp.kind = FootprintModel::Kind::AltitudeDisk;
  } else if (variant == "cone") {
    fp.kind = FootprintModel::Kind::Cone;
  } else {
    fail("footprint.variant", "must be point, fixed_disk, altitude_disk, or cone");
  }
  if (j.contains("k_h")) fp.k_h = j.at("k_h").get<double>();
  if (j.contains("radius")) fp.radius = j.at("radius").get<double>();
  if (j.contains("k_d")) fp.k_d = j.at("k_d").get<double>();
  if (j.contains("samples")) fp.target_samples = j.at("samples").get<int>();
  if (j.contains("axis")) {
    const std::string axis = j.at("axis").get<std::string>();
    if (axis == "down") {
      fp.axis = FootprintModel::AxisPolicy::Down;
    } else if (axis == "centroid") {
      fp.axis = FootprintModel::AxisPolicy::Centroid;
    } else {
      fail("footprint.axis", "must be down or centroid");
    }
  }
  if (!(fp.k_h > 0.0)) fail("footprint.k_h", "must be positive");
  return fp;
}

RobotSpec parse_robot(const json& j, int workspace_dim) {
  check_keys(j, "robots[]",
             {"dynamics", "state_dim", "x0", "control_bounds", "state_bounds", "projection"});
  RobotSpec robot;
  const std::string dyn = require(j, "robots[]", "dynamics").get<std::string>();
  if (dyn == "single_integrator") {
    robot.dynamics.kind = DynamicsModel::Kind::SingleIntegrator;
  } else if (dyn == "double_integrator") {
    robot.dynamics.kind = DynamicsModel::Kind::DoubleIntegrator;
  } else {
    fail("robots[].dynamics", "must be single_integrator or double_integrator");
  }
  robot.dynamics.state_dim = require(j, "robots[]", "state_dim").get<int>();
  robot.x0 = as_vector(require(j, "robots[]", "x0"), "robots[].x0");
  if (j.contains("control_bounds")) {
    robot.control_bounds =
        parse_bounds(j.at("control_bounds"), "robots[].control_bounds",
                     robot.dynamics.control_dim());
  }
  if (j.contains("state_bounds")) {
    robot.state_bounds =
        parse_bounds(j.at("state_bounds"), "robots[].state_bounds", robot.dynamics.state_dim);
  }
  const json& proj = require(j, "robots[]", "projection");
  check_keys(proj, "robots[].projection", {"position", "height"});
  for (const auto& p : require(proj, "robots[].projection", "position")) {
    robot.projection.position.push_back(p.get<int>());
  }
  if (static_cast<int>(robot.projection.position.size()) != workspace_dim) {
    fail("robots[].projection.position", "must match the workspace dimension");
  }
  if (proj.contains("height")) robot.projection.height_index = proj.at("height").get<int>();
  return robot;
}

}  // namespace

uint64_t fnv1a64(const std::string& text) {
  uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  check_keys(j, "(root)",
             {"workspace", "basis", "map", "cloud", "footprint", "robots", "horizon",
              "control_weight", "constraints", "solver", "quadrature", "seed"});

  RunConfig cfg;
  const json& jw = require(j, "(root)", "workspace");
  check_keys(jw, "workspace", {"lengths"});
  Workspace ws(as_doubles(require(jw, "workspace", "lengths"), "workspace.lengths"));

  const json& jb = require(j, "(root)", "basis");
  check_keys(jb, "basis", {"counts"});
  std::vector<int> counts;
  for (const auto& c : require(jb, "basis", "counts")) counts.push_back(c.get<int>());
  auto basis = std::make_shared<SpectralBasis>(ws, counts);

  cfg.spec.workspace = ws;
  cfg.spec.basis = basis;
  cfg.spec.footprint = parse_footprint(require(j, "(root)", "footprint"));

  if (j.contains("quadrature")) cfg.quadrature = j.at("quadrature").get<int>();

  if (j.contains("cloud")) {
    const json& jc = j.at("cloud");
    check_keys(jc, "cloud", {"file", "hit_radius"});
    const std::string file =
        (std::filesystem::path(base_dir) / require(jc, "cloud", "file").get<std::string>())
            .string();
    cfg.spec.cloud = std::make_shared<PointCloud>(load_cloud(file, ws));
    if (jc.contains("hit_radius")) cfg.spec.hit_radius = jc.at("hit_radius").get<double>();
    // phi lives on the cloud points unless the map says otherwise
    if (j.contains("map")) {
      cfg.map = normalize_map(parse_map(j.at("map"), ws, base_dir), cfg.quadrature);
    } else {
      DeltaCloud dc;
      for (const auto& p : cfg.spec.cloud->points) dc.points.push_back(p);
      cfg.map = normalize_map(InfoMap(ws, std::move(dc)));
    }
  } else {
    cfg.map = normalize_map(parse_map(require(j, "(root)", "map"), ws, base_dir),
                            cfg.quadrature);
  }
  cfg.spec.phi = map_coeffs(*cfg.map, *basis, cfg.quadrature);

  const json& jh = require(j, "(root)", "horizon");
  check_keys(jh, "horizon", {"steps", "dt"});
  cfg.spec.steps = require(jh, "horizon", "steps").get<int>();
  cfg.spec.dt = require(jh, "horizon", "dt").get<double>();

  for (const auto& r : require(j, "(root)", "robots")) {
    cfg.spec.robots.push_back(parse_robot(r, ws.dim()));
  }
  if (cfg.spec.robots.empty()) fail("robots", "need at least one robot");

  const int m = cfg.spec.robots[0].dynamics.control_dim();
  const json& jr = require(j, "(root)", "control_weight");
  if (jr.is_number()) {
    cfg.spec.control_weight = Eigen::VectorXd::Constant(m, jr.get<double>());
  } else {
    cfg.spec.control_weight = as_vector(jr, "control_weight");
  }

  if (j.contains("constraints")) {
    const json& jc = j.at("constraints");
    check_keys(jc, "constraints", {"min_robot_distance", "surface_range"});
    if (jc.contains("min_robot_distance")) {
      cfg.spec.constraints.min_robot_distance = jc.at("min_robot_distance").get<double>();
    }
    if (jc.contains("surface_range")) {
      const json& js = jc.at("surface_range");
      check_keys(js, "constraints.surface_range", {"min", "max"});
      cfg.spec.constraints.surface_range =
          SurfaceRange{require(js, "surface_range", "min").get<double>(),
                       require(js, "surface_range", "max").get<double>()};
    }
  }

  if (j.contains("solver")) {
    const json& js = j.at("solver");
    check_keys(js, "solver",
               {"max_outer", "max_inner", "mu0", "mu_growth", "mu_max", "grad_tol",
                "viol_tol", "lbfgs_memory", "init_amplitude"});
    SolverSettings& s = cfg.spec.solver;
    if (js.contains("max_outer")) s.max_outer = js.at("max_outer").get<int>();
    if (js.contains("max_inner")) s.max_inner = js.at("max_inner").get<int>();
    if (js.contains("mu0")) s.mu0 = js.at("mu0").get<double>();
    if (js.contains("mu_growth")) s.mu_growth = js.at("mu_growth").get<double>();
    if (js.contains("mu_max")) s.mu_max = js.at("mu_max").get<double>();
    if (js.contains("grad_tol")) s.grad_tol = js.at("grad_tol").get<double>();
    if (js.contains("viol_tol")) s.viol_tol = js.at("viol_tol").get<double>();
    if (js.contains("lbfgs_memory")) s.lbfgs_memory = js.at("lbfgs_memory").get<int>();
    if (js.contains("init_amplitude")) s.init_amplitude = js.at("init_amplitude").get<double>();
  }

  if (j.contains("seed")) cfg.spec.seed = j.at("seed").get<uint64_t>();
  cfg.canonical = j.dump();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), std::filesystem::path(path).parent_path().string());
}

}  // namespace erg
