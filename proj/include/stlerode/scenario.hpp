#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "stlerode/evaluate.hpp"
#include "stlerode/formula.hpp"
#include "stlerode/geometry.hpp"
#include "stlerode/systems.hpp"

namespace stlerode {

// Raised for any malformed or inconsistent scenario input. The CLI maps this
// to its invalid-input exit code, distinct from verification outcomes.
struct ScenarioError : std::runtime_error {
  explicit ScenarioError(const std::string& msg) : std::runtime_error(msg) {}
};

struct LipschitzConfig {
  std::string mode = "sampling";  // "sampling" | "linear_gain"
  int pairs = 20000;
  std::uint64_t seed = 20240915;
  Box box;  // sampling envelope, full state dimension
};

struct CoverConfig {
  double rho0 = 0.05;
  long cap = 100000;
};

struct Scenario {
  std::string name;
  std::string system_type;  // "double_integrator" | "unicycle"
  DoubleIntegratorParams di;
  UnicycleParams uni;
  Box initial_set;

  std::string formula_text;
  Formula formula;
  Formula nnf;
  int horizon_steps = 0;
  double delta = 0.0;
  double theta = 0.0;  // delta split uniformly over the horizon
  PredicateTable predicates;

  std::string weight_mode = "identity";  // "identity" | "search"
  int weight_cap = 100;
  LipschitzConfig lipschitz;
  CoverConfig cover;
  std::string bound_mode = "tight";  // erosion radius choice: "tight" | "worst"
  std::string directory;             // scenario file location, anchors relative paths
};

namespace detail {

using json = nlohmann::json;

inline const json& need(const json& j, const std::string& key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ScenarioError(where + " is missing required key \"" + key + "\"");
  return *it;
}

inline Vec2 parse_vec2(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ScenarioError(where + " must be a 2-element array");
  return Vec2(j[0].get<double>(), j[1].get<double>());
}

inline Eigen::VectorXd parse_vector(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ScenarioError(where + " must be a nonempty array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = j[i].get<double>();
  return v;
}

inline Box parse_box(const json& j, const std::string& where) {
  Box b;
  b.lo = parse_vector(need(j, "lo", where), where + ".lo");
  b.hi = parse_vector(need(j, "hi", where), where + ".hi");
  if (b.lo.size() != b.hi.size()) throw ScenarioError(where + " lo/hi lengths differ");
  for (int i = 0; i < b.lo.size(); ++i) {
    if (!(b.hi[i] >= b.lo[i])) throw ScenarioError(where + " has hi < lo in coordinate " + std::to_string(i));
  }
  return b;
}

inline void check_convex_ccw(const std::vector<Vec2>& v, const std::string& where) {
  if (v.size() < 3) throw ScenarioError(where + " needs at least 3 vertices");
  double area2 = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2& a = v[i];
    const Vec2& b = v[(i + 1) % v.size()];
    area2 += a.x() * b.y() - b.x() * a.y();
  }
  if (!(area2 > 1e-12)) throw ScenarioError(where + " vertices must be counter-clockwise");
  for (std::size_t i = 0; i < v.size(); ++i) {
    Vec2 e1 = v[(i + 1) % v.size()] - v[i];
    Vec2 e2 = v[(i + 2) % v.size()] - v[(i + 1) % v.size()];
    if (e1.x() * e2.y() - e1.y() * e2.x() < -1e-12) {
      throw ScenarioError(where + " vertices must form a convex polygon");
    }
  }
}

inline RegionShape parse_shape(const json& j, const std::string& where) {
  std::string type = need(j, "type", where).get<std::string>();
  if (type == "disk" || type == "disk_complement") {
    Vec2 c = parse_vec2(need(j, "center", where), where + ".center");
    double r = need(j, "radius", where).get<double>();
    if (!(r > 0.0)) throw ScenarioError(where + " radius must be positive");
    if (type == "disk") return Disk{c, r};
    return DiskComplement{c, r};
  }
  if (type == "halfspace") {
    Vec2 a = parse_vec2(need(j, "a", where), where + ".a");
    double b = need(j, "b", where).get<double>();
    if (a.norm() < 1e-12) throw ScenarioError(where + " normal must be nonzero");
    return Halfspace{a, b};
  }
  if (type == "polygon" || type == "polygon_complement") {
    const json& vj = need(j, "vertices", where);
    std::vector<Vec2> verts;
    for (std::size_t i = 0; i < vj.size(); ++i) {
      verts.push_back(parse_vec2(vj[i], where + ".vertices[" + std::to_string(i) + "]"));
    }
    check_convex_ccw(verts, where);
    if (type == "polygon") return ConvexPolygon{verts};
    return PolygonComplement{verts};
  }
  if (type == "regular_polygon" || type == "regular_polygon_complement") {
    Vec2 c = parse_vec2(need(j, "center", where), where + ".center");
    double r = need(j, "circumradius", where).get<double>();
    int sides = need(j, "sides", where).get<int>();
    double angle = j.value("angle_deg", 0.0) * M_PI / 180.0;
    if (!(r > 0.0)) throw ScenarioError(where + " circumradius must be positive");
    if (sides < 3) throw ScenarioError(where + " needs at least 3 sides");
    ConvexPolygon poly = regular_polygon(c, r, sides, angle);
    if (type == "regular_polygon") return poly;
    return PolygonComplement{poly.vertices};
  }
  if (type == "ellipse") {
    Vec2 c = parse_vec2(need(j, "center", where), where + ".center");
    const json& sj = need(j, "shape", where);
    if (!sj.is_array() || sj.size() != 2) throw ScenarioError(where + ".shape must be a 2x2 matrix");
    Eigen::Matrix2d S;
    for (int r = 0; r < 2; ++r) {
      if (!sj[r].is_array() || sj[r].size() != 2) throw ScenarioError(where + ".shape must be a 2x2 matrix");
      for (int cc = 0; cc < 2; ++cc) S(r, cc) = sj[r][cc].get<double>();
    }
    if ((S - S.transpose()).norm() > 1e-9) throw ScenarioError(where + ".shape must be symmetric");
    if (Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(S).eigenvalues().minCoeff() <= 0.0) {
      throw ScenarioError(where + ".shape must be positive definite");
    }
    double level = need(j, "level", where).get<double>();
    if (!(level > 0.0)) throw ScenarioError(where + " level must be positive");
    return Ellipse{c, S, level};
  }
  throw ScenarioError(where + " has unknown region type \"" + type + "\"");
}

inline Region parse_region(const json& j, int state_dim, const std::string& where) {
  Region region;
  region.shape = parse_shape(j, where);
  if (j.contains("coords")) {
    const json& cj = j.at("coords");
    if (!cj.is_array() || cj.size() != 2) throw ScenarioError(where + ".coords must list two state indices");
    region.coords = {cj[0].get<int>(), cj[1].get<int>()};
  }
  for (int c : region.coords) {
    if (c < 0 || c >= state_dim) {
      throw ScenarioError(where + " references state coordinate " + std::to_string(c) +
                          " outside dimension " + std::to_string(state_dim));
    }
  }
  if (region.coords[0] == region.coords[1]) throw ScenarioError(where + ".coords must be distinct");
  return region;
}

inline void collect_predicates(const Formula& f, std::set<std::string>& names) {
  if (f->kind == NodeKind::Predicate) names.insert(f->name);
  if (f->left) collect_predicates(f->left, names);
  if (f->right) collect_predicates(f->right, names);
}

}  // namespace detail

inline SystemModel build_model(const Scenario& sc) {
  if (sc.system_type == "double_integrator") return double_integrator_closed_loop(sc.di);
  if (sc.system_type == "unicycle") return unicycle_closed_loop(sc.uni);
  throw ScenarioError("unknown system type \"" + sc.system_type + "\"");
}

inline Scenario load_scenario(const std::string& path) {
  using detail::json;
  using detail::need;

  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("scenario is not valid JSON: ") + e.what());
  }

  Scenario sc;
  sc.directory = std::filesystem::path(path).parent_path().string();
  if (sc.directory.empty()) sc.directory = ".";

  try {
    sc.name = need(j, "name", "scenario").get<std::string>();

    const json& sys = need(j, "system", "scenario");
    sc.system_type = need(sys, "type", "system").get<std::string>();
    std::string ref = need(sys, "reference", "system").get<std::string>();
    std::string ref_path = (std::filesystem::path(sc.directory) / ref).string();
    int state_dim = 0;
    if (sc.system_type == "double_integrator") {
      sc.di.dt = sys.value("dt", sc.di.dt);
      sc.di.mass = sys.value("mass", sc.di.mass);
      sc.di.sigma_scale = sys.value("sigma_scale", sc.di.sigma_scale);
      sc.di.dist_bound = sys.value("dist_bound", sc.di.dist_bound);
      if (sys.contains("gains")) {
        const json& g = sys.at("gains");
        if (!g.is_array() || g.size() != 2) throw ScenarioError("system.gains must be a 2x4 matrix");
        for (int r = 0; r < 2; ++r) {
          if (!g[r].is_array() || g[r].size() != 4) throw ScenarioError("system.gains must be a 2x4 matrix");
          for (int c = 0; c < 4; ++c) sc.di.K(r, c) = g[r][c].get<double>();
        }
      }
      sc.di.plan = load_reference(ref_path);
      state_dim = 4;
    } else if (sc.system_type == "unicycle") {
      sc.uni.dt = sys.value("dt", sc.uni.dt);
      sc.uni.sigma_scale = sys.value("sigma_scale", sc.uni.sigma_scale);
      sc.uni.dist_bound = sys.value("dist_bound", sc.uni.dist_bound);
      if (sys.contains("gains")) {
        const json& g = sys.at("gains");
        sc.uni.kx = need(g, "kx", "system.gains").get<double>();
        sc.uni.ky = need(g, "ky", "system.gains").get<double>();
        sc.uni.ktheta = need(g, "ktheta", "system.gains").get<double>();
      }
      sc.uni.plan = load_reference(ref_path);
      state_dim = 3;
    } else {
      throw ScenarioError("unknown system type \"" + sc.system_type + "\"");
    }

    sc.initial_set = detail::parse_box(need(j, "initial_set", "scenario"), "initial_set");
    if (sc.initial_set.dim() != state_dim) {
      throw ScenarioError("initial_set dimension does not match the system state dimension");
    }

    const json& spec = need(j, "spec", "scenario");
    sc.formula_text = need(spec, "formula", "spec").get<std::string>();
    try {
      sc.formula = parse_formula(sc.formula_text);
    } catch (const ParseError& e) {
      throw ScenarioError(std::string("spec.formula does not parse: ") + e.what());
    }
    sc.nnf = to_nnf(sc.formula);
    sc.horizon_steps = horizon(sc.formula);
    if (sc.horizon_steps < 1) throw ScenarioError("spec.formula must have a positive horizon");
    sc.delta = need(spec, "delta", "spec").get<double>();
    if (!(sc.delta > 0.0 && sc.delta < 1.0)) throw ScenarioError("spec.delta must lie in (0,1)");
    sc.theta = sc.delta / sc.horizon_steps;

    const json& preds = need(spec, "predicates", "spec");
    for (auto it = preds.begin(); it != preds.end(); ++it) {
      sc.predicates.emplace(it.key(), detail::parse_region(it.value(), state_dim,
                                                           "predicate \"" + it.key() + "\""));
    }
    std::set<std::string> used;
    detail::collect_predicates(sc.formula, used);
    for (const std::string& name : used) {
      if (!sc.predicates.count(name)) {
        throw ScenarioError("formula references undefined predicate \"" + name + "\"");
      }
    }
    if (used.empty()) throw ScenarioError("formula references no predicates");

    int plan_len = sc.system_type == "double_integrator" ? sc.di.plan.length() : sc.uni.plan.length();
    if (plan_len < sc.horizon_steps) {
      throw ScenarioError("reference plan has " + std::to_string(plan_len) +
                          " rows but the formula horizon needs " + std::to_string(sc.horizon_steps));
    }

    if (j.contains("analysis")) {
      const json& an = j.at("analysis");
      sc.weight_mode = an.value("weights", sc.weight_mode);
      sc.weight_cap = an.value("weight_iteration_cap", sc.weight_cap);
      if (sc.weight_mode != "identity" && sc.weight_mode != "search") {
        throw ScenarioError("analysis.weights must be \"identity\" or \"search\"");
      }
      if (sc.weight_mode == "search" && sc.system_type != "double_integrator") {
        throw ScenarioError("analysis.weights=search needs a linear closed loop");
      }
      if (an.contains("lipschitz")) {
        const json& lip = an.at("lipschitz");
        sc.lipschitz.mode = lip.value("mode", sc.lipschitz.mode);
        sc.lipschitz.pairs = lip.value("pairs", sc.lipschitz.pairs);
        sc.lipschitz.seed = lip.value("seed", sc.lipschitz.seed);
        if (sc.lipschitz.mode != "sampling" && sc.lipschitz.mode != "linear_gain") {
          throw ScenarioError("analysis.lipschitz.mode must be \"sampling\" or \"linear_gain\"");
        }
        if (sc.lipschitz.mode == "linear_gain" && sc.system_type != "double_integrator") {
          throw ScenarioError("analysis.lipschitz.mode=linear_gain needs a linear closed loop");
        }
        if (lip.contains("box")) {
          sc.lipschitz.box = detail::parse_box(lip.at("box"), "analysis.lipschitz.box");
          if (sc.lipschitz.box.dim() != state_dim) {
            throw ScenarioError("analysis.lipschitz.box dimension does not match the state dimension");
          }
        }
      }
      if (sc.lipschitz.mode == "sampling" && sc.lipschitz.box.dim() == 0) {
        throw ScenarioError("analysis.lipschitz.mode=sampling needs analysis.lipschitz.box");
      }
      if (an.contains("cover")) {
        const json& cov = an.at("cover");
        sc.cover.rho0 = cov.value("rho0", sc.cover.rho0);
        sc.cover.cap = cov.value("cap", sc.cover.cap);
        if (!(sc.cover.rho0 > 0.0)) throw ScenarioError("analysis.cover.rho0 must be positive");
        if (sc.cover.cap < 1) throw ScenarioError("analysis.cover.cap must be positive");
      }
      sc.bound_mode = an.value("bound", sc.bound_mode);
      if (sc.bound_mode != "tight" && sc.bound_mode != "worst") {
        throw ScenarioError("analysis.bound must be \"tight\" or \"worst\"");
      }
    } else if (sc.lipschitz.box.dim() == 0) {
      throw ScenarioError("scenario needs analysis.lipschitz.box for the default sampling mode");
    }
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("scenario field has the wrong type: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what());
  } catch (const std::out_of_range& e) {
    throw ScenarioError(e.what());
  }
  return sc;
}

}  // namespace stlerode
