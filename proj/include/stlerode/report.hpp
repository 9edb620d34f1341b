#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stlerode/verify.hpp"

namespace stlerode {

namespace detail {

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline void require_stream(const std::ofstream& out, const std::string& path) {
  if (!out) throw std::runtime_error("cannot write file: " + path);
}

}  // namespace detail

// Per-step radius table: the union-bound column uses the same split parameter
// as the tight column, so the rows compare the bounds and nothing else.
inline void write_bound_csv(const std::string& path, const BoundSchedule& b) {
  std::ofstream out(path);
  detail::require_stream(out, path);
  out << "t,r_tight,r_worst\n";
  for (std::size_t t = 0; t < b.tight.size(); ++t) {
    out << t << "," << detail::fmt(b.tight[t]) << "," << detail::fmt(b.worst[t]) << "\n";
  }
}

namespace detail {

inline nlohmann::json shape_to_json(const RegionShape& shape) {
  using nlohmann::json;
  return std::visit(
      [](const auto& s) -> json {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Disk>) {
          return {{"type", "disk"}, {"center", {s.center.x(), s.center.y()}}, {"radius", s.radius}};
        } else if constexpr (std::is_same_v<S, DiskComplement>) {
          return {{"type", "disk_complement"},
                  {"center", {s.center.x(), s.center.y()}},
                  {"radius", s.radius}};
        } else if constexpr (std::is_same_v<S, Halfspace>) {
          return {{"type", "halfspace"}, {"a", {s.a.x(), s.a.y()}}, {"b", s.b}};
        } else if constexpr (std::is_same_v<S, ConvexPolygon>) {
          json verts = json::array();
          for (const Vec2& v : s.vertices) verts.push_back({v.x(), v.y()});
          return {{"type", "polygon"}, {"vertices", verts}};
        } else if constexpr (std::is_same_v<S, PolygonComplement>) {
          json verts = json::array();
          for (const Vec2& v : s.vertices) verts.push_back({v.x(), v.y()});
          return {{"type", "polygon_complement"}, {"vertices", verts}};
        } else if constexpr (std::is_same_v<S, Ellipse>) {
          return {{"type", "ellipse"},
                  {"center", {s.center.x(), s.center.y()}},
                  {"shape", {{s.S(0, 0), s.S(0, 1)}, {s.S(1, 0), s.S(1, 1)}}},
                  {"level", s.level}};
        } else {
          return {{"type", "empty"}};
        }
      },
      shape);
}

}  // namespace detail

// Machine-readable record of what was actually verified: the eroded formula,
// every eroded region with the radius that produced it, and the deviation
// set behind those radii.
inline void write_eroded_audit(const std::string& path, const Scenario& sc,
                               const PipelineResult& pipe) {
  using nlohmann::json;
  json j;
  j["scenario"] = sc.name;
  j["formula"] = print_formula(sc.formula);
  j["formula_nnf"] = print_formula(sc.nnf);
  j["formula_eroded"] = print_formula(pipe.spec.eroded);
  j["horizon"] = sc.horizon_steps;
  j["delta"] = sc.delta;
  j["theta"] = pipe.spec.theta;
  j["bound_mode"] = sc.bound_mode;
  j["epsilon"] = pipe.bounds.epsilon;
  j["lipschitz"] = pipe.bounds.lipschitz.empty() ? 0.0 : pipe.bounds.lipschitz.front();
  j["sigma2_proxy"] = pipe.bounds.sigma2.empty() ? 0.0 : pipe.bounds.sigma2.front();
  j["deviation_level"] = pipe.dev.level;
  json pmat = json::array();
  for (int r = 0; r < pipe.P.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < pipe.P.cols(); ++c) row.push_back(pipe.P(r, c));
    pmat.push_back(row);
  }
  j["weight"] = pmat;
  if (pipe.weight_search) {
    j["weight_search"] = {{"mu_lower", pipe.weight_search->mu_lower},
                          {"mu_used", pipe.weight_search->mu_used}};
  }
  json preds = json::object();
  for (const auto& [key, region] : pipe.spec.eroded_table) {
    json entry;
    entry["region"] = detail::shape_to_json(region.shape);
    entry["coords"] = {region.coords[0], region.coords[1]};
    entry["erosion_radius"] = pipe.spec.planar_radii.at(key);
    entry["empty"] = std::holds_alternative<EmptyRegion>(region.shape);
    preds[key] = entry;
  }
  j["eroded_predicates"] = preds;
  std::ofstream out(path);
  detail::require_stream(out, path);
  out << j.dump(2) << "\n";
}

inline void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                                 const std::vector<std::string>& state_names) {
  std::ofstream out(path);
  detail::require_stream(out, path);
  out << "t";
  for (const std::string& s : state_names) out << "," << s;
  out << "\n";
  for (std::size_t t = 0; t < traj.size(); ++t) {
    out << t;
    for (int i = 0; i < traj[t].size(); ++i) out << "," << detail::fmt(traj[t][i]);
    out << "\n";
  }
}

inline std::vector<std::string> state_names(const SystemModel& model) {
  if (model.name == "double_integrator") return {"px", "py", "vx", "vy"};
  if (model.name == "unicycle") return {"px", "py", "theta"};
  std::vector<std::string> out;
  for (int i = 0; i < model.n; ++i) out.push_back("x" + std::to_string(i));
  return out;
}

// Human-readable summary with the probabilistic guarantee spelled out.
inline void write_verdict_report(const std::string& path, const Scenario& sc,
                                 const PipelineResult& pipe, const DeterministicCheck& det,
                                 const FalsifyResult* fals = nullptr) {
  std::ofstream out(path);
  detail::require_stream(out, path);
  out << "scenario: " << sc.name << "\n";
  out << "system: " << sc.system_type << "\n";
  out << "formula: " << print_formula(sc.formula) << "\n";
  out << "eroded formula: " << print_formula(pipe.spec.eroded) << "\n";
  out << "horizon steps: " << sc.horizon_steps << "\n";
  out << "delta: " << detail::fmt(sc.delta) << "  per-step theta: " << detail::fmt(sc.theta)
      << "\n";
  out << "bound mode: " << sc.bound_mode << "  epsilon: " << detail::fmt(pipe.bounds.epsilon)
      << "\n";
  out << "lipschitz bound: " << detail::fmt(pipe.bounds.lipschitz.front()) << "\n";
  out << "variance proxy per step: " << detail::fmt(pipe.bounds.sigma2.front()) << "\n";
  out << "erosion radius (max over horizon): " << detail::fmt(pipe.dev.level) << "\n";
  out << "cover: " << det.centers << " tubes over the initial set, " << det.failed_centers
      << " failed\n";
  for (const std::string& key : det.empty_predicates) {
    out << "warning: eroded predicate \"" << key << "\" is empty\n";
  }
  Verdict verdict = det.verdict;
  if (fals && fals->found) verdict = Verdict::Falsified;
  out << "verdict: " << verdict_name(verdict) << "\n";
  if (verdict == Verdict::Verified) {
    out << "guarantee: every stochastic run from the initial set satisfies the formula with "
           "probability at least "
        << detail::fmt(1.0 - sc.delta) << "\n";
  } else if (verdict == Verdict::Falsified) {
    out << "counterexample: trial " << fals->witness.trial << " (noise seed "
        << fals->witness.noise_seed << ") starting at [";
    for (int i = 0; i < fals->witness.x0.size(); ++i) {
      out << (i ? ", " : "") << detail::fmt(fals->witness.x0[i]);
    }
    out << "] violates the formula; replay with the recorded disturbances and seed\n";
  } else {
    if (fals && fals->trials_run > 0) {
      out << "falsification: no counterexample in " << fals->trials_run << " stochastic trials\n";
    }
    out << "note: the eroded check is one-directional, so its failure proves nothing about the "
           "original specification\n";
  }
}

// Deterministic SVG of the position plane: original regions, their eroded
// counterparts, the reference path, and any provided trajectories.
namespace detail {

struct SvgFrame {
  double xmin, xmax, ymin, ymax;
  double width = 840.0, height = 640.0, pad = 40.0;

  double sx(double x) const {
    return pad + (x - xmin) / (xmax - xmin) * (width - 2 * pad);
  }
  double sy(double y) const {
    return height - pad - (y - ymin) / (ymax - ymin) * (height - 2 * pad);
  }
  double scale() const { return (width - 2 * pad) / (xmax - xmin); }
};

inline void frame_include(double& xmin, double& xmax, double& ymin, double& ymax, const Vec2& p,
                          double r = 0.0) {
  xmin = std::min(xmin, p.x() - r);
  xmax = std::max(xmax, p.x() + r);
  ymin = std::min(ymin, p.y() - r);
  ymax = std::max(ymax, p.y() + r);
}

inline void frame_include_shape(double& xmin, double& xmax, double& ymin, double& ymax,
                                const RegionShape& shape) {
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Disk> || std::is_same_v<S, DiskComplement>) {
          frame_include(xmin, xmax, ymin, ymax, s.center, s.radius);
        } else if constexpr (std::is_same_v<S, ConvexPolygon>) {
          for (const Vec2& v : s.vertices) frame_include(xmin, xmax, ymin, ymax, v);
        } else if constexpr (std::is_same_v<S, PolygonComplement>) {
          for (const Vec2& v : s.vertices) frame_include(xmin, xmax, ymin, ymax, v);
        } else if constexpr (std::is_same_v<S, Ellipse>) {
          double reach = s.level * std::sqrt(Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(s.S)
                                                 .eigenvalues()
                                                 .maxCoeff());
          frame_include(xmin, xmax, ymin, ymax, s.center, reach);
        }
        // Halfspaces and empty regions do not drive the frame.
      },
      shape);
}

inline std::string svg_shape(const SvgFrame& fr, const RegionShape& shape,
                             const std::string& style) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Disk> || std::is_same_v<S, DiskComplement>) {
          os << "<circle cx=\"" << fr.sx(s.center.x()) << "\" cy=\"" << fr.sy(s.center.y())
             << "\" r=\"" << s.radius * fr.scale() << "\" " << style << "/>";
        } else if constexpr (std::is_same_v<S, ConvexPolygon>) {
          os << "<polygon points=\"";
          for (const Vec2& v : s.vertices) os << fr.sx(v.x()) << "," << fr.sy(v.y()) << " ";
          os << "\" " << style << "/>";
        } else if constexpr (std::is_same_v<S, PolygonComplement>) {
          os << "<polygon points=\"";
          for (const Vec2& v : s.vertices) os << fr.sx(v.x()) << "," << fr.sy(v.y()) << " ";
          os << "\" " << style << "/>";
        } else if constexpr (std::is_same_v<S, Halfspace>) {
          Vec2 base = s.a * (s.b / s.a.squaredNorm());
          Vec2 dir(-s.a.y(), s.a.x());
          dir.normalize();
          double reach = 4.0 * std::max(fr.xmax - fr.xmin, fr.ymax - fr.ymin);
          Vec2 p0 = base - reach * dir;
          Vec2 p1 = base + reach * dir;
          os << "<line x1=\"" << fr.sx(p0.x()) << "\" y1=\"" << fr.sy(p0.y()) << "\" x2=\""
             << fr.sx(p1.x()) << "\" y2=\"" << fr.sy(p1.y()) << "\" " << style << "/>";
        } else if constexpr (std::is_same_v<S, Ellipse>) {
          Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(s.S);
          double r0 = s.level * std::sqrt(es.eigenvalues()[0]);
          double r1 = s.level * std::sqrt(es.eigenvalues()[1]);
          Vec2 axis = es.eigenvectors().col(1);
          double angle = std::atan2(-axis.y(), axis.x()) * 180.0 / M_PI;
          os << "<ellipse cx=\"0\" cy=\"0\" rx=\"" << r1 * fr.scale() << "\" ry=\""
             << r0 * fr.scale() << "\" transform=\"translate(" << fr.sx(s.center.x()) << ","
             << fr.sy(s.center.y()) << ") rotate(" << angle << ")\" " << style << "/>";
        }
        // Empty regions draw nothing.
      },
      shape);
  return os.str();
}

inline bool is_keepout(const RegionShape& shape) {
  return std::holds_alternative<DiskComplement>(shape) ||
         std::holds_alternative<PolygonComplement>(shape);
}

}  // namespace detail

inline void write_plot_svg(const std::string& path, const Scenario& sc, const PipelineResult& pipe,
                           const std::vector<Trajectory>& trajectories) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& [name, region] : sc.predicates) {
    detail::frame_include_shape(xmin, xmax, ymin, ymax, region.shape);
  }
  for (const Trajectory& traj : trajectories) {
    for (const Eigen::VectorXd& x : traj) {
      detail::frame_include(xmin, xmax, ymin, ymax, Vec2(x[0], x[1]));
    }
  }
  if (!(xmax > xmin)) {
    xmin = -1.0;
    xmax = 1.0;
  }
  if (!(ymax > ymin)) {
    ymin = -1.0;
    ymax = 1.0;
  }
  double padx = 0.08 * (xmax - xmin), pady = 0.08 * (ymax - ymin);
  detail::SvgFrame fr{xmin - padx, xmax + padx, ymin - pady, ymax + pady};
  // Keep world aspect ratio square in screen space.
  double wx = fr.xmax - fr.xmin, wy = fr.ymax - fr.ymin;
  double view = (fr.width - 2 * fr.pad) / (fr.height - 2 * fr.pad);
  if (wx / wy < view) {
    double grow = 0.5 * (wy * view - wx);
    fr.xmin -= grow;
    fr.xmax += grow;
  } else {
    double grow = 0.5 * (wx / view - wy);
    fr.ymin -= grow;
    fr.ymax += grow;
  }

  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fr.width << "\" height=\""
     << fr.height << "\" viewBox=\"0 0 " << fr.width << " " << fr.height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (const auto& [name, region] : sc.predicates) {
    bool keep = detail::is_keepout(region.shape);
    std::string style = keep ? "fill=\"#d62728\" fill-opacity=\"0.25\" stroke=\"#d62728\" stroke-width=\"1.5\""
                             : "fill=\"#2ca02c\" fill-opacity=\"0.25\" stroke=\"#2ca02c\" stroke-width=\"1.5\"";
    os << detail::svg_shape(fr, region.shape, style) << "\n";
  }
  for (const auto& [key, region] : pipe.spec.eroded_table) {
    std::string style =
        "fill=\"none\" stroke=\"#444444\" stroke-width=\"1.2\" stroke-dasharray=\"6,4\"";
    os << detail::svg_shape(fr, region.shape, style) << "\n";
  }

  const ReferencePlan& plan = sc.system_type == "double_integrator" ? sc.di.plan : sc.uni.plan;
  int cpx = plan.column("px"), cpy = plan.column("py");
  os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (const Eigen::VectorXd& row : plan.rows) os << fr.sx(row[cpx]) << "," << fr.sy(row[cpy]) << " ";
  os << "\"/>\n";

  const char* traj_colors[] = {"#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  for (std::size_t k = 0; k < trajectories.size(); ++k) {
    os << "<polyline fill=\"none\" stroke=\"" << traj_colors[k % 5]
       << "\" stroke-width=\"1\" stroke-opacity=\"0.8\" points=\"";
    for (const Eigen::VectorXd& x : trajectories[k]) os << fr.sx(x[0]) << "," << fr.sy(x[1]) << " ";
    os << "\"/>\n";
  }

  os << "<text x=\"" << fr.pad << "\" y=\"" << 0.6 * fr.pad << "\" font-family=\"sans-serif\" "
     << "font-size=\"14\">" << sc.name
     << " (solid: regions, dashed: eroded, blue: reference)</text>\n";
  os << "</svg>\n";

  std::ofstream out(path);
  detail::require_stream(out, path);
  out << os.str();
}

}  // namespace stlerode
