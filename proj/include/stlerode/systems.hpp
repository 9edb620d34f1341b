#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stlerode/evaluate.hpp"
#include "stlerode/rng.hpp"

namespace stlerode {

struct Box {
  Eigen::VectorXd lo, hi;

  int dim() const { return static_cast<int>(lo.size()); }

  bool contains(const Eigen::VectorXd& p, double tol = 1e-9) const {
    for (int i = 0; i < dim(); ++i) {
      if (p[i] < lo[i] - tol || p[i] > hi[i] + tol) return false;
    }
    return true;
  }

  Eigen::VectorXd center() const { return 0.5 * (lo + hi); }

  std::vector<Eigen::VectorXd> corners() const {
    std::vector<Eigen::VectorXd> out;
    int d = dim();
    for (int mask = 0; mask < (1 << d); ++mask) {
      Eigen::VectorXd c(d);
      for (int i = 0; i < d; ++i) c[i] = (mask >> i & 1) ? hi[i] : lo[i];
      out.push_back(c);
    }
    return out;
  }
};

// Column-labelled per-step reference data loaded from CSV.
struct ReferencePlan {
  std::vector<std::string> columns;
  std::vector<Eigen::VectorXd> rows;

  int length() const { return static_cast<int>(rows.size()); }

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return static_cast<int>(i);
    }
    throw std::invalid_argument("reference plan lacks column: " + name);
  }
};

inline ReferencePlan load_reference(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open reference file: " + path);
  ReferencePlan plan;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty reference file: " + path);
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) plan.columns.push_back(cell);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ls(line);
    Eigen::VectorXd row(plan.columns.size());
    int i = 0;
    while (std::getline(ls, cell, ',')) {
      if (i < row.size()) {
        try {
          row[i] = std::stod(cell);
        } catch (const std::exception&) {
          throw std::runtime_error("malformed reference row " + std::to_string(lineno) + " in " + path);
        }
      }
      ++i;
    }
    if (i != row.size()) {
      throw std::runtime_error("reference row " + std::to_string(lineno) + " has " +
                               std::to_string(i) + " fields, expected " +
                               std::to_string(row.size()));
    }
    plan.rows.push_back(std::move(row));
  }
  return plan;
}

struct SystemModel {
  std::string name;
  int n = 0;  // state dimension
  int m = 0;  // disturbance dimension
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&, int)> f;
  Eigen::MatrixXd Sigma;      // process noise covariance
  Box D;                      // disturbance box
  Eigen::MatrixXd dist_gain;  // G with f(x,d,t) - f(x,d',t) = G (d - d'), exact for both built-ins

  Eigen::MatrixXd sigma_sqrt() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Sigma);
    if (es.eigenvalues().minCoeff() < -1e-12) {
      throw std::invalid_argument("noise covariance must be positive semidefinite");
    }
    return es.operatorSqrt();
  }
};

inline Eigen::VectorXd det_step(const SystemModel& model, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& d, int t) {
  if (!model.D.contains(d)) throw std::invalid_argument("disturbance outside D");
  return model.f(x, d, t);
}

inline Eigen::VectorXd stoch_step(const SystemModel& model, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& d, int t, Rng& rng,
                                  const Eigen::MatrixXd& sigma_sqrt) {
  return det_step(model, x, d, t) + sigma_sqrt * rng.normal_vector(model.n);
}

enum class SimMode { Det, Stoch };

// d_seq has one entry per step (T entries); an empty d_seq means the center
// of D at every step.
inline Trajectory simulate(const SystemModel& model, const Eigen::VectorXd& x0,
                           const std::vector<Eigen::VectorXd>& d_seq, int T, SimMode mode,
                           std::uint64_t seed = 0) {
  Trajectory traj;
  traj.reserve(T + 1);
  traj.push_back(x0);
  Eigen::VectorXd d_center = model.D.center();
  Eigen::MatrixXd ssqrt;
  Rng rng(seed);
  if (mode == SimMode::Stoch) {
    ssqrt = model.sigma_sqrt();
    rng = Rng::stream(seed, 0);
  }
  for (int t = 0; t < T; ++t) {
    const Eigen::VectorXd& d = d_seq.empty() ? d_center : d_seq.at(t);
    if (mode == SimMode::Det) {
      traj.push_back(det_step(model, traj.back(), d, t));
    } else {
      traj.push_back(stoch_step(model, traj.back(), d, t, rng, ssqrt));
    }
  }
  return traj;
}

struct DoubleIntegratorParams {
  double dt = 0.01;
  double mass = 0.1;
  Eigen::Matrix<double, 2, 4> K = (Eigen::Matrix<double, 2, 4>() << -2, 0, -1, 0,
                                   0, -2, 0, -1).finished();
  double sigma_scale = 0.04;           // Sigma = dt * sigma_scale * I_4
  double dist_bound = 0.1;             // D = [-b, b]^2
  ReferencePlan plan;                  // columns t, px, py, vx, vy, ux, uy
};

// Planar double integrator under reference tracking: state (px, py, vx, vy),
// x' = A x + B (u_ref + K (x - x_ref) + d).
inline SystemModel double_integrator_closed_loop(const DoubleIntegratorParams& params) {
  Eigen::Matrix4d A = Eigen::Matrix4d::Identity();
  A(0, 2) = A(1, 3) = params.dt;
  Eigen::Matrix<double, 4, 2> B = Eigen::Matrix<double, 4, 2>::Zero();
  B(2, 0) = B(3, 1) = params.dt / params.mass;

  if (params.plan.length() == 0) throw std::invalid_argument("double integrator needs a reference plan");
  int cpx = params.plan.column("px");
  int cpy = params.plan.column("py");
  int cvx = params.plan.column("vx");
  int cvy = params.plan.column("vy");
  int cux = params.plan.column("ux");
  int cuy = params.plan.column("uy");
  auto plan = params.plan;
  auto K = params.K;

  SystemModel model;
  model.name = "double_integrator";
  model.n = 4;
  model.m = 2;
  model.Sigma = params.dt * params.sigma_scale * Eigen::Matrix4d::Identity();
  model.D.lo = Eigen::Vector2d(-params.dist_bound, -params.dist_bound);
  model.D.hi = Eigen::Vector2d(params.dist_bound, params.dist_bound);
  model.dist_gain = B;
  model.f = [A, B, K, plan, cpx, cpy, cvx, cvy, cux, cuy](const Eigen::VectorXd& x,
                                                          const Eigen::VectorXd& d, int t) {
    const Eigen::VectorXd& row = plan.rows.at(t);
    Eigen::Vector4d xref(row[cpx], row[cpy], row[cvx], row[cvy]);
    Eigen::Vector2d uref(row[cux], row[cuy]);
    Eigen::Vector2d u = uref + K * (x - xref);
    return (A * x + B * (u + d)).eval();
  };
  return model;
}

struct UnicycleParams {
  double dt = 0.05;
  double kx = 2.0, ky = 2.0, ktheta = 2.0;
  double sigma_scale = 0.001;  // Sigma = dt * sigma_scale * I_3
  double dist_bound = 0.02;    // D = [-b, b], enters the turn rate
  ReferencePlan plan;          // columns t, px, py, theta, v, omega
};

// Kinematic unicycle with the tracking law
//   v = v* + kx (cos th * dpx + sin th * dpy)
//   w = w* + ky (-sin th * dpx + cos th * dpy) + ktheta (th* - th)
// and the disturbance added to the turn rate.
inline SystemModel unicycle_closed_loop(const UnicycleParams& params) {
  if (params.plan.length() == 0) throw std::invalid_argument("unicycle needs a reference plan");
  int cpx = params.plan.column("px");
  int cpy = params.plan.column("py");
  int cth = params.plan.column("theta");
  int cv = params.plan.column("v");
  int cw = params.plan.column("omega");
  auto plan = params.plan;
  double dt = params.dt, kx = params.kx, ky = params.ky, kth = params.ktheta;

  SystemModel model;
  model.name = "unicycle";
  model.n = 3;
  model.m = 1;
  model.Sigma = params.dt * params.sigma_scale * Eigen::Matrix3d::Identity();
  model.D.lo = Eigen::VectorXd::Constant(1, -params.dist_bound);
  model.D.hi = Eigen::VectorXd::Constant(1, params.dist_bound);
  model.dist_gain = (Eigen::Matrix<double, 3, 1>() << 0, 0, dt).finished();
  model.f = [dt, kx, ky, kth, plan, cpx, cpy, cth, cv, cw](const Eigen::VectorXd& x,
                                                           const Eigen::VectorXd& d, int t) {
    const Eigen::VectorXd& row = plan.rows.at(t);
    double dpx = row[cpx] - x[0];
    double dpy = row[cpy] - x[1];
    double th = x[2];
    double v = row[cv] + kx * (std::cos(th) * dpx + std::sin(th) * dpy);
    double w = row[cw] + ky * (-std::sin(th) * dpx + std::cos(th) * dpy) + kth * (row[cth] - th);
    Eigen::Vector3d next(x[0] + dt * v * std::cos(th), x[1] + dt * v * std::sin(th),
                         th + dt * (w + d[0]));
    return next.eval();
  };
  return model;
}

}  // namespace stlerode
