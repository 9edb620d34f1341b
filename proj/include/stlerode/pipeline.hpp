#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stlerode/deviation.hpp"
#include "stlerode/erosion.hpp"
#include "stlerode/lipschitz.hpp"
#include "stlerode/scenario.hpp"

namespace stlerode {

struct BoundSchedule {
  std::vector<double> lipschitz;  // L_0..L_{T-1}
  std::vector<double> sigma2;     // per-step variance proxy in the weighted norm
  double epsilon = 0.0;           // split parameter used for the tight bound
  double theta = 0.0;
  std::vector<double> tight;  // r_0..r_T
  std::vector<double> worst;  // union-bound comparison radii, same epsilon
};

struct PipelineResult {
  SystemModel model;
  Eigen::MatrixXd P;  // shadow-normalized weight: the position shadow of the
                      // unit P-ball is the unit disk
  std::optional<WeightSearchResult> weight_search;
  BoundSchedule bounds;
  DeviationSet dev;
  ErodedSpec spec;
};

namespace detail {

inline Eigen::Matrix4d closed_loop_matrix(const DoubleIntegratorParams& p) {
  Eigen::Matrix4d A = Eigen::Matrix4d::Identity();
  A(0, 2) = A(1, 3) = p.dt;
  Eigen::Matrix<double, 4, 2> B = Eigen::Matrix<double, 4, 2>::Zero();
  B(2, 0) = B(3, 1) = p.dt / p.mass;
  return A + B * p.K;
}

}  // namespace detail

// End-to-end bound construction: weight matrix, Lipschitz and variance
// schedules, optimized split parameter, per-step radii, deviation set, and
// the eroded specification. All predicates here live on the position plane
// shadow of the P-ball, which normalization makes the plain Euclidean disk.
inline PipelineResult erosion_pipeline(const Scenario& sc) {
  PipelineResult out;
  out.model = build_model(sc);
  const int T = sc.horizon_steps;
  const int n = out.model.n;

  std::vector<int> position_coords{0, 1};
  if (sc.weight_mode == "search") {
    WeightSearchResult ws = weight_search_linear(detail::closed_loop_matrix(sc.di), sc.weight_cap);
    out.weight_search = ws;
    out.P = shadow_normalize(ws.P, position_coords);
  } else {
    out.P = Eigen::MatrixXd::Identity(n, n);
  }

  double L;
  if (sc.lipschitz.mode == "linear_gain") {
    L = induced_weighted_norm(detail::closed_loop_matrix(sc.di), out.P);
  } else {
    L = lipschitz_estimate_sampling(out.model, sc.lipschitz.box, T, sc.lipschitz.pairs,
                                    sc.lipschitz.seed, out.P);
  }
  double s2 = subgaussian_proxy(out.model.Sigma, out.P);

  out.bounds.lipschitz.assign(T, L);
  out.bounds.sigma2.assign(T, s2);
  out.bounds.theta = sc.theta;
  out.bounds.epsilon = optimize_epsilon(n, sc.theta);
  out.bounds.tight = prs_radius(out.bounds.lipschitz, out.bounds.sigma2, n, sc.theta,
                                out.bounds.epsilon);
  out.bounds.worst = worst_case_radius(out.bounds.lipschitz, out.bounds.sigma2, n, sc.delta, T,
                                       out.bounds.epsilon);

  const std::vector<double>& radii = sc.bound_mode == "worst" ? out.bounds.worst
                                                              : out.bounds.tight;
  out.dev = deviation_set(radii, out.P);
  out.spec = erode_formula(sc.nnf, sc.predicates, out.dev);
  out.spec.theta = sc.theta;
  return out;
}

}  // namespace stlerode
