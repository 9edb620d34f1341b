#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

#include <Eigen/Dense>

#include "stlerode/rng.hpp"
#include "stlerode/systems.hpp"

namespace stlerode {

// Sampled secant bound on the per-step contraction factor in ||.||_P:
//   max over (x, y, d, t) of ||f(x,d,t) - f(y,d,t)||_P / ||x - y||_P
// inflated by a 1.05 safety factor. Sample i draws from a stream derived
// from (seed, i), so the result is independent of any worker partitioning.
inline double lipschitz_estimate_sampling(const SystemModel& model, const Box& state_box, int T,
                                          int pairs, std::uint64_t seed,
                                          const Eigen::MatrixXd& P) {
  if (pairs < 10000) throw std::invalid_argument("lipschitz estimate needs at least 10^4 pairs");
  if (T < 1) throw std::invalid_argument("horizon must be >= 1");
  for (int i = 0; i < state_box.dim(); ++i) {
    if (!(state_box.hi[i] > state_box.lo[i])) {
      throw std::invalid_argument("state box must have positive volume in every coordinate");
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ps(P);
  Eigen::MatrixXd sqrtP = ps.operatorSqrt();
  double sup = 0.0;
  for (int i = 0; i < pairs; ++i) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
    Eigen::VectorXd x = rng.uniform_box(state_box.lo, state_box.hi);
    Eigen::VectorXd y = rng.uniform_box(state_box.lo, state_box.hi);
    Eigen::VectorXd d = rng.uniform_box(model.D.lo, model.D.hi);
    int t = static_cast<int>(rng.next() % static_cast<std::uint64_t>(T));
    double den = (sqrtP * (x - y)).norm();
    if (den < 1e-12) continue;
    double num = (sqrtP * (model.f(x, d, t) - model.f(y, d, t))).norm();
    sup = std::max(sup, num / den);
  }
  return 1.05 * sup;
}

}  // namespace stlerode
