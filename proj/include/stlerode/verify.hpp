#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/distributions/beta.hpp>

#include "stlerode/pipeline.hpp"

namespace stlerode {

// Axis-aligned grid of ball centers covering a box: every point of the box
// lies within P-distance rho0 of some center. Zero-width coordinates get a
// single layer. Throws when the grid would exceed the cell cap.
inline std::vector<Eigen::VectorXd> cover_initial_set(const Box& box, const Eigen::MatrixXd& P,
                                                      double rho0, long cap = 100000) {
  if (!(rho0 > 0.0)) throw std::invalid_argument("cover radius must be positive");
  int n = box.dim();
  if (n == 0) throw std::invalid_argument("cover needs a nonempty box");
  if (P.rows() != n || P.cols() != n) throw std::invalid_argument("weight dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
  if (es.eigenvalues().minCoeff() <= 0.0) throw std::invalid_argument("weight must be positive definite");
  Eigen::MatrixXd sqrtP = es.operatorSqrt();

  std::vector<long> counts(n, 1);
  // Worst cell corner in the P norm; offsets only in coordinates with width.
  auto worst_corner = [&](const std::vector<long>& m) {
    Eigen::VectorXd h(n);
    for (int i = 0; i < n; ++i) h[i] = 0.5 * (box.hi[i] - box.lo[i]) / static_cast<double>(m[i]);
    double worst = 0.0;
    for (int mask = 0; mask < (1 << n); ++mask) {
      Eigen::VectorXd corner(n);
      for (int i = 0; i < n; ++i) corner[i] = (mask >> i & 1) ? h[i] : -h[i];
      worst = std::max(worst, (sqrtP * corner).norm());
    }
    return worst;
  };

  while (worst_corner(counts) > rho0) {
    // Split the coordinate whose cell half-width weighs most in the P norm.
    int pick = -1;
    double best = -1.0;
    for (int i = 0; i < n; ++i) {
      double h = 0.5 * (box.hi[i] - box.lo[i]) / static_cast<double>(counts[i]);
      double score = h * (sqrtP.col(i)).norm();
      if (score > best) {
        best = score;
        pick = i;
      }
    }
    if (pick < 0 || best <= 0.0) {
      throw std::runtime_error("cover refinement stalled; increase rho0");
    }
    counts[pick] += 1;
    long cells = 1;
    for (int i = 0; i < n; ++i) {
      cells *= counts[i];
      if (cells > cap) throw std::runtime_error("initial set cover exceeds the cell cap");
    }
  }

  std::vector<Eigen::VectorXd> centers;
  std::vector<long> idx(n, 0);
  while (true) {
    Eigen::VectorXd c(n);
    for (int i = 0; i < n; ++i) {
      double w = (box.hi[i] - box.lo[i]) / static_cast<double>(counts[i]);
      c[i] = box.lo[i] + (static_cast<double>(idx[i]) + 0.5) * w;
    }
    centers.push_back(c);
    int k = 0;
    while (k < n && ++idx[k] == counts[k]) idx[k++] = 0;
    if (k == n) break;
  }
  return centers;
}

struct ReachTube {
  Trajectory centers;         // nominal states x_0..x_T
  std::vector<double> radii;  // P-norm radii rho_0..rho_T
};

// Nominal rollout with the disturbance at its center, plus the P-norm radius
// recursion rho_{t+1} = L_t rho_t + max_d ||G (d - d_c)||_P. The disturbance
// enters both built-in systems through a fixed gain, so the corner maximum
// is exact.
inline ReachTube build_tube(const SystemModel& model, const Eigen::VectorXd& x0,
                            const std::vector<double>& L, const Eigen::MatrixXd& P, double rho0,
                            int T) {
  if (static_cast<int>(L.size()) < T) throw std::invalid_argument("Lipschitz schedule shorter than horizon");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
  Eigen::MatrixXd sqrtP = es.operatorSqrt();
  Eigen::VectorXd d_center = model.D.center();
  double bump = 0.0;
  for (const Eigen::VectorXd& d : model.D.corners()) {
    bump = std::max(bump, (sqrtP * model.dist_gain * (d - d_center)).norm());
  }

  ReachTube tube;
  tube.centers = simulate(model, x0, {}, T, SimMode::Det, 0);
  tube.radii.resize(T + 1);
  tube.radii[0] = rho0;
  for (int t = 0; t < T; ++t) tube.radii[t + 1] = L[t] * tube.radii[t] + bump;
  return tube;
}

namespace detail {

// Largest planar stretch of the unit P-ball on a coordinate pair; 1 on the
// position plane after shadow normalization.
inline double plane_stretch(const Eigen::MatrixXd& P, const std::vector<int>& coords) {
  Eigen::MatrixXd inv = P.inverse();
  Eigen::Matrix2d sub;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) sub(r, c) = inv(coords[r], coords[c]);
  }
  return std::sqrt(Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(sub).eigenvalues().maxCoeff());
}

inline bool tube_node(const Formula& f, const ReachTube& tube, const PredicateTable& table,
                      const Eigen::MatrixXd& P, int t) {
  switch (f->kind) {
    case NodeKind::True:
      return true;
    case NodeKind::Predicate: {
      const Region& region = lookup(table, f->name);
      double sd = signed_distance(region, slice(tube.centers.at(t), region.coords));
      double margin = f->negated ? -sd : sd;
      return margin >= tube.radii.at(t) * plane_stretch(P, region.coords);
    }
    case NodeKind::Not:
      return !tube_node(f->left, tube, table, P, t);
    case NodeKind::And:
      return tube_node(f->left, tube, table, P, t) && tube_node(f->right, tube, table, P, t);
    case NodeKind::Or:
      return tube_node(f->left, tube, table, P, t) || tube_node(f->right, tube, table, P, t);
    case NodeKind::Globally: {
      for (int tau = t + f->t1; tau <= t + f->t2; ++tau) {
        if (!tube_node(f->left, tube, table, P, tau)) return false;
      }
      return true;
    }
    case NodeKind::Eventually: {
      for (int tau = t + f->t1; tau <= t + f->t2; ++tau) {
        if (tube_node(f->left, tube, table, P, tau)) return true;
      }
      return false;
    }
    case NodeKind::Until: {
      for (int tau = t + f->t1; tau <= t + f->t2; ++tau) {
        if (tube_node(f->right, tube, table, P, tau)) {
          bool guard = true;
          for (int s = t; s <= tau; ++s) {
            if (!tube_node(f->left, tube, table, P, s)) {
              guard = false;
              break;
            }
          }
          if (guard) return true;
        }
      }
      return false;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace detail

// Robust satisfaction: every predicate demand holds with margin at least the
// tube radius mapped to that predicate's plane, so every trajectory inside
// the tube satisfies the formula.
inline bool tube_satisfies(const ReachTube& tube, const Formula& f, const PredicateTable& table,
                           const Eigen::MatrixXd& P, int t = 0) {
  int T = static_cast<int>(tube.centers.size()) - 1;
  if (t < 0 || t + horizon(f) > T) throw std::out_of_range("tube shorter than the formula horizon");
  return detail::tube_node(f, tube, table, P, t);
}

enum class Verdict { Verified, Falsified, Unknown };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Verified: return "Verified";
    case Verdict::Falsified: return "Falsified";
    case Verdict::Unknown: return "Unknown";
  }
  return "Unknown";
}

struct DeterministicCheck {
  Verdict verdict = Verdict::Unknown;
  long centers = 0;
  long failed_centers = 0;
  std::optional<Eigen::VectorXd> witness_center;  // first cover point whose tube fails
  std::vector<std::string> empty_predicates;
};

// Sound direction of the reduction: if every tube around the covered initial
// set satisfies the eroded formula, the stochastic system satisfies the
// original formula with probability at least 1 - delta. A failed tube check
// proves nothing, so the fallback verdict is Unknown, never Falsified.
inline DeterministicCheck verify_deterministic(const Scenario& sc, const PipelineResult& pipe) {
  DeterministicCheck out;
  out.empty_predicates = pipe.spec.empty_predicates;
  std::vector<Eigen::VectorXd> centers =
      cover_initial_set(sc.initial_set, pipe.P, sc.cover.rho0, sc.cover.cap);
  out.centers = static_cast<long>(centers.size());
  for (const Eigen::VectorXd& c : centers) {
    ReachTube tube = build_tube(pipe.model, c, pipe.bounds.lipschitz, pipe.P, sc.cover.rho0,
                                sc.horizon_steps);
    if (!tube_satisfies(tube, pipe.spec.eroded, pipe.spec.eroded_table, pipe.P)) {
      out.failed_centers += 1;
      if (!out.witness_center) out.witness_center = c;
    }
  }
  out.verdict = out.failed_centers == 0 ? Verdict::Verified : Verdict::Unknown;
  return out;
}

struct Counterexample {
  long trial = -1;
  std::uint64_t noise_seed = 0;  // replay: simulate(model, x0, d_seq, T, Stoch, noise_seed)
  Eigen::VectorXd x0;
  std::vector<Eigen::VectorXd> d_seq;
  Trajectory trajectory;
};

struct FalsifyResult {
  bool found = false;
  long trials_run = 0;
  Counterexample witness;
};

namespace detail {

inline Eigen::VectorXd sample_box(Rng& rng, const Box& box) {
  return rng.uniform_box(box.lo, box.hi);
}

}  // namespace detail

// Randomized search for a stochastic run violating the original formula.
// Each trial draws an initial state, a disturbance sequence, and a noise
// seed from its own deterministic stream, so a hit is replayable from the
// recorded witness alone.
inline FalsifyResult falsify(const Scenario& sc, const SystemModel& model, long budget,
                             std::uint64_t seed) {
  FalsifyResult out;
  const int T = sc.horizon_steps;
  for (long i = 0; i < budget; ++i) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
    Eigen::VectorXd x0 = detail::sample_box(rng, sc.initial_set);
    std::vector<Eigen::VectorXd> d_seq;
    d_seq.reserve(T);
    for (int t = 0; t < T; ++t) d_seq.push_back(detail::sample_box(rng, model.D));
    std::uint64_t noise_seed = rng.next();
    Trajectory traj = simulate(model, x0, d_seq, T, SimMode::Stoch, noise_seed);
    out.trials_run = i + 1;
    if (!eval_bool(sc.formula, traj, sc.predicates, 0)) {
      out.found = true;
      out.witness = {i, noise_seed, x0, std::move(d_seq), std::move(traj)};
      return out;
    }
  }
  return out;
}

// One-sided lower confidence bound on a binomial success probability.
inline double clopper_pearson_lower(long successes, long trials, double confidence) {
  if (trials < 1) throw std::invalid_argument("trials must be positive");
  if (successes < 0 || successes > trials) throw std::invalid_argument("successes out of range");
  if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("confidence must lie in (0,1)");
  if (successes == 0) return 0.0;
  boost::math::beta_distribution<double> dist(static_cast<double>(successes),
                                              static_cast<double>(trials - successes) + 1.0);
  return boost::math::quantile(dist, 1.0 - confidence);
}

struct McResult {
  long trials = 0;
  long successes = 0;
  double rate = 0.0;
  double confidence = 0.99;
  double lower_bound = 0.0;  // Clopper-Pearson one-sided
};

// Monte Carlo estimate of the satisfaction probability of the original
// formula under process noise, with disturbances drawn uniformly from D.
inline McResult monte_carlo_estimate(const Scenario& sc, const SystemModel& model, long trials,
                                     std::uint64_t seed, double confidence = 0.99) {
  if (trials < 1) throw std::invalid_argument("trials must be positive");
  McResult out;
  out.trials = trials;
  out.confidence = confidence;
  const int T = sc.horizon_steps;
  for (long i = 0; i < trials; ++i) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
    Eigen::VectorXd x0 = detail::sample_box(rng, sc.initial_set);
    std::vector<Eigen::VectorXd> d_seq;
    d_seq.reserve(T);
    for (int t = 0; t < T; ++t) d_seq.push_back(detail::sample_box(rng, model.D));
    Trajectory traj = simulate(model, x0, d_seq, T, SimMode::Stoch, rng.next());
    if (eval_bool(sc.formula, traj, sc.predicates, 0)) out.successes += 1;
  }
  out.rate = static_cast<double>(out.successes) / static_cast<double>(out.trials);
  out.lower_bound = clopper_pearson_lower(out.successes, out.trials, confidence);
  return out;
}

}  // namespace stlerode
