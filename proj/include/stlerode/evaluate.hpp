#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stlerode/formula.hpp"
#include "stlerode/geometry.hpp"

namespace stlerode {

using Trajectory = std::vector<Eigen::VectorXd>;

using PredicateTable = std::map<std::string, Region>;

namespace detail {

inline const Region& lookup(const PredicateTable& table, const std::string& name) {
  auto it = table.find(name);
  if (it == table.end()) throw std::invalid_argument("undefined predicate: " + name);
  return it->second;
}

inline void check_horizon(const Formula& f, const Trajectory& traj, int t) {
  int T = static_cast<int>(traj.size()) - 1;
  if (t < 0 || t + horizon(f) > T) {
    throw std::out_of_range("trajectory too short: need t + " + std::to_string(horizon(f)) +
                            " <= " + std::to_string(T));
  }
}

}  // namespace detail

namespace detail {

inline bool eval_node(const Formula& f, const PredicateTable& table, const Trajectory& traj, int t) {
  switch (f->kind) {
    case NodeKind::True:
      return true;
    case NodeKind::Predicate: {
      bool in = region_contains(lookup(table, f->name), traj[t]);
      return f->negated ? !in : in;
    }
    case NodeKind::Not:
      return !eval_node(f->left, table, traj, t);
    case NodeKind::And:
      return eval_node(f->left, table, traj, t) && eval_node(f->right, table, traj, t);
    case NodeKind::Or:
      return eval_node(f->left, table, traj, t) || eval_node(f->right, table, traj, t);
    case NodeKind::Eventually:
      for (int tau = t + f->t1; tau <= t + f->t2; ++tau) {
        if (eval_node(f->left, table, traj, tau)) return true;
      }
      return false;
    case NodeKind::Globally:
      for (int tau = t + f->t1; tau <= t + f->t2; ++tau) {
        if (!eval_node(f->left, table, traj, tau)) return false;
      }
      return true;
    case NodeKind::Until:
      // Witness tau in [t+t1, t+t2] where the right side holds; the left side
      // must hold on all of [t, tau], including tau itself.
      for (int tau = t + f->t1; tau <= t + f->t2; ++tau) {
        if (!eval_node(f->right, table, traj, tau)) continue;
        bool guard = true;
        for (int s = t; s <= tau && guard; ++s) guard = eval_node(f->left, table, traj, s);
        if (guard) return true;
      }
      return false;
  }
  throw std::logic_error("unreachable");
}

inline double rob_node(const Formula& f, const PredicateTable& table, const Trajectory& traj, int t) {
  switch (f->kind) {
    case NodeKind::True:
      return std::numeric_limits<double>::infinity();
    case NodeKind::Predicate: {
      double sd = signed_distance(lookup(table, f->name), traj[t]);
      return f->negated ? -sd : sd;
    }
    case NodeKind::Not:
      return -rob_node(f->left, table, traj, t);
    case NodeKind::And:
      return std::min(rob_node(f->left, table, traj, t), rob_node(f->right, table, traj, t));
    case NodeKind::Or:
      return std::max(rob_node(f->left, table, traj, t), rob_node(f->right, table, traj, t));
    case NodeKind::Eventually: {
      double best = -std::numeric_limits<double>::infinity();
      for (int tau = t + f->t1; tau <= t + f->t2; ++tau) {
        best = std::max(best, rob_node(f->left, table, traj, tau));
      }
      return best;
    }
    case NodeKind::Globally: {
      double worst = std::numeric_limits<double>::infinity();
      for (int tau = t + f->t1; tau <= t + f->t2; ++tau) {
        worst = std::min(worst, rob_node(f->left, table, traj, tau));
      }
      return worst;
    }
    case NodeKind::Until: {
      double best = -std::numeric_limits<double>::infinity();
      double guard = std::numeric_limits<double>::infinity();
      int s = t;
      for (int tau = t + f->t1; tau <= t + f->t2; ++tau) {
        for (; s <= tau; ++s) guard = std::min(guard, rob_node(f->left, table, traj, s));
        best = std::max(best, std::min(rob_node(f->right, table, traj, tau), guard));
      }
      return best;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace detail

inline bool eval_bool(const Formula& f, const Trajectory& traj, const PredicateTable& table,
                      int t = 0) {
  detail::check_horizon(f, traj, t);
  return detail::eval_node(f, table, traj, t);
}

// Sign-consistent with eval_bool: robustness > 0 implies satisfaction,
// robustness < 0 implies violation. Predicate margins are Euclidean signed
// distances in the constrained plane.
inline double robustness(const Formula& f, const Trajectory& traj, const PredicateTable& table,
                         int t = 0) {
  detail::check_horizon(f, traj, t);
  return detail::rob_node(f, table, traj, t);
}

}  // namespace stlerode
