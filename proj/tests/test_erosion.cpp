#include "stlerode/erosion.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "stlerode/rng.hpp"

namespace {

using stlerode::DeviationSet;
using stlerode::Disk;
using stlerode::DiskComplement;
using stlerode::erode_formula;
using stlerode::ErodedSpec;
using stlerode::Formula;
using stlerode::NodeKind;
using stlerode::parse_formula;
using stlerode::PredicateTable;
using stlerode::print_formula;
using stlerode::Region;
using stlerode::to_nnf;

PredicateTable demo_table() {
  PredicateTable table;
  table.emplace("goal", Region{Disk{{4.9, 3.2}, 0.55}, {0, 1}});
  table.emplace("obs", Region{DiskComplement{{2.2, 2.2}, 1.2}, {0, 1}});
  table.emplace("band", Region{stlerode::Halfspace{{0.0, 1.0}, -1.0}, {0, 1}});
  return table;
}

DeviationSet identity_dev(double level, int n = 4) {
  return DeviationSet{Eigen::MatrixXd::Identity(n, n), level};
}

TEST(ErodeFormula, KeepsTheOperatorTree) {
  PredicateTable table = demo_table();
  Formula f = to_nnf(parse_formula("G[0,100] obs & F[0,90] G[0,10] goal"));
  ErodedSpec spec = erode_formula(f, table, identity_dev(0.2));
  ASSERT_EQ(spec.eroded->kind, NodeKind::And);
  EXPECT_EQ(spec.eroded->left->kind, NodeKind::Globally);
  EXPECT_EQ(spec.eroded->left->t2, 100);
  EXPECT_EQ(spec.eroded->right->kind, NodeKind::Eventually);
  EXPECT_EQ(stlerode::horizon(spec.eroded), stlerode::horizon(f));
}

TEST(ErodeFormula, ShrinksGoalAndGrowsObstacle) {
  PredicateTable table = demo_table();
  Formula f = to_nnf(parse_formula("obs & goal"));
  ErodedSpec spec = erode_formula(f, table, identity_dev(0.2));
  const Disk& goal = std::get<Disk>(spec.eroded_table.at("goal").shape);
  EXPECT_NEAR(goal.radius, 0.35, 1e-12);
  const DiskComplement& obs = std::get<DiskComplement>(spec.eroded_table.at("obs").shape);
  EXPECT_NEAR(obs.radius, 1.4, 1e-12);
  EXPECT_TRUE(spec.empty_predicates.empty());
  EXPECT_NEAR(spec.planar_radii.at("goal"), 0.2, 1e-12);
}

TEST(ErodeFormula, NegatedPredicateGetsItsOwnDilatedEntry) {
  PredicateTable table = demo_table();
  Formula f = to_nnf(parse_formula("!goal U[0,30] goal"));
  ErodedSpec spec = erode_formula(f, table, identity_dev(0.1));
  // The positive occurrence erodes the disk, the negated one dilates it and
  // keeps its flag under a distinct key.
  ASSERT_EQ(spec.eroded->kind, NodeKind::Until);
  EXPECT_EQ(spec.eroded->left->name, "goal!");
  EXPECT_TRUE(spec.eroded->left->negated);
  EXPECT_EQ(spec.eroded->right->name, "goal");
  EXPECT_FALSE(spec.eroded->right->negated);
  EXPECT_NEAR(std::get<Disk>(spec.eroded_table.at("goal!").shape).radius, 0.65, 1e-12);
  EXPECT_NEAR(std::get<Disk>(spec.eroded_table.at("goal").shape).radius, 0.45, 1e-12);
}

TEST(ErodeFormula, OverErosionIsFlaggedNotHidden) {
  PredicateTable table = demo_table();
  Formula f = to_nnf(parse_formula("F[0,10] goal"));
  ErodedSpec spec = erode_formula(f, table, identity_dev(0.6));
  ASSERT_EQ(spec.empty_predicates.size(), 1u);
  EXPECT_EQ(spec.empty_predicates[0], "goal");
  EXPECT_TRUE(std::holds_alternative<stlerode::EmptyRegion>(spec.eroded_table.at("goal").shape));
  // The eroded leaf is plainly unsatisfiable.
  EXPECT_FALSE(spec.eroded->left->negated);
}

TEST(ErodeFormula, RequiresNegationNormalForm) {
  PredicateTable table = demo_table();
  EXPECT_THROW(erode_formula(parse_formula("!(goal & obs)"), table, identity_dev(0.1)),
               std::invalid_argument);
}

TEST(ErodeFormula, ZeroRadiusIsBitwiseNeutralOnSatisfaction) {
  PredicateTable table = demo_table();
  stlerode::Rng rng(61);
  std::vector<std::string> preds{"goal", "obs", "band"};
  for (int i = 0; i < 200; ++i) {
    Formula f = to_nnf(oracle::random_formula(rng, preds, 3, true));
    ErodedSpec spec = erode_formula(f, table, identity_dev(0.0));
    int h = stlerode::horizon(f);
    oracle::Trajectory traj = oracle::random_trajectory(rng, h + 1, 2, 4.0);
    EXPECT_EQ(stlerode::eval_bool(f, traj, table, 0),
              stlerode::eval_bool(spec.eroded, traj, spec.eroded_table, 0))
        << print_formula(f);
  }
}

TEST(ErodeFormula, ErodedSatisfactionImpliesSatisfactionUnderDeviation) {
  // The eroded formula is designed so that satisfaction by a trajectory
  // implies satisfaction of the original by every trajectory within the
  // erosion radius at each step.
  PredicateTable table = demo_table();
  stlerode::Rng rng(62);
  std::vector<std::string> preds{"goal", "obs", "band"};
  double rho = 0.15;
  int tried = 0;
  for (int i = 0; i < 2000 && tried < 400; ++i) {
    Formula f = to_nnf(oracle::random_formula(rng, preds, 3, true));
    ErodedSpec spec = erode_formula(f, table, identity_dev(rho));
    int h = stlerode::horizon(f);
    oracle::Trajectory traj = oracle::random_trajectory(rng, h + 1, 2, 4.0);
    if (!stlerode::eval_bool(spec.eroded, traj, spec.eroded_table, 0)) continue;
    tried += 1;
    // Perturb every step by strictly less than rho, many times.
    for (int rep = 0; rep < 5; ++rep) {
      oracle::Trajectory moved = traj;
      for (auto& x : moved) {
        double a = 2.0 * M_PI * rng.uniform01();
        double r = 0.999 * rho * rng.uniform01();
        x[0] += r * std::cos(a);
        x[1] += r * std::sin(a);
      }
      EXPECT_TRUE(stlerode::eval_bool(f, moved, table, 0)) << print_formula(f);
    }
  }
  ASSERT_GE(tried, 100);
}

TEST(ErodeFormula, SharedPredicateAcrossPolaritiesStaysConsistent) {
  PredicateTable table = demo_table();
  Formula f = to_nnf(parse_formula("(goal | !goal) & F[0,5] goal"));
  ErodedSpec spec = erode_formula(f, table, identity_dev(0.1));
  EXPECT_EQ(spec.eroded_table.count("goal"), 1u);
  EXPECT_EQ(spec.eroded_table.count("goal!"), 1u);
  EXPECT_EQ(spec.planar_radii.size(), 2u);
}

}  // namespace
