#include "stlerode/scenario.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <string>

#ifndef SCENARIO_DIR
#error "SCENARIO_DIR must point at the shipped scenario files"
#endif

namespace {

using stlerode::ConvexPolygon;
using stlerode::Disk;
using stlerode::DiskComplement;
using stlerode::load_scenario;
using stlerode::PolygonComplement;
using stlerode::Scenario;
using stlerode::ScenarioError;

std::string write_temp(const std::string& name, const std::string& body) {
  std::string path = testing::TempDir() + name;
  std::ofstream out(path);
  out << body;
  return path;
}

// A minimal valid scenario; tests below mutate one field at a time.
std::string base_json(const std::string& ref_path) {
  return std::string(R"({
  "name": "mini",
  "system": {"type": "double_integrator", "reference": ")") +
         ref_path + R"("},
  "initial_set": {"lo": [0.3, 0.3, 0, 0], "hi": [0.5, 0.5, 0, 0]},
  "spec": {
    "formula": "G[0,20] goal",
    "delta": 0.001,
    "predicates": {"goal": {"type": "disk", "center": [1, 2], "radius": 0.6}}
  },
  "analysis": {"weights": "identity", "lipschitz": {"mode": "linear_gain"}}
})";
}

std::string temp_plan() {
  std::string body = "t,px,py,vx,vy,ux,uy\n";
  for (int t = 0; t <= 25; ++t) {
    body += std::to_string(t) + ",1,2,0,0,0,0\n";
  }
  return write_temp("mini_plan.csv", body);
}

TEST(ScenarioLoad, ShippedDoubleIntegratorParses) {
  Scenario sc = load_scenario(std::string(SCENARIO_DIR) + "/di_reach_avoid.json");
  EXPECT_EQ(sc.name, "di_reach_avoid");
  EXPECT_EQ(sc.system_type, "double_integrator");
  EXPECT_EQ(sc.horizon_steps, 100);
  EXPECT_DOUBLE_EQ(sc.delta, 1e-4);
  EXPECT_DOUBLE_EQ(sc.theta, 1e-6);
  EXPECT_EQ(sc.di.plan.length(), 101);
  EXPECT_DOUBLE_EQ(sc.di.K(0, 0), -150.0);
  EXPECT_DOUBLE_EQ(sc.di.K(1, 3), -8.0);
  EXPECT_EQ(sc.weight_mode, "search");
  EXPECT_EQ(sc.lipschitz.mode, "linear_gain");
  EXPECT_EQ(sc.bound_mode, "tight");
  ASSERT_TRUE(sc.predicates.count("obs"));
  ASSERT_TRUE(sc.predicates.count("goal"));
  EXPECT_TRUE(std::holds_alternative<DiskComplement>(sc.predicates.at("obs").shape));
  const Disk& goal = std::get<Disk>(sc.predicates.at("goal").shape);
  EXPECT_DOUBLE_EQ(goal.radius, 0.55);
  EXPECT_EQ(sc.predicates.at("goal").coords, (std::vector<int>{0, 1}));
  // Plan starts inside neither region and ends at the goal center.
  const Eigen::VectorXd& last = sc.di.plan.rows.back();
  EXPECT_NEAR(last[1], 4.9, 1e-12);
  EXPECT_NEAR(last[2], 3.2, 1e-12);
}

TEST(ScenarioLoad, ShippedUnicycleParses) {
  Scenario sc = load_scenario(std::string(SCENARIO_DIR) + "/uni_reach.json");
  EXPECT_EQ(sc.system_type, "unicycle");
  EXPECT_EQ(sc.horizon_steps, 36);
  EXPECT_DOUBLE_EQ(sc.uni.kx, 0.25);
  EXPECT_DOUBLE_EQ(sc.uni.ktheta, 15.0);
  EXPECT_DOUBLE_EQ(sc.uni.dist_bound, 0.02);
  EXPECT_EQ(sc.uni.plan.length(), 37);
  EXPECT_EQ(sc.weight_mode, "identity");
  EXPECT_EQ(sc.lipschitz.mode, "sampling");
  EXPECT_EQ(sc.lipschitz.pairs, 200000);
  EXPECT_EQ(sc.lipschitz.box.dim(), 3);
  EXPECT_NEAR(sc.initial_set.lo[2], M_PI / 2 - 0.1, 1e-9);
  EXPECT_NEAR(sc.initial_set.hi[2], M_PI / 2 + 0.1, 1e-9);
  // Hexagon keepout arrives as an explicit polygon complement, flat-top.
  const PolygonComplement& obs = std::get<PolygonComplement>(sc.predicates.at("obs").shape);
  ASSERT_EQ(obs.vertices.size(), 6u);
  EXPECT_NEAR(obs.vertices[0][0], 1.2, 1e-12);
  EXPECT_NEAR(obs.vertices[0][1], 2.4, 1e-12);
  EXPECT_NEAR(obs.vertices[1][1], 2.4 + 1.2 * std::sqrt(3.0) / 2.0, 1e-12);
}

TEST(ScenarioLoad, AcceptsTheMiniFixture) {
  Scenario sc = load_scenario(write_temp("ok.json", base_json(temp_plan())));
  EXPECT_EQ(sc.horizon_steps, 20);
  EXPECT_EQ(sc.di.plan.length(), 26);
  // Defaults survive when analysis leaves them out.
  EXPECT_DOUBLE_EQ(sc.cover.rho0, 0.05);
  EXPECT_EQ(sc.bound_mode, "tight");
}

TEST(ScenarioLoad, RejectsMissingFileAndBrokenJson) {
  EXPECT_THROW(load_scenario("/nonexistent/nope.json"), ScenarioError);
  EXPECT_THROW(load_scenario(write_temp("broken.json", "{\"name\": ")), ScenarioError);
}

TEST(ScenarioLoad, RejectsBadFields) {
  std::string plan = temp_plan();
  auto mutate = [&](const std::string& from, const std::string& to) {
    std::string body = base_json(plan);
    std::size_t pos = body.find(from);
    ASSERT_NE(pos, std::string::npos) << from;
    body.replace(pos, from.size(), to);
    EXPECT_THROW(load_scenario(write_temp("bad.json", body)), ScenarioError) << to;
  };
  mutate("\"delta\": 0.001", "\"delta\": 1.5");
  mutate("\"delta\": 0.001", "\"delta\": 0");
  mutate("G[0,20] goal", "G[0,30] goal");                 // plan shorter than horizon
  mutate("G[0,20] goal", "G[0,20] missing");              // undefined predicate
  mutate("G[0,20] goal", "G[0,20 goal");                  // parse failure
  mutate("\"radius\": 0.6", "\"radius\": -1");
  mutate("\"type\": \"disk\"", "\"type\": \"blob\"");
  mutate("\"weights\": \"identity\"", "\"weights\": \"magic\"");
  mutate("\"mode\": \"linear_gain\"", "\"mode\": \"sampling\"");  // sampling without box
  mutate("\"lo\": [0.3, 0.3, 0, 0]", "\"lo\": [0.3, 0.3, 0]");   // wrong state dimension
  mutate("\"hi\": [0.5, 0.5, 0, 0]", "\"hi\": [0.2, 0.5, 0, 0]");  // hi < lo
  mutate("\"center\": [1, 2], \"radius\": 0.6",
         "\"center\": [1, 2], \"radius\": 0.6, \"coords\": [0, 0]");  // repeated coord
  mutate("\"center\": [1, 2], \"radius\": 0.6",
         "\"center\": [1, 2], \"radius\": 0.6, \"coords\": [0, 7]");  // out of range
}

TEST(ScenarioLoad, RejectsSearchWeightsOffTheLinearLoop) {
  std::string uni = R"({
  "name": "u",
  "system": {"type": "unicycle", "reference": "REF"},
  "initial_set": {"lo": [0, 0, 0], "hi": [0.1, 0.1, 0.1]},
  "spec": {
    "formula": "G[0,5] goal",
    "delta": 0.01,
    "predicates": {"goal": {"type": "disk", "center": [0, 0], "radius": 1}}
  },
  "analysis": {
    "weights": "search",
    "lipschitz": {"mode": "sampling", "box": {"lo": [-1, -1, -1], "hi": [1, 1, 1]}}
  }
})";
  std::string plan = "t,px,py,theta,v,omega\n";
  for (int t = 0; t <= 10; ++t) plan += std::to_string(t) + ",0,0,0,0,0\n";
  std::string plan_path = write_temp("uni_plan.csv", plan);
  uni.replace(uni.find("REF"), 3, plan_path);
  EXPECT_THROW(load_scenario(write_temp("uni_bad.json", uni)), ScenarioError);
}

TEST(ScenarioLoad, RejectsNonConvexAndClockwisePolygons) {
  std::string plan = temp_plan();
  std::string body = base_json(plan);
  std::string disk = "{\"type\": \"disk\", \"center\": [1, 2], \"radius\": 0.6}";
  std::size_t pos = body.find(disk);
  ASSERT_NE(pos, std::string::npos);
  std::string cw =
      "{\"type\": \"polygon\", \"vertices\": [[0, 0], [0, 1], [1, 1], [1, 0]], "
      "\"coords\": [0, 1]}";
  std::string nonconvex =
      "{\"type\": \"polygon\", \"vertices\": [[0, 0], [2, 0], [1, 0.2], [1, 2]], "
      "\"coords\": [0, 1]}";
  std::string b1 = body;
  b1.replace(pos, disk.size(), cw);
  EXPECT_THROW(load_scenario(write_temp("cw.json", b1)), ScenarioError);
  std::string b2 = body;
  b2.replace(pos, disk.size(), nonconvex);
  EXPECT_THROW(load_scenario(write_temp("nc.json", b2)), ScenarioError);
}

}  // namespace
