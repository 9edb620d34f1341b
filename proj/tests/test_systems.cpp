#include "stlerode/systems.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "stlerode/deviation.hpp"
#include "stlerode/lipschitz.hpp"
#include "stlerode/rng.hpp"

namespace {

using stlerode::Box;
using stlerode::det_step;
using stlerode::double_integrator_closed_loop;
using stlerode::DoubleIntegratorParams;
using stlerode::lipschitz_estimate_sampling;
using stlerode::load_reference;
using stlerode::ReferencePlan;
using stlerode::simulate;
using stlerode::SimMode;
using stlerode::stoch_step;
using stlerode::SystemModel;
using stlerode::Trajectory;
using stlerode::unicycle_closed_loop;
using stlerode::UnicycleParams;

std::string write_temp_csv(const std::string& name, const std::string& content) {
  std::string path = testing::TempDir() + name;
  std::ofstream out(path);
  out << content;
  return path;
}

ReferencePlan constant_di_plan(int rows) {
  ReferencePlan plan;
  plan.columns = {"t", "px", "py", "vx", "vy", "ux", "uy"};
  for (int t = 0; t < rows; ++t) {
    Eigen::VectorXd row(7);
    row << t, 1.0, 2.0, 0.0, 0.0, 0.0, 0.0;
    plan.rows.push_back(row);
  }
  return plan;
}

ReferencePlan constant_uni_plan(int rows) {
  ReferencePlan plan;
  plan.columns = {"t", "px", "py", "theta", "v", "omega"};
  for (int t = 0; t < rows; ++t) {
    Eigen::VectorXd row(6);
    row << t, 0.5, 0.5, 0.7, 1.0, 0.0;
    plan.rows.push_back(row);
  }
  return plan;
}

TEST(LoadReference, ParsesHeaderAndRows) {
  std::string path = write_temp_csv("ref_ok.csv", "t,px,py\n0,1.5,2.5\n1,3.5,4.5\n");
  ReferencePlan plan = load_reference(path);
  EXPECT_EQ(plan.length(), 2);
  EXPECT_EQ(plan.column("px"), 1);
  EXPECT_NEAR(plan.rows[1][2], 4.5, 1e-12);
  EXPECT_THROW(plan.column("vx"), std::invalid_argument);
}

TEST(LoadReference, RejectsMalformedInput) {
  EXPECT_THROW(load_reference("/nonexistent/ref.csv"), std::runtime_error);
  std::string bad_fields = write_temp_csv("ref_fields.csv", "t,px\n0,1,2\n");
  EXPECT_THROW(load_reference(bad_fields), std::runtime_error);
  std::string bad_number = write_temp_csv("ref_number.csv", "t,px\n0,abc\n");
  EXPECT_THROW(load_reference(bad_number), std::runtime_error);
}

TEST(DoubleIntegrator, StepMatchesHandComputation) {
  DoubleIntegratorParams params;
  params.plan = constant_di_plan(3);
  SystemModel model = double_integrator_closed_loop(params);
  ASSERT_EQ(model.n, 4);
  Eigen::VectorXd x(4);
  x << 1.0, 2.0, 0.0, 0.0;  // exactly on the reference, zero feedback
  Eigen::VectorXd d = Eigen::Vector2d(0.0, 0.0);
  Eigen::VectorXd next = det_step(model, x, d, 0);
  EXPECT_NEAR((next - x).norm(), 0.0, 1e-12);

  // Off-reference state: u = K (x - xref), then the integrator update.
  Eigen::VectorXd y(4);
  y << 1.5, 2.0, 0.3, -0.1;
  Eigen::VectorXd ny = det_step(model, y, d, 0);
  double dt = params.dt, m = params.mass;
  Eigen::Vector2d u = params.K * (y - x);
  EXPECT_NEAR(ny[0], y[0] + dt * y[2], 1e-12);
  EXPECT_NEAR(ny[1], y[1] + dt * y[3], 1e-12);
  EXPECT_NEAR(ny[2], y[2] + dt / m * u[0], 1e-12);
  EXPECT_NEAR(ny[3], y[3] + dt / m * u[1], 1e-12);
}

TEST(DoubleIntegrator, ClosedLoopIsExactlyLinear) {
  DoubleIntegratorParams params;
  params.K << -150, 0, -8, 0, 0, -150, 0, -8;
  params.plan = constant_di_plan(3);
  SystemModel model = double_integrator_closed_loop(params);
  Eigen::Matrix4d A = Eigen::Matrix4d::Identity();
  A(0, 2) = A(1, 3) = params.dt;
  Eigen::Matrix<double, 4, 2> B = Eigen::Matrix<double, 4, 2>::Zero();
  B(2, 0) = B(3, 1) = params.dt / params.mass;
  Eigen::Matrix4d Acl = A + B * params.K;
  stlerode::Rng rng(51);
  Eigen::VectorXd d = Eigen::Vector2d(0.03, -0.02);
  for (int i = 0; i < 200; ++i) {
    Eigen::VectorXd x = rng.normal_vector(4);
    Eigen::VectorXd y = rng.normal_vector(4);
    Eigen::VectorXd diff = det_step(model, x, d, 1) - det_step(model, y, d, 1);
    EXPECT_NEAR((diff - Acl * (x - y)).norm(), 0.0, 1e-10);
  }
}

TEST(DoubleIntegrator, DisturbanceEntersThroughTheStatedGain) {
  DoubleIntegratorParams params;
  params.plan = constant_di_plan(3);
  SystemModel model = double_integrator_closed_loop(params);
  stlerode::Rng rng(52);
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd x = rng.normal_vector(4);
    Eigen::VectorXd d1 = 0.1 * rng.normal_vector(2);
    Eigen::VectorXd d2 = 0.1 * rng.normal_vector(2);
    // Clamp into D so det_step accepts them.
    for (int k = 0; k < 2; ++k) {
      d1[k] = std::clamp(d1[k], -0.1, 0.1);
      d2[k] = std::clamp(d2[k], -0.1, 0.1);
    }
    Eigen::VectorXd diff = det_step(model, x, d1, 0) - det_step(model, x, d2, 0);
    EXPECT_NEAR((diff - model.dist_gain * (d1 - d2)).norm(), 0.0, 1e-12);
  }
}

TEST(DoubleIntegrator, RejectsDisturbanceOutsideTheSet) {
  DoubleIntegratorParams params;
  params.plan = constant_di_plan(3);
  SystemModel model = double_integrator_closed_loop(params);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
  EXPECT_THROW(det_step(model, x, Eigen::Vector2d(0.2, 0.0), 0), std::invalid_argument);
}

TEST(Unicycle, StepMatchesHandComputation) {
  UnicycleParams params;
  params.kx = 0.25;
  params.ky = 0.25;
  params.ktheta = 15.0;
  params.plan = constant_uni_plan(3);
  SystemModel model = unicycle_closed_loop(params);
  ASSERT_EQ(model.n, 3);
  Eigen::VectorXd x(3);
  x << 0.2, 0.1, 0.5;
  Eigen::VectorXd d(1);
  d << 0.01;
  Eigen::VectorXd next = det_step(model, x, d, 0);
  double dpx = 0.5 - 0.2, dpy = 0.5 - 0.1, th = 0.5;
  double v = 1.0 + 0.25 * (std::cos(th) * dpx + std::sin(th) * dpy);
  double w = 0.0 + 0.25 * (-std::sin(th) * dpx + std::cos(th) * dpy) + 15.0 * (0.7 - th);
  EXPECT_NEAR(next[0], 0.2 + params.dt * v * std::cos(th), 1e-12);
  EXPECT_NEAR(next[1], 0.1 + params.dt * v * std::sin(th), 1e-12);
  EXPECT_NEAR(next[2], th + params.dt * (w + 0.01), 1e-12);
}

TEST(Unicycle, DisturbanceGainIsExact) {
  UnicycleParams params;
  params.plan = constant_uni_plan(3);
  SystemModel model = unicycle_closed_loop(params);
  Eigen::VectorXd x(3);
  x << -0.3, 0.8, 1.2;
  Eigen::VectorXd d1(1), d2(1);
  d1 << 0.02;
  d2 << -0.015;
  Eigen::VectorXd diff = det_step(model, x, d1, 0) - det_step(model, x, d2, 0);
  EXPECT_NEAR((diff - model.dist_gain * (d1 - d2)).norm(), 0.0, 1e-14);
}

TEST(Simulate, DeterministicModeIgnoresSeed) {
  DoubleIntegratorParams params;
  params.plan = constant_di_plan(10);
  SystemModel model = double_integrator_closed_loop(params);
  Eigen::VectorXd x0(4);
  x0 << 1.2, 2.2, 0.0, 0.0;
  Trajectory a = simulate(model, x0, {}, 9, SimMode::Det, 1);
  Trajectory b = simulate(model, x0, {}, 9, SimMode::Det, 2);
  ASSERT_EQ(a.size(), 10u);
  for (std::size_t t = 0; t < a.size(); ++t) EXPECT_EQ(a[t], b[t]);
}

TEST(Simulate, StochasticModeIsSeedReproducible) {
  DoubleIntegratorParams params;
  params.plan = constant_di_plan(10);
  SystemModel model = double_integrator_closed_loop(params);
  Eigen::VectorXd x0(4);
  x0 << 1.0, 2.0, 0.0, 0.0;
  Trajectory a = simulate(model, x0, {}, 9, SimMode::Stoch, 77);
  Trajectory b = simulate(model, x0, {}, 9, SimMode::Stoch, 77);
  Trajectory c = simulate(model, x0, {}, 9, SimMode::Stoch, 78);
  for (std::size_t t = 0; t < a.size(); ++t) EXPECT_EQ(a[t], b[t]);
  double diff = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) diff += (a[t] - c[t]).norm();
  EXPECT_GT(diff, 0.0);
}

TEST(Simulate, NoiseHasTheConfiguredScale) {
  DoubleIntegratorParams params;
  params.plan = constant_di_plan(2);
  SystemModel model = double_integrator_closed_loop(params);
  Eigen::VectorXd x0(4);
  x0 << 1.0, 2.0, 0.0, 0.0;  // noise-free step is a fixed point
  double var = 0.0;
  int trials = 20000;
  for (int i = 0; i < trials; ++i) {
    Trajectory traj = simulate(model, x0, {}, 1, SimMode::Stoch, 1000 + i);
    var += (traj[1] - x0).squaredNorm();
  }
  var /= trials;
  // Var of each coordinate is dt * sigma_scale; four coordinates.
  double expect = 4.0 * params.dt * params.sigma_scale;
  EXPECT_NEAR(var, expect, 0.05 * expect);
}

TEST(Lipschitz, MatchesInducedNormOnTheLinearSystem) {
  DoubleIntegratorParams params;
  params.K << -150, 0, -8, 0, 0, -150, 0, -8;
  params.plan = constant_di_plan(5);
  SystemModel model = double_integrator_closed_loop(params);
  Eigen::Matrix4d A = Eigen::Matrix4d::Identity();
  A(0, 2) = A(1, 3) = params.dt;
  Eigen::Matrix<double, 4, 2> B = Eigen::Matrix<double, 4, 2>::Zero();
  B(2, 0) = B(3, 1) = params.dt / params.mass;
  Eigen::Matrix4d Acl = A + B * params.K;
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(4, 4);
  double exact = stlerode::induced_weighted_norm(Acl, P);
  Box box;
  box.lo = Eigen::VectorXd::Constant(4, -1.0);
  box.hi = Eigen::VectorXd::Constant(4, 1.0);
  double sampled = lipschitz_estimate_sampling(model, box, 4, 20000, 9, P);
  // The estimate is the sampled supremum times a 1.05 safety factor; on a
  // linear map the supremum equals the induced norm from below.
  EXPECT_LE(sampled, 1.05 * exact * (1.0 + 1e-9));
  EXPECT_GE(sampled, exact * 0.99);
}

TEST(Lipschitz, RejectsTinySampleBudgets) {
  DoubleIntegratorParams params;
  params.plan = constant_di_plan(5);
  SystemModel model = double_integrator_closed_loop(params);
  Box box;
  box.lo = Eigen::VectorXd::Constant(4, -1.0);
  box.hi = Eigen::VectorXd::Constant(4, 1.0);
  EXPECT_THROW(lipschitz_estimate_sampling(model, box, 4, 100, 9, Eigen::MatrixXd::Identity(4, 4)),
               std::invalid_argument);
  Box flat = box;
  flat.hi[2] = flat.lo[2];
  EXPECT_THROW(
      lipschitz_estimate_sampling(model, flat, 4, 20000, 9, Eigen::MatrixXd::Identity(4, 4)),
      std::invalid_argument);
}

TEST(RngStreams, IndexedStreamsAreDecorrelated) {
  stlerode::Rng a = stlerode::Rng::stream(123, 0);
  stlerode::Rng b = stlerode::Rng::stream(123, 1);
  stlerode::Rng a2 = stlerode::Rng::stream(123, 0);
  double sum_ab = 0.0;
  for (int i = 0; i < 1000; ++i) {
    double ua = a.uniform01(), ub = b.uniform01();
    EXPECT_EQ(ua, a2.uniform01());
    sum_ab += (ua - 0.5) * (ub - 0.5);
  }
  EXPECT_LT(std::abs(sum_ab / 1000.0), 0.02);
}

TEST(RngStreams, NormalMomentsAreSane) {
  stlerode::Rng rng(99);
  double mean = 0.0, var = 0.0;
  int trials = 200000;
  for (int i = 0; i < trials; ++i) {
    double z = rng.normal();
    mean += z;
    var += z * z;
  }
  mean /= trials;
  var = var / trials - mean * mean;
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(var, 1.0, 0.02);
}

}  // namespace
