#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "palloc/controller.hpp"
#include "palloc/sim.hpp"

using palloc::ControllerParams;
using palloc::ControllerState;
using palloc::ControlMode;
using palloc::CostFunction;
namespace plants = palloc::plants;

TEST(ControlInput, InventoryAtEquilibrium) {
  const CostFunction f = CostFunction::quadratic(0.1, -0.05, 1.0);
  const double y = 4.57;
  ControllerParams p;
  p.gamma = 1.0;
  ControllerState cs;
  cs.lambda = p.gamma * f.gradient(y);
  const double u = palloc::control_input(0, y, cs, f, plants::Inventory{1.0, 1.0}, p);
  EXPECT_NEAR(u, 5.57, 1e-12);
}

TEST(ControlInput, AverageConsensusIntegratorAtMean) {
  ControllerParams p;
  p.gamma = 1.7;
  p.mode = ControlMode::average_consensus;
  ControllerState cs;
  const double ystar = 2.5;
  cs.lambda = p.gamma * ystar;
  // The configured cost is ignored in this mode.
  const double u = palloc::control_input(0, ystar, cs, palloc::costs::Nmp4{}, plants::SingleIntegrator{}, p);
  EXPECT_NEAR(u, 0.0, 1e-15);
}

TEST(ControlInput, NonMinPhaseExample) {
  ControllerParams p;
  p.gamma = 2.0;
  const double u = palloc::control_input(0, 0.0, ControllerState{}, palloc::costs::Nmp1{}, plants::NonMinPhase{}, p);
  EXPECT_DOUBLE_EQ(u, -12.0);
}

TEST(ControlInput, NonFiniteReportsAgentAndTime) {
  ControllerParams p;
  ControllerState cs;
  cs.lambda = NAN;
  try {
    palloc::control_input(2, 0.0, cs, palloc::costs::Nmp1{}, plants::SingleIntegrator{}, p, 1.5);
    FAIL();
  } catch (const palloc::Error& e) {
    EXPECT_EQ(e.kind(), palloc::ErrorKind::numeric);
    EXPECT_NE(std::string(e.what()).find("agent 3"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("1.5"), std::string::npos);
  }
}

TEST(ControlInput, FeedforwardToggle) {
  ControllerParams p;
  p.feedforward = false;
  const double u = palloc::control_input(0, 2.0, ControllerState{}, CostFunction::quadratic(0.5, 0, 0),
                                         plants::Inventory{3.0, 1.0}, p);
  EXPECT_DOUBLE_EQ(u, -2.0);
}

TEST(ControllerDerivatives, IsolatedBalancedAgent) {
  const auto e = palloc::build_exosystem({});
  const auto g = palloc::design_gain(e, palloc::default_poles(1));
  ControllerState cs;
  cs.eta = Eigen::VectorXd::Zero(1);
  const auto d = palloc::controller_derivatives(0, 3.0, 3.0, cs, {}, {}, {}, &e, &g, false);
  EXPECT_EQ(d.lambda_dot, 0.0);
  EXPECT_EQ(d.z_dot, 0.0);
}

TEST(ControllerDerivatives, ConsensusSubspace) {
  ControllerState cs;
  cs.lambda = 1.25;
  cs.z = -0.5;
  const std::vector<double> nl{1.25, 1.25}, nz{-0.5, -0.5}, w{1.0, 2.0};
  const auto d = palloc::controller_derivatives(1, 2.0, 3.0, cs, nl, nz, w, nullptr, nullptr, true);
  EXPECT_EQ(d.lambda_dot, 1.0);
  EXPECT_EQ(d.z_dot, 0.0);
}

TEST(ControllerDerivatives, ExactEstimateCancelsSinusoid) {
  const double w = 3.0, amp = 0.8, ph = 0.4, d0 = 1.5, t = 2.1;
  const auto e = palloc::build_exosystem({w});
  const auto g = palloc::design_gain(e, palloc::default_poles(3));
  ControllerState cs;
  cs.lambda = 0.3;
  cs.z = 0.1;
  cs.eta.resize(3);
  cs.eta << d0, amp * std::sin(w * t + ph), amp * std::cos(w * t + ph);
  const double d_obs = d0 + amp * std::sin(w * t + ph);
  const double y = 0.9;
  const std::vector<double> nl{0.1}, nz{0.4}, wt{1.0};
  const auto d = palloc::controller_derivatives(0, y, d_obs, cs, nl, nz, wt, &e, &g, true);
  const double lv = 0.3 - 0.1, zv = 0.1 - 0.4;
  EXPECT_NEAR(d.lambda_dot, -lv - zv + d0 - y, 1e-14);
  EXPECT_NEAR(d.z_dot, lv, 1e-15);
  // Exact estimate: eta' equals S eta.
  EXPECT_LT((d.eta_dot - e.S() * cs.eta).norm(), 1e-12);
}

TEST(ControllerDerivatives, DimensionErrors) {
  const auto e = palloc::build_exosystem({1.0});
  const auto g = palloc::design_gain(e, palloc::default_poles(3));
  ControllerState cs;
  cs.eta = Eigen::VectorXd::Zero(2);
  EXPECT_THROW(palloc::controller_derivatives(0, 0, 0, cs, {}, {}, {}, &e, &g, true), palloc::Error);
  cs.eta = Eigen::VectorXd::Zero(3);
  const std::vector<double> one{1.0};
  EXPECT_THROW(palloc::controller_derivatives(0, 0, 0, cs, one, {}, one, &e, &g, true), palloc::Error);
}

TEST(GammaBound, Examples) {
  const std::vector<CostFunction> c1{CostFunction::quadratic(1, 0, 0)};
  const std::vector<palloc::Plant> p1{plants::SingleIntegrator{}};
  EXPECT_DOUBLE_EQ(palloc::gamma_lower_bound(c1, p1), 0.5);

  const std::vector<CostFunction> c2{CostFunction::quadratic(0.1, -0.05, 1)};
  const std::vector<palloc::Plant> p2{plants::Inventory{1, 1}};
  EXPECT_NEAR(palloc::gamma_lower_bound(c2, p2), 10.0, 1e-12);

  const std::vector<CostFunction> c3{palloc::costs::Nmp1{}, palloc::costs::Nmp2{}, palloc::costs::Nmp3{},
                                     palloc::costs::Nmp4{}};
  const std::vector<palloc::Plant> p3(4, plants::NonMinPhase{});
  const double b = palloc::gamma_lower_bound(c3, p3);
  EXPECT_LE(b, 2.0);
  EXPECT_GT(b, 1.0);
}

TEST(GammaBound, InventoryOverride) {
  palloc::SimConfig cfg;
  cfg.graph = palloc::Graph{};
  palloc::AgentConfig a;
  a.plant = plants::Inventory{1, 1};
  a.cost = CostFunction::quadratic(0.1, -0.05, 1);
  a.disturbance.d0 = 1.0;
  cfg.agents.push_back(a);
  cfg.controller.mode = ControlMode::no_disturbance;
  cfg.controller.gamma = 1.0;
  try {
    palloc::resolve_gamma(cfg);
    FAIL();
  } catch (const palloc::Error& e) {
    EXPECT_EQ(e.kind(), palloc::ErrorKind::usage);
  }
  cfg.controller.override_gamma = true;
  const auto r = palloc::resolve_gamma(cfg);
  EXPECT_EQ(r.gamma, 1.0);
  EXPECT_TRUE(r.warning.has_value());
  cfg.controller.gamma.reset();
  EXPECT_NEAR(palloc::resolve_gamma(cfg).gamma, 11.0, 1e-12);
}

TEST(EquilibriumResidual, InventoryOptimum) {
  const std::vector<double> y{4.57, 2.41, 1.69, 1.33}, d0{1, 2, 3, 4};
  std::vector<CostFunction> costs;
  for (int i = 1; i <= 4; ++i) costs.push_back(CostFunction::quadratic(0.1 * i, -0.05 * i, i));
  const double gamma = 1.0;
  const double lambda0 = -0.864;
  const std::vector<double> lambdas(4, -gamma * lambda0);
  const auto r = palloc::equilibrium_residual(y, lambdas, d0, costs, gamma);
  EXPECT_NEAR(r.lambda0, lambda0, 1e-15);
  EXPECT_LT(r.kkt_residual, 0.01);
  EXPECT_LT(r.balance_residual, 0.01);
  EXPECT_EQ(r.consensus_residual, 0.0);
}

TEST(EquilibriumResidual, EqualQuadraticsAtCommonValue) {
  const std::vector<CostFunction> costs(3, CostFunction::quadratic(0.5, 0, 0));
  const std::vector<double> y(3, 2.0), d0(3, 2.0), lambdas(3, 2.0 * 1.5);
  const auto r = palloc::equilibrium_residual(y, lambdas, d0, costs, 1.5);
  EXPECT_DOUBLE_EQ(r.lambda0, -2.0);
  EXPECT_EQ(r.kkt_residual, 0.0);
  EXPECT_EQ(r.balance_residual, 0.0);
}

TEST(EquilibriumResidual, OffOptimumHasPositiveResidual) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-3, 3);
  const std::vector<CostFunction> costs{palloc::costs::Nmp1{}, palloc::costs::Nmp2{}};
  for (int k = 0; k < 50; ++k) {
    const std::vector<double> y{u(rng), u(rng)}, lambdas{u(rng), u(rng)}, d0{1, 2};
    EXPECT_GT(palloc::equilibrium_residual(y, lambdas, d0, costs, 2.0).kkt_residual, 0.0);
  }
  EXPECT_THROW(palloc::equilibrium_residual(std::vector<double>{1.0}, std::vector<double>{}, std::vector<double>{1.0},
                                            costs, 1.0),
               palloc::Error);
}
