#include "siggame/multi_stage.hpp"

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "siggame/monte_carlo.hpp"
#include "siggame/single_stage.hpp"

namespace {

using siggame::FilterState;
using siggame::GameParams;
using siggame::MultiStageParams;
using siggame::Prediction;

MultiStageParams flat_instance(int n, double theta) {
  MultiStageParams p;
  p.n = n;
  p.beta.assign(n, 1.0);
  p.sigma_n2.assign(n, 1.0);
  p.sigma_x0_2 = 1.0;
  p.sigma_w2.assign(n + 1, 1.0);
  p.sigma_v2.assign(n + 1, 1.0);
  p.theta.assign(n + 1, theta);
  p.bias.assign(n + 1, 0.0);
  return p;
}

MultiStageParams random_instance(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> var(0.25, 4.0);
  std::uniform_real_distribution<double> coeff(-1.2, 1.2);
  std::uniform_real_distribution<double> th(0.01, 0.6);
  MultiStageParams p = flat_instance(n, 0.1);
  for (auto& b : p.beta) b = coeff(rng);
  for (auto& s : p.sigma_n2) s = var(rng);
  p.sigma_x0_2 = var(rng);
  for (auto& s : p.sigma_w2) s = var(rng);
  for (auto& s : p.sigma_v2) s = var(rng);
  for (auto& t : p.theta) t = th(rng);
  return p;
}

// Hand-derived stage values for the flat horizon-1 instance at theta = 1/9.
const double kA1Sq = 1.5 * std::sqrt(3.0) - 1.75;
const double kJ1 = 2.0 * std::sqrt(3.0) / 9.0;
const double kJe1 = 4.0 * std::sqrt(3.0) / 9.0 - 7.0 / 27.0;

TEST(KalmanStep, CombinedObservationUpdate) {
  const FilterState s = siggame::kalman_step({0.0, 1.0}, 1.0, 0.5, 0.0, 1.0, 1.0, 0.5);
  EXPECT_NEAR(s.innov_var, 1.5, 1e-15);
  EXPECT_NEAR(s.gain, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(s.sigma_upd, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(s.x_upd, 1.0 / 3.0, 1e-15);
}

TEST(KalmanStep, PureNoiseObservationLearnsNothing) {
  const FilterState s = siggame::kalman_step({0.7, 2.0}, 0.0, 1.0, 0.0, 1.5, 1.0, -3.0);
  EXPECT_EQ(s.gain, 0.0);
  EXPECT_EQ(s.sigma_upd, s.sigma_pred);
  EXPECT_EQ(s.x_upd, 0.7);
}

TEST(KalmanStep, SideChannelOnlyUpdate) {
  const FilterState s = siggame::kalman_step({0.0, 1.0}, 5.0, 0.0, 0.0, 1.0, 1.0, 2.0);
  EXPECT_NEAR(s.gain, 0.5, 1e-15);
  EXPECT_NEAR(s.x_upd, 1.0, 1e-15);
  EXPECT_NEAR(s.sigma_upd, 0.5, 1e-15);
}

TEST(KalmanStep, RejectsDegenerateObservation) {
  EXPECT_THROW(siggame::kalman_step({0.0, 0.0}, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0),
               siggame::PreconditionError);
}

TEST(StageBestResponse, TableValues) {
  const auto r1 = siggame::decoder_stage_best_response(1.0, 1.0, 1.0, 1.0);
  EXPECT_NEAR(r1.alpha, 0.5, 1e-15);
  EXPECT_NEAR(r1.gain, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(r1.J_d, 1.0 / 3.0, 1e-15);

  const auto r2 = siggame::decoder_stage_best_response(1.0, 4.0 / 3.0, 1.0, 1.0);
  EXPECT_NEAR(r2.alpha, 0.5, 1e-15);
  EXPECT_NEAR(r2.gain, 8.0 / 11.0, 1e-15);
  EXPECT_NEAR(r2.J_d, 4.0 / 11.0, 1e-15);

  // -1 >= -sqrt(4/1): side channel wins.
  const auto r3 = siggame::decoder_stage_best_response(-1.0, 1.0, 4.0, 1.0);
  EXPECT_EQ(r3.alpha, 0.0);
  EXPECT_NEAR(r3.gain, 0.5, 1e-15);
  EXPECT_NEAR(r3.J_d, 0.5, 1e-15);
}

TEST(MultiStageStackelberg, HorizonZeroReducesToSingleStage) {
  const auto eq = siggame::multistage_stackelberg(flat_instance(0, 1.0 / 9.0));
  ASSERT_EQ(eq.stages.size(), 1u);
  const auto single = siggame::stackelberg_equilibrium({1.0, 1.0, 1.0, 1.0 / 9.0, 0.0});
  EXPECT_EQ(eq.stages[0].A, single.encoder.A);
  EXPECT_EQ(eq.stages[0].alpha, single.decoder.alpha);
  EXPECT_EQ(eq.stages[0].gain, single.decoder.K);
  EXPECT_EQ(eq.stages[0].J_d, single.J_d);
  EXPECT_EQ(eq.stages[0].J_e, single.J_e);
}

TEST(MultiStageStackelberg, CanonicalHorizonOne) {
  const auto eq = siggame::multistage_stackelberg(flat_instance(1, 1.0 / 9.0));
  ASSERT_EQ(eq.stages.size(), 2u);
  EXPECT_NEAR(eq.stages[0].A * eq.stages[0].A, 1.0, 1e-9);
  EXPECT_NEAR(eq.stages[0].J_d, 1.0 / 3.0, 1e-9);
  EXPECT_NEAR(eq.stages[0].J_e, 4.0 / 9.0, 1e-9);
  EXPECT_NEAR(eq.stages[1].sigma_pred, 4.0 / 3.0, 1e-9);
  EXPECT_NEAR(eq.stages[1].A * eq.stages[1].A, kA1Sq, 1e-9);
  EXPECT_NEAR(eq.stages[1].J_d, kJ1, 1e-9);
  EXPECT_NEAR(eq.stages[1].J_e, kJe1, 1e-9);
  EXPECT_NEAR(eq.J_d_avg, 0.5 * (1.0 / 3.0 + kJ1), 1e-9);
  EXPECT_NEAR(eq.J_e_avg, 0.5 * (4.0 / 9.0 + kJe1), 1e-9);
}

TEST(MultiStageStackelberg, LargeThetaSilencesEveryStage) {
  const auto eq = siggame::multistage_stackelberg(flat_instance(1, 10.0));
  EXPECT_EQ(eq.stages[0].A, 0.0);
  EXPECT_EQ(eq.stages[1].A, 0.0);
  EXPECT_NEAR(eq.stages[0].J_d, 0.5, 1e-15);
  EXPECT_NEAR(eq.stages[1].sigma_pred, 1.5, 1e-15);
  EXPECT_NEAR(eq.stages[1].J_d, 0.6, 1e-15);
}

TEST(MultiStageStackelberg, RejectsNonPositiveTheta) {
  MultiStageParams p = flat_instance(1, 0.5);
  p.theta[1] = 0.0;
  EXPECT_THROW(siggame::multistage_stackelberg(p), siggame::ValidationError);
}

TEST(MultiStageLowerBound, HorizonZeroMatchesSingleStageBound) {
  const std::vector<double> powers{1.0};
  const auto lb = siggame::multistage_lower_bound(powers, flat_instance(0, 0.1));
  ASSERT_EQ(lb.size(), 1u);
  EXPECT_NEAR(lb[0], 1.0 / 3.0, 1e-15);
}

TEST(MultiStageLowerBound, AchievedByEquilibriumPowers) {
  const MultiStageParams p = flat_instance(1, 1.0 / 9.0);
  const auto eq = siggame::multistage_stackelberg(p);
  std::vector<double> powers;
  for (const auto& s : eq.stages) powers.push_back(s.A * s.A * s.sigma_pred);
  const auto lb = siggame::multistage_lower_bound(powers, p);
  EXPECT_NEAR(lb[0], 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(lb[1], kJ1, 1e-12);
}

TEST(MultiStageLowerBound, ZeroPowerGivesSideChannelRecursion) {
  const std::vector<double> powers{0.0, 0.0};
  const auto lb = siggame::multistage_lower_bound(powers, flat_instance(1, 0.1));
  EXPECT_NEAR(lb[0], 0.5, 1e-15);
  EXPECT_NEAR(lb[1], 1.5 / 2.5, 1e-15);
}

TEST(MultiStageLowerBound, RejectsBadInput) {
  const MultiStageParams p = flat_instance(1, 0.1);
  const std::vector<double> short_powers{1.0};
  EXPECT_THROW(siggame::multistage_lower_bound(short_powers, p), siggame::ValidationError);
  const std::vector<double> negative{1.0, -1.0};
  EXPECT_THROW(siggame::multistage_lower_bound(negative, p), siggame::PreconditionError);
}

TEST(RunFilter, HorizonZeroMatchesKalmanStep) {
  const std::vector<double> A{1.0}, alpha{0.5}, obs{0.5};
  const auto traj = siggame::run_filter(flat_instance(0, 0.1), A, alpha, obs);
  ASSERT_EQ(traj.size(), 1u);
  EXPECT_NEAR(traj[0].gain, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(traj[0].sigma_upd, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(traj[0].x_upd, 1.0 / 3.0, 1e-15);
}

TEST(RunFilter, UninformativePoliciesFreezeTheVariance) {
  const MultiStageParams p = flat_instance(3, 0.1);
  const std::vector<double> A(4, 0.0), alpha(4, 1.0), obs{1.0, -2.0, 0.3, 4.0};
  const auto traj = siggame::run_filter(p, A, alpha, obs);
  for (const auto& s : traj) {
    EXPECT_EQ(s.sigma_upd, s.sigma_pred);
    EXPECT_EQ(s.gain, 0.0);
  }
}

TEST(RunFilter, EquilibriumPoliciesReachTheStageCosts) {
  const MultiStageParams p = flat_instance(1, 1.0 / 9.0);
  const auto eq = siggame::multistage_stackelberg(p);
  const std::vector<double> A{eq.stages[0].A, eq.stages[1].A};
  const std::vector<double> alpha{eq.stages[0].alpha, eq.stages[1].alpha};
  const std::vector<double> obs{0.4, -1.1};
  const auto traj = siggame::run_filter(p, A, alpha, obs);
  EXPECT_NEAR(traj[0].sigma_upd, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(traj[1].sigma_upd, kJ1, 1e-12);
}

TEST(RunFilter, RejectsLengthMismatch) {
  const MultiStageParams p = flat_instance(1, 0.1);
  const std::vector<double> A{1.0}, alpha{0.5, 0.5}, obs{0.0, 0.0};
  EXPECT_THROW(siggame::run_filter(p, A, alpha, obs), siggame::ValidationError);
}

// The filtered variance equals the stage-wise best-response cost whenever the
// combining ratios are the table optima.
TEST(RunFilter, VarianceCostIdentity) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> slope(0.0, 3.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const MultiStageParams p = random_instance(rng, 4);
    std::vector<double> A;
    for (int t = 0; t <= p.n; ++t) A.push_back(slope(rng));
    const auto sched = siggame::table_optimal_schedule(p, A);
    std::vector<double> obs;
    for (int t = 0; t <= p.n; ++t) obs.push_back(noise(rng));
    const auto traj = siggame::run_filter(p, A, sched.alpha, obs);
    double sigma_pred = p.sigma_x0_2;
    for (int t = 0; t <= p.n; ++t) {
      const auto i = static_cast<std::size_t>(t);
      const auto resp =
          siggame::decoder_stage_best_response(A[i], sigma_pred, p.sigma_v2[i], p.sigma_w2[i]);
      ASSERT_NEAR(traj[i].sigma_upd, resp.J_d, 1e-12);
      ASSERT_NEAR(traj[i].gain, resp.gain, 1e-12);
      if (t < p.n) sigma_pred = p.beta[i] * p.beta[i] * resp.J_d + p.sigma_n2[i];
    }
  }
}

// Updating on an observation never increases the variance, and the innovation
// variance never drops below its noise floor.
TEST(KalmanStep, StateInvariants) {
  std::mt19937_64 rng(27);
  std::uniform_real_distribution<double> slope(-4.0, 4.0);
  std::uniform_real_distribution<double> ratio(0.0, 1.0);
  std::uniform_real_distribution<double> var(0.25, 4.0);
  std::normal_distribution<double> obs(0.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const double sigma_pred = var(rng);
    const double alpha = ratio(rng);
    const double sv = var(rng), sw = var(rng);
    const FilterState s =
        siggame::kalman_step({obs(rng), sigma_pred}, slope(rng), alpha, 0.0, sv, sw, obs(rng));
    EXPECT_GE(s.sigma_upd, -1e-15);
    EXPECT_LE(s.sigma_upd, s.sigma_pred + 1e-15);
    const double noise_floor = (1.0 - alpha) * (1.0 - alpha) * sw + alpha * alpha * sv;
    EXPECT_GE(s.innov_var, noise_floor - 1e-15);
  }
}

// The covariance recursion never looks at the observed values.
TEST(RunFilter, ObservationIndependence) {
  std::mt19937_64 rng(22);
  const MultiStageParams p = random_instance(rng, 3);
  const std::vector<double> A{1.0, -0.5, 2.0, 0.0};
  const std::vector<double> alpha{0.3, 0.0, 0.9, 1.0};
  const std::vector<double> obs_a{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> obs_b{-5.0, 4.0, 0.1, -0.7};
  const auto ta = siggame::run_filter(p, A, alpha, obs_a);
  const auto tb = siggame::run_filter(p, A, alpha, obs_b);
  for (std::size_t t = 0; t < ta.size(); ++t) {
    EXPECT_EQ(ta[t].sigma_pred, tb[t].sigma_pred);
    EXPECT_EQ(ta[t].sigma_upd, tb[t].sigma_upd);
    EXPECT_EQ(ta[t].gain, tb[t].gain);
  }
}

// Stage-wise best response never loses to a dense grid in alpha.
TEST(StageBestResponse, NeverWorseThanGridOracle) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> slope(-4.0, 4.0);
  std::uniform_real_distribution<double> var(0.25, 4.0);
  for (int i = 0; i < 30; ++i) {
    const double sigma_pred = var(rng);
    const GameParams stage{sigma_pred, var(rng), var(rng), 0.1, 0.0};
    const double A = slope(rng);
    const auto resp =
        siggame::decoder_stage_best_response(A, sigma_pred, stage.sigma_v2, stage.sigma_w2);
    const auto grid = siggame::brute_force_decoder_oracle(A, 0.0, stage, 1e-3);
    EXPECT_LE(resp.J_d, grid.J_d + 1e-9);
  }
}

// First-order stationarity of the per-stage objective: nudging any single
// squared slope (with the equilibrium variance sequence held fixed, as the
// forward decoupling prescribes) cannot reduce the average encoder cost.
TEST(MultiStageStackelberg, PerStageStationarity) {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 12; ++trial) {
    const MultiStageParams p =
        trial == 0 ? flat_instance(1, 1.0 / 9.0) : random_instance(rng, 3);
    const auto eq = siggame::multistage_stackelberg(p);
    auto stage_cost = [&](std::size_t t, double A2) {
      const double sp = eq.stages[t].sigma_pred;
      const double w = p.sigma_w2[t];
      const double v = p.sigma_v2[t];
      const double J_d = sp * w * v / ((A2 * w + v) * sp + w * v);
      return J_d + p.theta[t] * A2 * sp + p.bias[t] * p.bias[t];
    };
    const double delta = 1e-3;
    for (std::size_t t = 0; t < eq.stages.size(); ++t) {
      const double A2 = eq.stages[t].A * eq.stages[t].A;
      const double base = stage_cost(t, A2);
      EXPECT_GE(stage_cost(t, A2 + delta), base - 1e-12);
      if (A2 >= delta) {
        EXPECT_GE(stage_cost(t, A2 - delta), base - 1e-12);
      }
    }
  }
}

TEST(MultiStageStackelberg, HorizonZeroBitExactOnRandomInstances) {
  std::mt19937_64 rng(25);
  for (int i = 0; i < 50; ++i) {
    const MultiStageParams p = random_instance(rng, 0);
    const GameParams single{p.sigma_x0_2, p.sigma_v2[0], p.sigma_w2[0], p.theta[0], p.bias[0]};
    const auto multi = siggame::multistage_stackelberg(p);
    const auto eq = siggame::stackelberg_equilibrium(single);
    EXPECT_EQ(multi.stages[0].A, eq.encoder.A);
    EXPECT_EQ(multi.stages[0].alpha, eq.decoder.alpha);
    EXPECT_EQ(multi.stages[0].gain, eq.decoder.K);
    EXPECT_EQ(multi.stages[0].J_d, eq.J_d);
    EXPECT_EQ(multi.stages[0].J_e, eq.J_e);
    EXPECT_EQ(multi.J_d_avg, eq.J_d);
    EXPECT_EQ(multi.J_e_avg, eq.J_e);
  }
}

// schedule_performance prices the table-optimal schedule exactly like the
// best-response table, and strictly worse once the gain is detuned.
TEST(SchedulePerformance, MatchesTableOptimumAndPenalizesDetuning) {
  std::mt19937_64 rng(28);
  std::uniform_real_distribution<double> slope(0.0, 3.0);
  for (int trial = 0; trial < 10; ++trial) {
    const MultiStageParams p = random_instance(rng, 3);
    std::vector<double> A;
    for (int t = 0; t <= p.n; ++t) A.push_back(slope(rng));
    const auto sched = siggame::table_optimal_schedule(p, A);
    const auto perf = siggame::schedule_performance(p, A, sched.alpha, sched.gain);
    double sigma_pred = p.sigma_x0_2;
    for (int t = 0; t <= p.n; ++t) {
      const auto i = static_cast<std::size_t>(t);
      const auto resp =
          siggame::decoder_stage_best_response(A[i], sigma_pred, p.sigma_v2[i], p.sigma_w2[i]);
      ASSERT_NEAR(perf.sigma_upd[i], resp.J_d, 1e-12);
      if (t < p.n) sigma_pred = p.beta[i] * p.beta[i] * resp.J_d + p.sigma_n2[i];
    }
    auto detuned = sched;
    for (auto& g : detuned.gain) g *= 1.2;
    const auto worse = siggame::schedule_performance(p, A, detuned.alpha, detuned.gain);
    EXPECT_GT(worse.sigma_upd[0], perf.sigma_upd[0]);
  }
}

// Table-row costs with nonnegative slopes achieve the forward lower bound at
// the matching innovation powers, stage by stage.
TEST(MultiStageLowerBound, MatchesTableCostsForNonnegativeSlopes) {
  std::mt19937_64 rng(26);
  std::uniform_real_distribution<double> slope(0.0, 4.0);
  for (int trial = 0; trial < 30; ++trial) {
    const MultiStageParams p = random_instance(rng, 3);
    std::vector<double> A, powers, costs;
    double sigma_pred = p.sigma_x0_2;
    for (int t = 0; t <= p.n; ++t) {
      const auto i = static_cast<std::size_t>(t);
      A.push_back(slope(rng));
      const auto resp =
          siggame::decoder_stage_best_response(A[i], sigma_pred, p.sigma_v2[i], p.sigma_w2[i]);
      powers.push_back(A[i] * A[i] * sigma_pred);
      costs.push_back(resp.J_d);
      if (t < p.n) sigma_pred = p.beta[i] * p.beta[i] * resp.J_d + p.sigma_n2[i];
    }
    const auto lb = siggame::multistage_lower_bound(powers, p);
    for (std::size_t t = 0; t < costs.size(); ++t) {
      ASSERT_NEAR(lb[t], costs[t], 1e-12);
    }
  }
}

}  // namespace
