#include "mlb/env.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace mlb;

namespace {

double sigmoid_oracle(double x, double c, double slope, double centre) {
  return 1.0 + c / (1.0 + std::exp(-slope * (x - centre)));
}

KpiWindow window(std::vector<double> rbu, std::vector<double> att) {
  KpiWindow k;
  for (std::size_t c = 0; c < rbu.size(); ++c) k.cells.push_back({rbu[c], 0, att[c]});
  return k;
}

SimConfig idle_sim() {
  SimConfig cfg;
  cfg.n_cbr = 0;
  cfg.poisson = FlowSpec::poisson(32, 1e-9);
  return cfg;
}

}  // namespace

TEST(ActionSpace, PermutationCount) {
  const auto a = ActionSpace::standard();
  EXPECT_EQ(a.size(), 7u * 6 * 5);
  EXPECT_EQ(a.decode(0), (std::vector<double>{-9, -6, -3}));
  EXPECT_EQ(a.decode(1), (std::vector<double>{-9, -6, 0}));
  EXPECT_EQ(a.decode(209), (std::vector<double>{9, 6, 3}));
  EXPECT_THROW(a.decode(210), InvalidInput);
}

TEST(ActionSpace, ProductMode) {
  const auto a = ActionSpace::standard(3, ActionMode::Product);
  EXPECT_EQ(a.size(), 343u);
  EXPECT_EQ(a.decode(0), (std::vector<double>{-9, -9, -9}));
  EXPECT_EQ(a.decode(342), (std::vector<double>{9, 9, 9}));
  EXPECT_EQ(a.encode(std::vector<double>{0, 0, 0}), 3u * 49 + 3 * 7 + 3);
}

TEST(ActionSpace, BijectionBothModes) {
  for (auto mode : {ActionMode::Permutations, ActionMode::Product}) {
    const auto a = ActionSpace::standard(3, mode);
    std::set<std::vector<double>> seen;
    std::vector<double> prev;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto v = a.decode(i);
      ASSERT_TRUE(seen.insert(v).second) << i;
      ASSERT_EQ(a.encode(v), i);
      if (mode == ActionMode::Permutations) ASSERT_EQ(std::set<double>(v.begin(), v.end()).size(), 3u);
      if (i > 0) ASSERT_LT(prev, v);  // lexicographic order
      prev = v;
    }
  }
}

TEST(ActionSpace, PermutationOracle) {
  // every ordered selection by nested loops, in lexicographic order
  const std::vector<double> vals{-9, -6, -3, 0, 3, 6, 9};
  const auto a = ActionSpace::standard();
  std::size_t idx = 0;
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 7; ++j)
      for (std::size_t k = 0; k < 7; ++k) {
        if (i == j || j == k || i == k) continue;
        EXPECT_EQ(a.decode(idx++), (std::vector<double>{vals[i], vals[j], vals[k]}));
      }
  EXPECT_EQ(idx, a.size());
}

TEST(ActionSpace, Validation) {
  EXPECT_THROW(ActionSpace({}, 3), InvalidInput);
  EXPECT_THROW(ActionSpace({1, 1, 2}, 2), InvalidInput);
  EXPECT_THROW(ActionSpace({1, 2}, 3), InvalidInput);
  EXPECT_NO_THROW(ActionSpace({1, 2}, 3, ActionMode::Product));
  const auto a = ActionSpace::standard();
  EXPECT_THROW(a.encode(std::vector<double>{0, 0, 3}), InvalidInput);
  EXPECT_THROW(a.encode(std::vector<double>{0, 1, 3}), InvalidInput);
}

TEST(State, Concatenation) {
  const auto k = window({0, 0.9, 0}, {0, 1, 0});
  Vector want(6);
  want << 0, 1, 0, 0, 0.9, 0;
  EXPECT_EQ(build_state(k), want);
  EXPECT_TRUE(build_state(window({0, 0, 0}, {0, 0, 0})).isZero());
}

TEST(Reward, Constants) {
  RewardConfig cfg;
  EXPECT_NEAR(cfg.target_delay_s(), 0.1, 1e-15);
  std::vector<UeDelaySample> at_target(5, {true, 0.1});
  EXPECT_NEAR(reward_delay(at_target, cfg), 0.0, 1e-12);
  std::vector<UeDelaySample> instant(5, {true, 0.0});
  EXPECT_NEAR(reward_delay(instant, cfg), 1.0 - 2.0 / (1.0 + std::exp(7.5)), 1e-15);
  EXPECT_NEAR(reward_delay(instant, cfg), 0.99889, 1e-4);
  std::vector<UeDelaySample> gone(5, {false, 0.0});
  EXPECT_EQ(reward_delay(gone, cfg), -1.0);

  Vector p(3);
  p << 0.1, 0.6, 0.3;
  EXPECT_NEAR(reward_rbu(p, cfg), 0.0, 1e-12);
  p << 1.0, 0.2, 0.0;
  EXPECT_NEAR(reward_rbu(p, cfg), 1.0 - 2.0 / (1.0 + std::exp(-8.0)), 1e-15);
  EXPECT_NEAR(reward_rbu(p, cfg), -0.99933, 1e-4);
  p.setZero();
  EXPECT_NEAR(reward_rbu(p, cfg), 1.0 - 2.0 / (1.0 + std::exp(12.0)), 1e-15);
}

TEST(Reward, CqiBands) {
  RewardConfig cfg;
  EXPECT_EQ(cqi_band(3, cfg), -1.0);
  EXPECT_EQ(cqi_band(6, cfg), -1.0);
  EXPECT_EQ(cqi_band(7, cfg), 0.0);
  EXPECT_EQ(cqi_band(8, cfg), 0.0);
  EXPECT_EQ(cqi_band(9, cfg), 0.0);
  EXPECT_EQ(cqi_band(10, cfg), 1.0);
  EXPECT_EQ(reward_cqi(std::vector<int>(4, 15), cfg), 1.0);
  EXPECT_DOUBLE_EQ(reward_cqi(std::vector<int>{3, 8, 15, 15}, cfg), 0.25);
  cfg.literal_cqi_bands = true;
  EXPECT_EQ(cqi_band(6, cfg), 1.0);
  EXPECT_EQ(cqi_band(5, cfg), -1.0);
}

TEST(Reward, RangesAndComposition) {
  Rng rng(13);
  for (int trial = 0; trial < 5000; ++trial) {
    RewardConfig cfg;
    cfg.w1 = rng.uniform(-3, 3);
    cfg.w2 = rng.uniform(-3, 3);
    cfg.w3 = rng.uniform(-3, 3);
    KpiWindow k;
    for (int c = 0; c < 3; ++c) k.cells.push_back({rng.uniform(), 0, 0});
    const int n = 1 + static_cast<int>(rng.index(40));
    for (int i = 0; i < n; ++i) {
      UeKpi u;
      u.connected = rng.uniform() < 0.9;
      u.mean_delay_ms = rng.uniform(0, 2000);
      u.cqi = static_cast<int>(rng.index(16));
      k.ues.push_back(u);
    }
    const auto r = compute_reward(k, cfg);
    for (double x : {r.r_delay, r.r_rbu, r.r_cqi}) {
      ASSERT_GE(x, -1.0);
      ASSERT_LE(x, 1.0);
    }
    ASSERT_EQ(r.total, cfg.w1 * r.r_delay + cfg.w2 * r.r_rbu + cfg.w3 * r.r_cqi);
    ASSERT_NEAR(r.r_rbu, sigmoid_oracle(k.rbu_vector().maxCoeff(), -2, 20, 0.6), 1e-15);
  }
}

TEST(Reward, Monotone) {
  RewardConfig cfg;
  Rng rng(14);
  std::vector<UeDelaySample> ues(6);
  for (auto& u : ues) u = {true, rng.uniform(0, 0.3)};
  double prev = reward_delay(ues, cfg);
  for (int i = 0; i < 200; ++i) {
    ues[i % 6].d_avg_s += rng.uniform(0, 0.01);
    const double r = reward_delay(ues, cfg);
    EXPECT_LE(r, prev);
    prev = r;
  }
  Vector p = Vector::Zero(3);
  prev = reward_rbu(p, cfg);
  for (double x = 0.0; x <= 1.0; x += 0.01) {
    p[1] = x;
    const double r = reward_rbu(p, cfg);
    EXPECT_LE(r, prev);
    prev = r;
  }
}

TEST(Env, InitialStateAndShape) {
  BalancerEnv env(SimConfig{}, RewardConfig{}, ActionSpace::standard(), 1);
  const Vector s = env.reset(0);
  Vector want = Vector::Zero(6);
  want[1] = 1.0;
  EXPECT_EQ(s, want);
  EXPECT_EQ(env.state_size(), 6);
  EXPECT_THROW(BalancerEnv(SimConfig{}, RewardConfig{}, ActionSpace::standard(2), 1), InvalidInput);
}

TEST(Env, StepAppliesDecodedOffsets) {
  BalancerEnv env(SimConfig{}, RewardConfig{}, ActionSpace::standard(), 1, 200);
  env.reset(0);
  const auto r = env.step(17);
  EXPECT_EQ(r.cio_db, env.actions().decode(17));
  EXPECT_EQ(env.sim().config().handover.cio_db, env.actions().decode(17));
  EXPECT_EQ(r.state.size(), 6);
  EXPECT_TRUE((r.state.array() >= 0).all() && (r.state.array() <= 1).all());
  EXPECT_GE(r.reward.total, -3.0);
  EXPECT_LE(r.reward.total, 3.0);
  EXPECT_THROW(env.step(210), InvalidInput);
}

TEST(Env, IdleNetworkNearServingSites) {
  BalancerEnv env(idle_sim(), RewardConfig{}, ActionSpace::standard(), 1);
  env.reset(0);
  for (int i = 0; i < 30; ++i) env.sim().set_ue_position(i, Point(720.0 + 2 * i, 10.0));
  const auto r = env.step_passive();
  const double rd = 1 - 2 / (1 + std::exp(7.5)), rr = 1 - 2 / (1 + std::exp(12.0));
  EXPECT_NEAR(r.reward.r_delay, rd, 1e-12);
  EXPECT_NEAR(r.reward.r_rbu, rr, 1e-12);
  EXPECT_EQ(r.reward.r_cqi, 1.0);
  EXPECT_NEAR(r.reward.total, 2.9989, 1e-4);
}

TEST(Env, ForcedOffloadDisconnectsUsers) {
  SimConfig cfg;
  cfg.edge_fraction = 1.0;
  const auto space = ActionSpace::standard(3, ActionMode::Product);
  BalancerEnv neutral(cfg, RewardConfig{}, space, 2), pushed(cfg, RewardConfig{}, space, 2);
  neutral.reset(0);
  pushed.reset(0);
  const auto a = neutral.step(space.encode(std::vector<double>{0, 0, 0}));
  const auto b = pushed.step(space.encode(std::vector<double>{9, -9, 9}));
  int lost = 0;
  for (const auto& u : b.kpi.ues) lost += !u.connected;
  EXPECT_GT(lost, 0);
  EXPECT_LT(b.reward.r_delay, a.reward.r_delay);
}

TEST(Training, CountsTransitionsAndDecays) {
  cdql::AgentConfig acfg;
  acfg.hidden = {16, 16};
  BalancerEnv env(SimConfig{}, RewardConfig{}, ActionSpace::standard(), 3, 100);
  cdql::CdqlAgent agent(6, 210, acfg, 3);
  int calls = 0;
  const auto logs = run_training(env, agent, 3, 4, [&](int, int, const StepResult&) { ++calls; });
  EXPECT_EQ(calls, 12);
  EXPECT_EQ(agent.buffer().size(), 12u);
  ASSERT_EQ(logs.size(), 3u);
  EXPECT_NEAR(agent.epsilon(), std::pow(0.995, 12), 1e-12);
  EXPECT_NEAR(logs[0].epsilon, std::pow(0.995, 4), 1e-12);

  // 7500 decays end on the floor
  double e = 1.0;
  for (int i = 0; i < 7500; ++i) e = cdql::decay_epsilon(e, acfg);
  EXPECT_EQ(e, acfg.epsilon_min);
}

TEST(Training, ZeroWeightsGiveFlatLog) {
  RewardConfig rc;
  rc.w1 = rc.w2 = rc.w3 = 0.0;
  cdql::AgentConfig acfg;
  acfg.hidden = {8};
  BalancerEnv env(SimConfig{}, rc, ActionSpace::standard(), 3, 100);
  cdql::CdqlAgent agent(6, 210, acfg, 3);
  for (const auto& l : run_training(env, agent, 2, 3)) EXPECT_EQ(l.cumulative_reward, 0.0);
}

TEST(Training, Deterministic) {
  cdql::AgentConfig acfg;
  acfg.hidden = {8, 8};
  acfg.batch = 2;
  auto run = [&] {
    BalancerEnv env(SimConfig{}, RewardConfig{}, ActionSpace::standard(), 4, 100);
    cdql::CdqlAgent agent(6, 210, acfg, 4);
    std::vector<double> out;
    for (const auto& l : run_training(env, agent, 2, 5)) out.push_back(l.cumulative_reward);
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST(Episode, PassivePolicyKeepsOffsets) {
  BalancerEnv env(SimConfig{}, RewardConfig{}, ActionSpace::standard(), 5, 100);
  const auto log = run_episode(env, {}, 0, 3);
  EXPECT_EQ(log.episode, 0);
  EXPECT_EQ(env.sim().config().handover.cio_db, (std::vector<double>{0, 0, 0}));
}
