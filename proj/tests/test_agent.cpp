#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "dss/agent.hpp"

using namespace dss;

namespace {

DemandTrace make_trace(std::vector<double> demands, RanId id = RanId::A) {
  DemandTrace t;
  t.ran_id = id;
  t.demands = std::move(demands);
  return t;
}

AgentConfig small_config() {
  AgentConfig cfg;
  cfg.hidden1 = 8;
  cfg.hidden2 = 8;
  cfg.history_n = 1;
  cfg.batch_size = 8;
  cfg.seed = 42;
  return cfg;
}

Observation const_observation(int history_n, double d_a, double d_b) {
  Observation obs;
  for (int k = 0; k <= history_n; ++k) obs.pairs.emplace_back(d_a, d_b);
  return obs;
}

}  // namespace

TEST_CASE("select_action maps the actor output onto the pool split") {
  RewardParams params;
  params.n_r = 100;
  // zero-weight sigmoid actor outputs exactly 0.5
  Mlp actor({4, 1}, OutputActivation::sigmoid);
  const auto obs = const_observation(1, 30, 40);
  const double f = select_action(obs, actor, params, false, 0.0, nullptr);
  CHECK(f == doctest::Approx(0.5));
  const Allocation alloc = fraction_to_allocation(f, params);
  CHECK(alloc.n_a == doctest::Approx(50.0));
  CHECK(alloc.n_b == doctest::Approx(50.0));
}

TEST_CASE("pre-clip outputs beyond [0,1] are clipped") {
  RewardParams params;
  // linear head can exceed 1: bias 1.2, no input weights
  Mlp actor({4, 1}, OutputActivation::linear);
  actor.params().back() = 1.2;
  const auto obs = const_observation(1, 0, 0);
  CHECK(select_action(obs, actor, params, false, 0.0, nullptr) == 1.0);
  actor.params().back() = -0.3;
  CHECK(select_action(obs, actor, params, false, 0.0, nullptr) == 0.0);
}

TEST_CASE("zero exploration noise equals the deterministic action") {
  RewardParams params;
  Mlp actor({4, 1}, OutputActivation::sigmoid);
  std::mt19937_64 rng(1);
  actor.init_uniform(rng);
  const auto obs = const_observation(1, 20, 30);
  const double det = select_action(obs, actor, params, false, 0.0, nullptr);
  const double expl = select_action(obs, actor, params, true, 0.0, &rng);
  CHECK(det == expl);
}

TEST_CASE("non-finite actor output is reported as divergence") {
  RewardParams params;
  Mlp actor({2, 1}, OutputActivation::linear);
  actor.params()[0] = std::nan("");
  CHECK_THROWS_AS(select_action(const_observation(0, 1, 1), actor, params, false,
                                0.0, nullptr),
                  std::runtime_error);
}

TEST_CASE("replay buffer evicts FIFO") {
  ReplayBuffer buf(5);
  for (int i = 0; i < 8; ++i) buf.push({{}, double(i), 0.0});
  CHECK(buf.size() == 5);
  // first 3 evicted: oldest remaining is action 3
  CHECK(buf.at(0).action == 3.0);
  CHECK(buf.at(4).action == 7.0);
}

TEST_CASE("replay sampling is uniform over the stored range") {
  ReplayBuffer buf(100);
  for (int i = 0; i < 50; ++i) buf.push({{}, double(i), 0.0});
  std::mt19937_64 rng(3);
  const auto batch = buf.sample(200, rng);
  for (const Transition* t : batch) CHECK(t->action < 50.0);
}

TEST_CASE("critic regresses a single repeated transition to its reward") {
  auto cfg = small_config();
  cfg.critic_lr = 1e-2;
  RewardParams params;
  Td3Agent agent(cfg, params);
  Transition tr{{0.1, 0.2, 0.3, 0.4}, 0.6, -0.7};
  std::vector<const Transition*> batch{&tr};
  for (int i = 0; i < 1500; ++i) agent.critic_update(batch);
  std::vector<double> input = tr.observation;
  input.push_back(tr.action);
  CHECK(std::abs(agent.networks().critic1.forward(input)[0] - tr.reward) < 1e-2);
  CHECK(std::abs(agent.networks().critic2.forward(input)[0] - tr.reward) < 1e-2);
}

TEST_CASE("critic converges to the least-squares mean of conflicting rewards") {
  auto cfg = small_config();
  cfg.critic_lr = 1e-2;
  RewardParams params;
  Td3Agent agent(cfg, params);
  Transition t1{{0.5, 0.5, 0.5, 0.5}, 0.3, -1.0};
  Transition t2{{0.5, 0.5, 0.5, 0.5}, 0.3, 0.0};
  std::vector<const Transition*> batch{&t1, &t2};
  for (int i = 0; i < 3000; ++i) agent.critic_update(batch);
  std::vector<double> input = t1.observation;
  input.push_back(t1.action);
  CHECK(agent.networks().critic1.forward(input)[0] == doctest::Approx(-0.5).epsilon(0.02));
}

TEST_CASE("critic target uses only (observation, action, reward)") {
  // Transitions carry no next state at all, so no bootstrap term can leak in:
  // the regression target of a batch with reward r converges to r itself even
  // with wildly wrong target networks.
  auto cfg = small_config();
  cfg.critic_lr = 1e-2;
  RewardParams params;
  Td3Agent agent(cfg, params);
  for (double& p : agent.networks().target_critic1.params()) p = 1000.0;
  Transition tr{{0.2, 0.1, 0.0, 0.9}, 0.4, -0.25};
  std::vector<const Transition*> batch{&tr};
  for (int i = 0; i < 1500; ++i) agent.critic_update(batch);
  std::vector<double> input = tr.observation;
  input.push_back(tr.action);
  CHECK(std::abs(agent.networks().critic1.forward(input)[0] - tr.reward) < 1e-2);
}

TEST_CASE("twin critics stay identical under identical init and batches") {
  auto cfg = small_config();
  RewardParams params;
  Td3Agent agent(cfg, params);
  agent.networks().critic2 = agent.networks().critic1;
  Transition t1{{0.1, 0.9, 0.4, 0.2}, 0.5, -0.3};
  Transition t2{{0.8, 0.2, 0.6, 0.1}, 0.2, -0.9};
  std::vector<const Transition*> batch{&t1, &t2};
  for (int i = 0; i < 50; ++i) agent.critic_update(batch);
  CHECK(agent.networks().critic1.params() == agent.networks().critic2.params());
}

TEST_CASE("actor update soft-updates all targets") {
  auto cfg = small_config();
  cfg.tau = 1.0;  // full copy
  RewardParams params;
  Td3Agent agent(cfg, params);
  Transition tr{{0.1, 0.2, 0.3, 0.4}, 0.5, -0.1};
  std::vector<const Transition*> batch{&tr};
  agent.critic_update(batch);
  agent.actor_update(batch);
  CHECK(agent.networks().target_actor.params() == agent.networks().actor.params());
  CHECK(agent.networks().target_critic1.params() == agent.networks().critic1.params());
  CHECK(agent.networks().target_critic2.params() == agent.networks().critic2.params());
}

TEST_CASE("policy delay schedules one actor step per two critic steps") {
  auto cfg = small_config();
  cfg.policy_delay = 2;
  RewardParams params;
  params.n_r = 50;
  Td3Agent agent(cfg, params);
  TracePair traces{make_trace(std::vector<double>(40, 20.0)),
                   make_trace(std::vector<double>(40, 30.0), RanId::B)};
  agent.train(traces, 101);
  CHECK(agent.actor_steps() == agent.critic_steps() / 2);
  CHECK(agent.critic_steps() == 101 - cfg.batch_size + 1);
}

TEST_CASE("train with zero steps leaves the initialization untouched") {
  auto cfg = small_config();
  RewardParams params;
  Td3Agent reference(cfg, params);
  Td3Agent agent(cfg, params);
  TracePair traces{make_trace(std::vector<double>(10, 20.0)),
                   make_trace(std::vector<double>(10, 30.0), RanId::B)};
  const auto log = agent.train(traces, 0);
  CHECK(log.empty());
  CHECK(agent.networks().actor.params() == reference.networks().actor.params());
}

TEST_CASE("training is bit-identical for a fixed seed") {
  auto cfg = small_config();
  RewardParams params;
  params.n_r = 60;
  TracePair traces{make_trace({20, 25, 30, 22, 28, 26, 21, 24, 29, 23}),
                   make_trace({30, 28, 26, 32, 27, 25, 31, 29, 26, 30}, RanId::B)};
  Td3Agent a1(cfg, params), a2(cfg, params);
  const auto log1 = a1.train(traces, 200);
  const auto log2 = a2.train(traces, 200);
  REQUIRE(log1.size() == log2.size());
  for (std::size_t i = 0; i < log1.size(); ++i) {
    CHECK(log1[i].reward == log2[i].reward);
    CHECK(log1[i].critic1_loss == log2[i].critic1_loss);
  }
  CHECK(a1.networks().actor.params() == a2.networks().actor.params());
}

TEST_CASE("gradient checks: critic and actor losses vs finite differences") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    Mlp actor({4, 5, 1}, OutputActivation::sigmoid);
    Mlp critic({5, 5, 1}, OutputActivation::linear);
    actor.init_uniform(rng);
    critic.init_uniform(rng);
    std::vector<Transition> transitions(3);
    for (auto& t : transitions) {
      t.observation = {dist(rng), dist(rng), dist(rng), dist(rng)};
      t.action = 0.5 + 0.4 * dist(rng);
      t.reward = dist(rng);
    }
    std::vector<const Transition*> batch;
    for (auto& t : transitions) batch.push_back(&t);

    const auto c_lg = critic_loss_and_grad(critic, batch);
    const double h = 1e-6;
    for (std::size_t i = 0; i < critic.params().size(); i += 7) {
      const double orig = critic.params()[i];
      critic.params()[i] = orig + h;
      const double lp = critic_loss_and_grad(critic, batch).loss;
      critic.params()[i] = orig - h;
      const double lm = critic_loss_and_grad(critic, batch).loss;
      critic.params()[i] = orig;
      CHECK(c_lg.grad[i] == doctest::Approx((lp - lm) / (2 * h)).epsilon(1e-4));
    }

    const auto a_lg = actor_loss_and_grad(actor, critic, batch);
    for (std::size_t i = 0; i < actor.params().size(); i += 5) {
      const double orig = actor.params()[i];
      actor.params()[i] = orig + h;
      const double lp = actor_loss_and_grad(actor, critic, batch).loss;
      actor.params()[i] = orig - h;
      const double lm = actor_loss_and_grad(actor, critic, batch).loss;
      actor.params()[i] = orig;
      CHECK(a_lg.grad[i] == doctest::Approx((lp - lm) / (2 * h)).epsilon(1e-4));
    }
  }
}

TEST_CASE("evaluation: oracle dominates, every allocation is feasible") {
  auto cfg = small_config();
  RewardParams params;
  params.n_r = 80;
  Td3Agent agent(cfg, params);
  TracePair eval{make_trace({20, 35, 28, 40, 22, 31}),
                 make_trace({30, 25, 38, 20, 36, 27}, RanId::B)};
  const Allocation quasi{40, 40};
  const auto report =
      evaluate(agent.networks().actor, eval, quasi, params, cfg.history_n);
  CHECK(report.oracle.metrics.mean_imbalance <=
        report.learned.metrics.mean_imbalance + 1e-12);
  CHECK(report.oracle.metrics.mean_imbalance <=
        report.quasi_static.metrics.mean_imbalance + 1e-12);
  for (const auto& series :
       {report.learned.steps, report.quasi_static.steps, report.oracle.steps})
    for (const auto& s : series) {
      CHECK(s.allocation.n_a + s.allocation.n_b == doctest::Approx(params.n_r).epsilon(1e-12));
      CHECK(s.allocation.n_a >= 0.0);
      CHECK(s.allocation.n_a <= params.n_r);
    }
}

TEST_CASE("quasi-static on constant traces with exact pool scores zero J") {
  auto cfg = small_config();
  RewardParams params;
  params.n_r = 70;
  Td3Agent agent(cfg, params);
  TracePair eval{make_trace(std::vector<double>(5, 30.0)),
                 make_trace(std::vector<double>(5, 40.0), RanId::B)};
  const auto report = evaluate(agent.networks().actor, eval, {30, 40}, params,
                               cfg.history_n);
  CHECK(report.quasi_static.metrics.mean_imbalance ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("checkpoint round trip and shape rejection") {
  auto cfg = small_config();
  RewardParams params;
  Td3Agent agent(cfg, params);
  const auto path =
      (std::filesystem::temp_directory_path() / "ckpt_test.json").string();
  save_checkpoint(path, agent.networks(), cfg, params);
  const auto loaded = load_checkpoint(path);
  CHECK(loaded.networks.actor.params() == agent.networks().actor.params());
  CHECK(loaded.networks.target_critic2.params() ==
        agent.networks().target_critic2.params());
  CHECK(loaded.config.seed == cfg.seed);
  CHECK(loaded.params.n_r == params.n_r);

  // mismatched history_n vs stored actor input must be rejected on load
  auto bad = cfg;
  bad.history_n = 3;
  save_checkpoint(path, agent.networks(), bad, params);
  CHECK_THROWS_AS((void)load_checkpoint(path), std::runtime_error);
}

TEST_CASE("training log round trip") {
  std::vector<TrainLogEntry> log(3);
  log[0] = {0, -0.5, 0, 0, false, false, 0};
  log[1] = {1, -0.25, 0.125, 0.25, true, false, 0};
  log[2] = {2, -0.125, 0.1, 0.2, true, true, -0.3};
  const auto path =
      (std::filesystem::temp_directory_path() / "trainlog_test.csv").string();
  save_training_log(log, path);
  const auto loaded = load_training_log(path);
  REQUIRE(loaded.size() == 3);
  CHECK(loaded[0].reward == -0.5);
  CHECK(!loaded[0].learned);
  CHECK(loaded[1].critic2_loss == 0.25);
  CHECK(loaded[2].actor_updated);
  CHECK(loaded[2].actor_loss == -0.3);
}
