#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dss/env.hpp"
#include "dss/metrics.hpp"
#include "dss/mlp.hpp"
#include "dss/trace.hpp"

namespace dss {

struct AgentConfig {
  int hidden1 = 64;
  int hidden2 = 64;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  int batch_size = 64;
  int buffer_capacity = 50000;
  double exploration_noise_std = 0.1;   // in action (fraction) units
  double target_smoothing_std = 0.05;   // bookkeeping only: no next state
  double target_noise_clip = 0.1;       // bookkeeping only
  int policy_delay = 2;
  double tau = 0.01;
  double gamma = 0.0;     // housed for the discounted-return form; bandit mode
  int horizon_T = 1000;   // evaluation episode length when trimming windows
  std::uint64_t seed = 0;
  int history_n = 4;

  void validate() const;
  int observation_dim() const { return 2 * (history_n + 1); }
};

/// One bandit transition. The observation is flattened and pre-scaled by
/// 1/n_r; episodes terminate after one step so no next state is stored.
struct Transition {
  std::vector<double> observation;
  double action = 0.0;  // pool-split fraction f in [0,1]
  double reward = 0.0;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);  // FIFO eviction once full
  std::size_t size() const { return storage_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t logical_index) const;  // 0 = oldest

  std::vector<const Transition*> sample(std::size_t batch, std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // next write position once full
  std::vector<Transition> storage_;
};

/// Online and target copies of the TD3 function approximators.
struct Td3Networks {
  Mlp actor, critic1, critic2;
  Mlp target_actor, target_critic1, target_critic2;

  static Td3Networks initialize(const AgentConfig& cfg, std::mt19937_64& rng);
};

struct TrainLogEntry {
  long step = 0;
  double reward = 0.0;
  double critic1_loss = 0.0;
  double critic2_loss = 0.0;
  bool learned = false;        // false during warmup
  bool actor_updated = false;
  double actor_loss = 0.0;     // valid when actor_updated
};

struct TrainResult {
  Td3Networks networks;
  std::vector<TrainLogEntry> log;
};

struct CriticLosses {
  double critic1 = 0.0;
  double critic2 = 0.0;
};

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

/// Mean-squared-error regression of a critic onto immediate rewards; the
/// bandit target is the raw reward, no bootstrap term.
LossGrad critic_loss_and_grad(const Mlp& critic,
                              const std::vector<const Transition*>& batch);

/// Deterministic-policy-gradient objective: loss = -mean critic(o, actor(o)),
/// gradient taken w.r.t. the actor parameters through the critic's action
/// input.
LossGrad actor_loss_and_grad(const Mlp& actor, const Mlp& critic,
                             const std::vector<const Transition*>& batch);

std::vector<double> flatten_observation(const Observation& obs, double n_r);

/// Fraction from the actor with optional exploration noise, clipped to [0,1].
double select_action(const Observation& obs, const Mlp& actor,
                     const RewardParams& params, bool explore, double noise_std,
                     std::mt19937_64* rng);

Allocation fraction_to_allocation(double f, const RewardParams& params);

/// Stateful TD3 trainer. Training is single-threaded; the resulting networks
/// are immutable after train() and safe to share for evaluation.
class Td3Agent {
 public:
  Td3Agent(AgentConfig cfg, RewardParams env_params);
  Td3Agent(AgentConfig cfg, RewardParams env_params, Td3Networks networks);

  CriticLosses critic_update(const std::vector<const Transition*>& batch);
  double actor_update(const std::vector<const Transition*>& batch);  // + soft updates

  std::vector<TrainLogEntry> train(const TracePair& train_traces, long steps);

  const Td3Networks& networks() const { return networks_; }
  Td3Networks& networks() { return networks_; }
  const AgentConfig& config() const { return cfg_; }
  const RewardParams& env_params() const { return env_params_; }
  long critic_steps() const { return critic_steps_; }
  long actor_steps() const { return actor_steps_; }

 private:
  AgentConfig cfg_;
  RewardParams env_params_;
  Td3Networks networks_;
  Adam actor_opt_, critic1_opt_, critic2_opt_;
  std::mt19937_64 rng_;
  long critic_steps_ = 0;
  long actor_steps_ = 0;
};

struct EvaluationSeries {
  std::vector<StepResult> steps;
  MetricsRecord metrics;
};

/// Deterministic rollout of learned, quasi-static, and per-step oracle
/// policies over the evaluation window.
struct EvaluationReport {
  EvaluationSeries learned;
  EvaluationSeries quasi_static;
  EvaluationSeries oracle;
};

MetricsRecord compute_metrics(const std::vector<StepResult>& steps,
                              const RewardParams& params);

EvaluationReport evaluate(const Mlp& actor, const TracePair& eval_traces,
                          const Allocation& quasi_alloc, const RewardParams& params,
                          int history_n);

/// Self-describing JSON checkpoint: config echo, seed, and all six networks.
/// Loading rejects shape mismatches.
void save_checkpoint(const std::string& path, const Td3Networks& networks,
                     const AgentConfig& cfg, const RewardParams& params);
struct Checkpoint {
  Td3Networks networks;
  AgentConfig config;
  RewardParams params;
};
Checkpoint load_checkpoint(const std::string& path);

void save_training_log(const std::vector<TrainLogEntry>& log, const std::string& path);
std::vector<TrainLogEntry> load_training_log(const std::string& path);

}  // namespace dss
