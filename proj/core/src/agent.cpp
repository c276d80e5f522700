#include "dss/agent.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace dss {

using nlohmann::json;

void AgentConfig::validate() const {
  if (hidden1 <= 0 || hidden2 <= 0)
    throw std::invalid_argument("AgentConfig: non-positive hidden size");
  if (actor_lr <= 0.0 || critic_lr <= 0.0)
    throw std::invalid_argument("AgentConfig: non-positive learning rate");
  if (batch_size <= 0) throw std::invalid_argument("AgentConfig: batch_size <= 0");
  if (buffer_capacity <= 0)
    throw std::invalid_argument("AgentConfig: buffer_capacity <= 0");
  if (exploration_noise_std < 0.0 || target_smoothing_std < 0.0 ||
      target_noise_clip < 0.0)
    throw std::invalid_argument("AgentConfig: negative noise parameter");
  if (policy_delay <= 0) throw std::invalid_argument("AgentConfig: policy_delay <= 0");
  if (!(tau > 0.0 && tau <= 1.0))
    throw std::invalid_argument("AgentConfig: tau outside (0,1]");
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw std::invalid_argument("AgentConfig: gamma outside [0,1]");
  if (horizon_T <= 0) throw std::invalid_argument("AgentConfig: horizon_T <= 0");
  if (history_n < 0) throw std::invalid_argument("AgentConfig: history_n < 0");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("ReplayBuffer: zero capacity");
  storage_.reserve(capacity_);
}

void ReplayBuffer::push(Transition t) {
  if (storage_.size() < capacity_) {
    storage_.push_back(std::move(t));
  } else {
    storage_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
  }
}

const Transition& ReplayBuffer::at(std::size_t logical_index) const {
  if (logical_index >= storage_.size())
    throw std::out_of_range("ReplayBuffer::at");
  if (storage_.size() < capacity_) return storage_[logical_index];
  return storage_[(head_ + logical_index) % capacity_];
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch,
                                                    std::mt19937_64& rng) const {
  if (storage_.empty()) throw std::runtime_error("ReplayBuffer::sample: empty");
  std::uniform_int_distribution<std::size_t> dist(0, storage_.size() - 1);
  std::vector<const Transition*> out;
  out.reserve(batch);
  for (std::size_t i = 0; i < batch; ++i) out.push_back(&storage_[dist(rng)]);
  return out;
}

Td3Networks Td3Networks::initialize(const AgentConfig& cfg, std::mt19937_64& rng) {
  const int obs_dim = cfg.observation_dim();
  Td3Networks nets;
  nets.actor = Mlp({obs_dim, cfg.hidden1, cfg.hidden2, 1}, OutputActivation::sigmoid);
  nets.critic1 = Mlp({obs_dim + 1, cfg.hidden1, cfg.hidden2, 1}, OutputActivation::linear);
  nets.critic2 = Mlp({obs_dim + 1, cfg.hidden1, cfg.hidden2, 1}, OutputActivation::linear);
  nets.actor.init_uniform(rng);
  nets.critic1.init_uniform(rng);
  nets.critic2.init_uniform(rng);
  nets.target_actor = nets.actor;
  nets.target_critic1 = nets.critic1;
  nets.target_critic2 = nets.critic2;
  return nets;
}

LossGrad critic_loss_and_grad(const Mlp& critic,
                              const std::vector<const Transition*>& batch) {
  if (batch.empty()) throw std::invalid_argument("critic_loss_and_grad: empty batch");
  LossGrad out;
  out.grad.assign(critic.params().size(), 0.0);
  const double inv_b = 1.0 / double(batch.size());
  for (const Transition* t : batch) {
    std::vector<double> input = t->observation;
    input.push_back(t->action);
    Mlp::Cache cache;
    const double q = critic.forward(input, &cache)[0];
    const double err = q - t->reward;
    out.loss += err * err * inv_b;
    critic.backward(cache, {2.0 * err * inv_b}, out.grad);
  }
  return out;
}

LossGrad actor_loss_and_grad(const Mlp& actor, const Mlp& critic,
                             const std::vector<const Transition*>& batch) {
  if (batch.empty()) throw std::invalid_argument("actor_loss_and_grad: empty batch");
  LossGrad out;
  out.grad.assign(actor.params().size(), 0.0);
  std::vector<double> critic_scratch(critic.params().size(), 0.0);
  const double inv_b = 1.0 / double(batch.size());
  for (const Transition* t : batch) {
    Mlp::Cache actor_cache;
    const double a = actor.forward(t->observation, &actor_cache)[0];
    std::vector<double> input = t->observation;
    input.push_back(a);
    Mlp::Cache critic_cache;
    const double q = critic.forward(input, &critic_cache)[0];
    out.loss -= q * inv_b;
    std::vector<double> input_grad;
    critic.backward(critic_cache, {1.0}, critic_scratch, &input_grad);
    const double dq_da = input_grad.back();
    actor.backward(actor_cache, {-dq_da * inv_b}, out.grad);
  }
  return out;
}

std::vector<double> flatten_observation(const Observation& obs, double n_r) {
  std::vector<double> out;
  out.reserve(obs.pairs.size() * 2);
  for (const auto& [da, db] : obs.pairs) {
    out.push_back(da / n_r);
    out.push_back(db / n_r);
  }
  return out;
}

double select_action(const Observation& obs, const Mlp& actor,
                     const RewardParams& params, bool explore, double noise_std,
                     std::mt19937_64* rng) {
  const std::vector<double> input = flatten_observation(obs, params.n_r);
  double f = actor.forward(input)[0];
  if (!std::isfinite(f))
    throw std::runtime_error("select_action: non-finite actor output (diverged)");
  if (explore && noise_std > 0.0) {
    if (!rng) throw std::invalid_argument("select_action: exploration needs an rng");
    std::normal_distribution<double> noise(0.0, noise_std);
    f += noise(*rng);
  }
  return std::clamp(f, 0.0, 1.0);
}

Allocation fraction_to_allocation(double f, const RewardParams& params) {
  const double n_a = f * params.n_r;
  return {n_a, params.n_r - n_a};
}

Td3Agent::Td3Agent(AgentConfig cfg, RewardParams env_params)
    : cfg_(std::move(cfg)), env_params_(env_params), rng_(cfg_.seed) {
  cfg_.validate();
  env_params_.validate();
  networks_ = Td3Networks::initialize(cfg_, rng_);
  actor_opt_ = Adam(networks_.actor.params().size(), cfg_.actor_lr);
  critic1_opt_ = Adam(networks_.critic1.params().size(), cfg_.critic_lr);
  critic2_opt_ = Adam(networks_.critic2.params().size(), cfg_.critic_lr);
}

Td3Agent::Td3Agent(AgentConfig cfg, RewardParams env_params, Td3Networks networks)
    : cfg_(std::move(cfg)), env_params_(env_params), networks_(std::move(networks)),
      rng_(cfg_.seed) {
  cfg_.validate();
  env_params_.validate();
  actor_opt_ = Adam(networks_.actor.params().size(), cfg_.actor_lr);
  critic1_opt_ = Adam(networks_.critic1.params().size(), cfg_.critic_lr);
  critic2_opt_ = Adam(networks_.critic2.params().size(), cfg_.critic_lr);
}

CriticLosses Td3Agent::critic_update(const std::vector<const Transition*>& batch) {
  auto lg1 = critic_loss_and_grad(networks_.critic1, batch);
  auto lg2 = critic_loss_and_grad(networks_.critic2, batch);
  if (!std::isfinite(lg1.loss) || !std::isfinite(lg2.loss))
    throw std::runtime_error("critic_update: non-finite loss");
  critic1_opt_.step(networks_.critic1.params(), lg1.grad);
  critic2_opt_.step(networks_.critic2.params(), lg2.grad);
  ++critic_steps_;
  return {lg1.loss, lg2.loss};
}

double Td3Agent::actor_update(const std::vector<const Transition*>& batch) {
  auto lg = actor_loss_and_grad(networks_.actor, networks_.critic1, batch);
  if (!std::isfinite(lg.loss))
    throw std::runtime_error("actor_update: non-finite loss");
  actor_opt_.step(networks_.actor.params(), lg.grad);
  soft_update(networks_.target_actor.params(), networks_.actor.params(), cfg_.tau);
  soft_update(networks_.target_critic1.params(), networks_.critic1.params(), cfg_.tau);
  soft_update(networks_.target_critic2.params(), networks_.critic2.params(), cfg_.tau);
  ++actor_steps_;
  return lg.loss;
}

std::vector<TrainLogEntry> Td3Agent::train(const TracePair& train_traces, long steps) {
  train_traces.a.validate();
  train_traces.b.validate();
  if (train_traces.a.size() != train_traces.b.size())
    throw std::invalid_argument("train: trace length mismatch");
  if (long(train_traces.a.size()) <= cfg_.history_n)
    throw std::invalid_argument("train: traces shorter than history_n");

  ReplayBuffer buffer(std::size_t(cfg_.buffer_capacity));
  std::uniform_int_distribution<std::size_t> t_dist(0, train_traces.a.size() - 1);
  std::uniform_real_distribution<double> warmup_action(0.0, 1.0);

  std::vector<TrainLogEntry> log;
  log.reserve(std::size_t(steps));
  for (long step_idx = 0; step_idx < steps; ++step_idx) {
    try {
      const std::size_t t = t_dist(rng_);
      const Observation obs = build_observation(train_traces.a, train_traces.b, t,
                                                std::size_t(cfg_.history_n));
      double f;
      if (buffer.size() < std::size_t(cfg_.batch_size)) {
        f = warmup_action(rng_);
      } else {
        f = select_action(obs, networks_.actor, env_params_, true,
                          cfg_.exploration_noise_std, &rng_);
      }
      const Allocation alloc = fraction_to_allocation(f, env_params_);
      const StepResult sr = step(t, alloc, train_traces.a, train_traces.b, env_params_,
                                 std::size_t(cfg_.history_n));
      buffer.push({flatten_observation(obs, env_params_.n_r), f, sr.reward});

      TrainLogEntry entry;
      entry.step = step_idx;
      entry.reward = sr.reward;
      if (buffer.size() >= std::size_t(cfg_.batch_size)) {
        const auto batch = buffer.sample(std::size_t(cfg_.batch_size), rng_);
        const CriticLosses cl = critic_update(batch);
        entry.learned = true;
        entry.critic1_loss = cl.critic1;
        entry.critic2_loss = cl.critic2;
        if (critic_steps_ % cfg_.policy_delay == 0) {
          entry.actor_loss = actor_update(batch);
          entry.actor_updated = true;
        }
      }
      log.push_back(entry);
    } catch (const std::exception& e) {
      throw std::runtime_error("training diverged at step " +
                               std::to_string(step_idx) + ": " + e.what());
    }
  }
  return log;
}

MetricsRecord compute_metrics(const std::vector<StepResult>& steps,
                              const RewardParams& params) {
  MetricsRecord m;
  if (steps.empty()) return m;
  const double inv_n = 1.0 / double(steps.size());
  for (const auto& s : steps) {
    const double da = std::max(s.demands.first, params.epsilon_demand);
    const double db = std::max(s.demands.second, params.epsilon_demand);
    const double fa = (s.allocation.n_a - da) / da;
    const double fb = (s.allocation.n_b - db) / db;
    m.mean_imbalance += s.imbalance * inv_n;
    m.mean_reward += s.reward * inv_n;
    m.mean_surplus_a += std::max(0.0, fa) * inv_n;
    m.mean_surplus_b += std::max(0.0, fb) * inv_n;
    m.mean_deficit_a += std::max(0.0, -fa) * inv_n;
    m.mean_deficit_b += std::max(0.0, -fb) * inv_n;
    m.over_rate_a += (s.allocation.n_a > s.demands.first ? 1.0 : 0.0) * inv_n;
    m.over_rate_b += (s.allocation.n_b > s.demands.second ? 1.0 : 0.0) * inv_n;
    m.under_rate_a += (s.allocation.n_a < s.demands.first ? 1.0 : 0.0) * inv_n;
    m.under_rate_b += (s.allocation.n_b < s.demands.second ? 1.0 : 0.0) * inv_n;
    m.mean_sq_frac_err_a += fa * fa * inv_n;
    m.mean_sq_frac_err_b += fb * fb * inv_n;
  }
  return m;
}

EvaluationReport evaluate(const Mlp& actor, const TracePair& eval_traces,
                          const Allocation& quasi_alloc, const RewardParams& params,
                          int history_n) {
  eval_traces.a.validate();
  eval_traces.b.validate();
  if (eval_traces.a.size() != eval_traces.b.size())
    throw std::invalid_argument("evaluate: trace length mismatch");

  EvaluationReport report;
  const std::size_t n = eval_traces.a.size();
  for (std::size_t t = 0; t < n; ++t) {
    const Observation obs =
        build_observation(eval_traces.a, eval_traces.b, t, std::size_t(history_n));
    const double f = select_action(obs, actor, params, false, 0.0, nullptr);
    report.learned.steps.push_back(step(t, fraction_to_allocation(f, params),
                                        eval_traces.a, eval_traces.b, params,
                                        std::size_t(history_n)));
    report.quasi_static.steps.push_back(step(t, quasi_alloc, eval_traces.a,
                                             eval_traces.b, params,
                                             std::size_t(history_n)));
    const Allocation oracle = optimal_allocation(eval_traces.a.demands[t],
                                                 eval_traces.b.demands[t], params);
    report.oracle.steps.push_back(step(t, oracle, eval_traces.a, eval_traces.b,
                                       params, std::size_t(history_n)));
  }
  report.learned.metrics = compute_metrics(report.learned.steps, params);
  report.quasi_static.metrics = compute_metrics(report.quasi_static.steps, params);
  report.oracle.metrics = compute_metrics(report.oracle.steps, params);
  return report;
}

namespace {

json mlp_to_json(const Mlp& net) {
  return json{{"sizes", net.layer_sizes()},
              {"output", net.output_activation() == OutputActivation::sigmoid
                             ? "sigmoid"
                             : "linear"},
              {"params", net.params()}};
}

Mlp mlp_from_json(const json& j) {
  const auto sizes = j.at("sizes").get<std::vector<int>>();
  const std::string out = j.at("output").get<std::string>();
  Mlp net(sizes, out == "sigmoid" ? OutputActivation::sigmoid
                                  : OutputActivation::linear);
  const auto params = j.at("params").get<std::vector<double>>();
  if (params.size() != net.params().size())
    throw std::runtime_error("checkpoint shape mismatch: expected " +
                             std::to_string(net.params().size()) + " params, got " +
                             std::to_string(params.size()));
  net.params() = params;
  return net;
}

json config_to_json(const AgentConfig& c) {
  return json{{"hidden1", c.hidden1},
              {"hidden2", c.hidden2},
              {"actor_lr", c.actor_lr},
              {"critic_lr", c.critic_lr},
              {"batch_size", c.batch_size},
              {"buffer_capacity", c.buffer_capacity},
              {"exploration_noise_std", c.exploration_noise_std},
              {"target_smoothing_std", c.target_smoothing_std},
              {"target_noise_clip", c.target_noise_clip},
              {"policy_delay", c.policy_delay},
              {"tau", c.tau},
              {"gamma", c.gamma},
              {"horizon_T", c.horizon_T},
              {"seed", c.seed},
              {"history_n", c.history_n}};
}

AgentConfig config_from_json(const json& j) {
  AgentConfig c;
  c.hidden1 = j.at("hidden1").get<int>();
  c.hidden2 = j.at("hidden2").get<int>();
  c.actor_lr = j.at("actor_lr").get<double>();
  c.critic_lr = j.at("critic_lr").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.buffer_capacity = j.at("buffer_capacity").get<int>();
  c.exploration_noise_std = j.at("exploration_noise_std").get<double>();
  c.target_smoothing_std = j.at("target_smoothing_std").get<double>();
  c.target_noise_clip = j.at("target_noise_clip").get<double>();
  c.policy_delay = j.at("policy_delay").get<int>();
  c.tau = j.at("tau").get<double>();
  c.gamma = j.at("gamma").get<double>();
  c.horizon_T = j.at("horizon_T").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.history_n = j.at("history_n").get<int>();
  return c;
}

}  // namespace

void save_checkpoint(const std::string& path, const Td3Networks& networks,
                     const AgentConfig& cfg, const RewardParams& params) {
  json j{{"format", "dss-td3-checkpoint"},
         {"version", 1},
         {"config", config_to_json(cfg)},
         {"reward_params",
          {{"zeta", params.zeta},
           {"n_r", params.n_r},
           {"epsilon_demand", params.epsilon_demand},
           {"reward_form",
            params.reward_form == RewardForm::literal ? "literal" : "plain"}}},
         {"networks",
          {{"actor", mlp_to_json(networks.actor)},
           {"critic1", mlp_to_json(networks.critic1)},
           {"critic2", mlp_to_json(networks.critic2)},
           {"target_actor", mlp_to_json(networks.target_actor)},
           {"target_critic1", mlp_to_json(networks.target_critic1)},
           {"target_critic2", mlp_to_json(networks.target_critic2)}}}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  json j;
  in >> j;
  if (j.at("format").get<std::string>() != "dss-td3-checkpoint")
    throw std::runtime_error("not a checkpoint file: " + path);
  Checkpoint ckpt;
  ckpt.config = config_from_json(j.at("config"));
  const auto& rp = j.at("reward_params");
  ckpt.params.zeta = rp.at("zeta").get<double>();
  ckpt.params.n_r = rp.at("n_r").get<double>();
  ckpt.params.epsilon_demand = rp.at("epsilon_demand").get<double>();
  ckpt.params.reward_form = rp.at("reward_form").get<std::string>() == "plain"
                                ? RewardForm::plain
                                : RewardForm::literal;
  const auto& nets = j.at("networks");
  ckpt.networks.actor = mlp_from_json(nets.at("actor"));
  ckpt.networks.critic1 = mlp_from_json(nets.at("critic1"));
  ckpt.networks.critic2 = mlp_from_json(nets.at("critic2"));
  ckpt.networks.target_actor = mlp_from_json(nets.at("target_actor"));
  ckpt.networks.target_critic1 = mlp_from_json(nets.at("target_critic1"));
  ckpt.networks.target_critic2 = mlp_from_json(nets.at("target_critic2"));
  if (ckpt.networks.actor.input_size() != ckpt.config.observation_dim())
    throw std::runtime_error("checkpoint shape mismatch: actor input vs history_n");
  return ckpt;
}

void save_training_log(const std::vector<TrainLogEntry>& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write training log: " + path);
  out << "step,reward,critic1_loss,critic2_loss,actor_loss\n";
  char buf[64];
  for (const auto& e : log) {
    out << e.step << ",";
    std::snprintf(buf, sizeof buf, "%.17g", e.reward);
    out << buf << ",";
    if (e.learned) {
      std::snprintf(buf, sizeof buf, "%.17g", e.critic1_loss);
      out << buf << ",";
      std::snprintf(buf, sizeof buf, "%.17g", e.critic2_loss);
      out << buf << ",";
    } else {
      out << ",,";
    }
    if (e.actor_updated) {
      std::snprintf(buf, sizeof buf, "%.17g", e.actor_loss);
      out << buf;
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<TrainLogEntry> load_training_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open training log: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty training log: " + path);
  std::vector<TrainLogEntry> log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    fields.resize(5);
    TrainLogEntry e;
    e.step = std::stol(fields[0]);
    e.reward = std::stod(fields[1]);
    if (!fields[2].empty()) {
      e.learned = true;
      e.critic1_loss = std::stod(fields[2]);
      e.critic2_loss = std::stod(fields[3]);
    }
    if (!fields[4].empty()) {
      e.actor_updated = true;
      e.actor_loss = std::stod(fields[4]);
    }
    log.push_back(e);
  }
  return log;
}

}  // namespace dss
