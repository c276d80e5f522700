#include "dss/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dss {

namespace {

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::runtime_error("config key '" + key + "': expected boolean, got '" + v + "'");
}

double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw std::runtime_error("config key '" + key + "': expected number, got '" + v + "'");
  }
}

long parse_long(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw std::runtime_error("config key '" + key + "': expected integer, got '" + v + "'");
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void ExperimentConfig::validate() const {
  reward.validate();
  agent.validate();
  if (!(split > 0.0 && split < 1.0))
    throw std::runtime_error("config: split outside (0,1)");
  if (train_steps < 0) throw std::runtime_error("config: negative train.steps");
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);

  ExperimentConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "trace_a") cfg.trace_a = value;
    else if (key == "trace_b") cfg.trace_b = value;
    else if (key == "dci_log") cfg.dci_log = value;
    else if (key == "dci_window_s") cfg.dci_window_s = parse_double(value, key);
    else if (key == "dci_delimiter") {
      if (value.size() != 1)
        throw std::runtime_error("config key 'dci_delimiter': expected one character");
      cfg.dci_delimiter = value[0];
    }
    else if (key == "dci_strict") cfg.dci_strict = parse_bool(value, key);
    else if (key == "synth.block_length") cfg.synth.block_length = int(parse_long(value, key));
    else if (key == "synth.ar_coefficient") cfg.synth.ar_coefficient = parse_double(value, key);
    else if (key == "synth.noise_scale") cfg.synth.noise_scale = parse_double(value, key);
    else if (key == "synth.seed") cfg.synth.seed = std::uint64_t(parse_long(value, key));
    else if (key == "synth.length") cfg.synth.length = int(parse_long(value, key));
    else if (key == "split") cfg.split = parse_double(value, key);
    else if (key == "train.steps") cfg.train_steps = parse_long(value, key);
    else if (key == "reward.zeta") cfg.reward.zeta = parse_double(value, key);
    else if (key == "reward.n_r") cfg.reward.n_r = parse_double(value, key);
    else if (key == "reward.epsilon_demand") cfg.reward.epsilon_demand = parse_double(value, key);
    else if (key == "reward.form") {
      if (value == "literal") cfg.reward.reward_form = RewardForm::literal;
      else if (value == "plain") cfg.reward.reward_form = RewardForm::plain;
      else throw std::runtime_error("config key 'reward.form': expected literal|plain");
    }
    else if (key == "agent.hidden1") cfg.agent.hidden1 = int(parse_long(value, key));
    else if (key == "agent.hidden2") cfg.agent.hidden2 = int(parse_long(value, key));
    else if (key == "agent.actor_lr") cfg.agent.actor_lr = parse_double(value, key);
    else if (key == "agent.critic_lr") cfg.agent.critic_lr = parse_double(value, key);
    else if (key == "agent.batch_size") cfg.agent.batch_size = int(parse_long(value, key));
    else if (key == "agent.buffer_capacity") cfg.agent.buffer_capacity = int(parse_long(value, key));
    else if (key == "agent.exploration_noise_std") cfg.agent.exploration_noise_std = parse_double(value, key);
    else if (key == "agent.target_smoothing_std") cfg.agent.target_smoothing_std = parse_double(value, key);
    else if (key == "agent.target_noise_clip") cfg.agent.target_noise_clip = parse_double(value, key);
    else if (key == "agent.policy_delay") cfg.agent.policy_delay = int(parse_long(value, key));
    else if (key == "agent.tau") cfg.agent.tau = parse_double(value, key);
    else if (key == "agent.gamma") cfg.agent.gamma = parse_double(value, key);
    else if (key == "agent.horizon_T") cfg.agent.horizon_T = int(parse_long(value, key));
    else if (key == "agent.seed") cfg.agent.seed = std::uint64_t(parse_long(value, key));
    else if (key == "agent.history_n") cfg.agent.history_n = int(parse_long(value, key));
    else if (key == "harness.policy") cfg.harness.policy = policy_kind_from_string(value);
    else if (key == "harness.integerize") cfg.harness.integerize = parse_bool(value, key);
    else if (key == "harness.hold_last_on_gap") cfg.harness.hold_last_on_gap = parse_bool(value, key);
    else if (key == "harness.non_rt_period") cfg.harness.non_rt_period = parse_long(value, key);
    else if (key == "harness.enable_non_rt") cfg.harness.enable_non_rt = parse_bool(value, key);
    else if (key == "harness.retrain_steps") cfg.harness.retrain_steps = int(parse_long(value, key));
    else if (key == "harness.intent_rule") {
      if (value == "static") cfg.harness.intent_rule.kind = IntentRuleKind::static_rule;
      else if (value == "ran_a_deficit") cfg.harness.intent_rule.kind = IntentRuleKind::ran_a_deficit;
      else throw std::runtime_error("config key 'harness.intent_rule': expected static|ran_a_deficit");
    }
    else if (key == "harness.deficit_threshold") cfg.harness.intent_rule.deficit_threshold = parse_double(value, key);
    else if (key == "harness.zeta_increment") cfg.harness.intent_rule.zeta_increment = parse_double(value, key);
    else if (key == "harness.zeta_cap") cfg.harness.intent_rule.zeta_cap = parse_double(value, key);
    else if (key == "checkpoint") cfg.checkpoint = value;
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "plots") cfg.plots = parse_bool(value, key);
    else
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": unknown config key '" + key + "'");
  }
  cfg.harness.initial_zeta = cfg.reward.zeta;
  return cfg;
}

}  // namespace dss
