#include "dss/ric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dss {

PolicyKind policy_kind_from_string(const std::string& s) {
  if (s == "learned") return PolicyKind::learned;
  if (s == "oracle") return PolicyKind::oracle;
  if (s == "quasi_static") return PolicyKind::quasi_static;
  throw std::invalid_argument("unknown policy kind: " + s);
}

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::learned: return "learned";
    case PolicyKind::oracle: return "oracle";
    case PolicyKind::quasi_static: return "quasi_static";
  }
  return "?";
}

NearRtLoop::NearRtLoop(const RewardParams& base_params, int history_n,
                       SessionConfig cfg, std::shared_ptr<const Mlp> actor,
                       std::optional<Allocation> quasi_alloc)
    : params_(base_params), history_n_(history_n), cfg_(std::move(cfg)),
      actor_(std::move(actor)), quasi_alloc_(quasi_alloc) {
  params_.validate();
  const double rounded = std::floor(params_.n_r + 0.5);
  if (std::abs(params_.n_r - rounded) > 1e-9)
    throw std::invalid_argument("NearRtLoop: n_r must be integral for commands");
  n_r_int_ = long(rounded);
  if (cfg_.policy == PolicyKind::learned && !actor_)
    throw std::invalid_argument("NearRtLoop: learned policy needs an actor");
  if (cfg_.policy == PolicyKind::quasi_static && !quasi_alloc_)
    throw std::invalid_argument("NearRtLoop: quasi_static policy needs an allocation");
}

void NearRtLoop::deliver_policy(IntentPolicyMsg msg) {
  if (msg.policy_id <= last_policy_id_)
    throw std::runtime_error("NearRtLoop: non-increasing policy_id");
  if (!(msg.zeta >= 0.0 && msg.zeta <= 1.0))
    throw std::runtime_error("NearRtLoop: policy zeta outside [0,1]");
  last_policy_id_ = msg.policy_id;
  pending_.push_back(std::move(msg));
}

AllocationCmdMsg NearRtLoop::process_report(const DemandReportMsg& report) {
  if (first_report_ && pending_.empty() && policy_history_.empty())
    throw std::runtime_error("NearRtLoop: no intent policy before first report");
  if (!first_report_ && report.step < expected_step_)
    throw std::runtime_error("NearRtLoop: non-increasing report step");
  if (!first_report_ && report.step > expected_step_) {
    if (!cfg_.hold_last_on_gap)
      throw std::runtime_error("NearRtLoop: report gap at step " +
                               std::to_string(report.step));
    ++gap_warnings_;
  }
  if (!(report.d_a >= 0.0 && report.d_b >= 0.0))
    throw std::runtime_error("NearRtLoop: negative demand report");
  first_report_ = false;
  expected_step_ = report.step + 1;

  // Policy swaps apply atomically between steps.
  for (auto it = pending_.begin(); it != pending_.end();) {
    if (it->effective_from <= report.step) {
      params_.zeta = it->zeta;
      if (it->actor) actor_ = it->actor;
      policy_history_.push_back(*it);
      it = pending_.erase(it);
    } else {
      ++it;
    }
  }

  hist_a_.push_back(report.d_a);
  hist_b_.push_back(report.d_b);
  const std::size_t t = hist_a_.size() - 1;
  const Observation obs =
      build_observation(hist_a_, hist_b_, t, std::size_t(history_n_));

  Allocation alloc;
  switch (cfg_.policy) {
    case PolicyKind::learned: {
      const double f = select_action(obs, *actor_, params_, false, 0.0, nullptr);
      alloc = fraction_to_allocation(f, params_);
      break;
    }
    case PolicyKind::oracle:
      alloc = optimal_allocation(report.d_a, report.d_b, params_);
      break;
    case PolicyKind::quasi_static:
      alloc = *quasi_alloc_;
      break;
  }

  AllocationCmdMsg cmd;
  cmd.step = report.step;
  cmd.n_a_int = std::clamp(long(std::floor(alloc.n_a + 0.5)), 0L, n_r_int_);
  cmd.n_b_int = n_r_int_ - cmd.n_a_int;

  const Allocation effective =
      cfg_.integerize ? Allocation{double(cmd.n_a_int), double(cmd.n_b_int)} : alloc;
  const double imbalance =
      compute_imbalance(effective, report.d_a, report.d_b, params_);
  const double reward = compute_reward(imbalance, params_);

  SessionRecord rec;
  rec.step = report.step;
  rec.d_a = report.d_a;
  rec.d_b = report.d_b;
  rec.n_a = effective.n_a;
  rec.n_b = effective.n_b;
  rec.n_a_int = cmd.n_a_int;
  rec.n_b_int = cmd.n_b_int;
  rec.zeta = params_.zeta;
  rec.imbalance = imbalance;
  rec.reward = reward;
  log_.push_back(rec);
  last_cmd_ = cmd;
  return cmd;
}

NonRtLoop::NonRtLoop(SessionConfig cfg, AgentConfig agent_cfg,
                     RewardParams base_params, std::shared_ptr<const Mlp> initial_actor,
                     std::optional<Td3Networks> initial_networks)
    : cfg_(std::move(cfg)), agent_cfg_(std::move(agent_cfg)),
      base_params_(base_params), zeta_(cfg_.initial_zeta),
      actor_(std::move(initial_actor)), networks_(std::move(initial_networks)) {}

std::optional<IntentPolicyMsg> NonRtLoop::tick(
    const std::vector<SessionRecord>& recent,
    const std::vector<DemandReportMsg>& all_reports, long next_effective_step) {
  bool changed = false;
  IntentPolicyMsg msg;
  msg.effective_from = next_effective_step;

  if (cfg_.intent_rule.kind == IntentRuleKind::ran_a_deficit && !recent.empty()) {
    std::size_t deficits = 0;
    for (const auto& r : recent)
      if (double(r.n_a) < r.d_a) ++deficits;
    const double rate = double(deficits) / double(recent.size());
    if (rate > cfg_.intent_rule.deficit_threshold &&
        zeta_ < cfg_.intent_rule.zeta_cap) {
      zeta_ = std::min(cfg_.intent_rule.zeta_cap,
                       zeta_ + cfg_.intent_rule.zeta_increment);
      changed = true;
    }
  }

  if (cfg_.retrain_steps > 0 && networks_ &&
      all_reports.size() > std::size_t(agent_cfg_.history_n + 1)) {
    TracePair data;
    data.a.ran_id = RanId::A;
    data.b.ran_id = RanId::B;
    for (const auto& r : all_reports) {
      data.a.demands.push_back(r.d_a);
      data.b.demands.push_back(r.d_b);
    }
    try {
      RewardParams params = base_params_;
      params.zeta = zeta_;
      Td3Agent agent(agent_cfg_, params, *networks_);
      agent.train(data, cfg_.retrain_steps);
      networks_ = agent.networks();
      actor_ = std::make_shared<Mlp>(networks_->actor);
      msg.actor = actor_;
      msg.checkpoint_ref = "refresh-" + std::to_string(next_policy_id_);
      changed = true;
    } catch (const std::exception&) {
      // keep the previous checkpoint
      ++retrain_failures_;
    }
  }

  if (!changed) return std::nullopt;
  msg.policy_id = next_policy_id_++;
  msg.zeta = zeta_;
  return msg;
}

SessionResult run_session(const TracePair& traces, const SessionConfig& cfg,
                          const RewardParams& base_params, const AgentConfig& agent_cfg,
                          std::shared_ptr<const Mlp> actor,
                          std::optional<Allocation> quasi_alloc,
                          std::optional<Td3Networks> networks) {
  traces.a.validate();
  traces.b.validate();
  if (traces.a.size() != traces.b.size())
    throw std::invalid_argument("run_session: trace length mismatch");

  RewardParams params = base_params;
  params.zeta = cfg.initial_zeta;
  NearRtLoop near_rt(params, agent_cfg.history_n, cfg, actor, quasi_alloc);
  NonRtLoop non_rt(cfg, agent_cfg, base_params, actor, std::move(networks));

  MessageQueue<DemandReportMsg> reports;
  MessageQueue<AllocationCmdMsg> commands;

  // Initial intent policy precedes the first report.
  IntentPolicyMsg initial;
  initial.policy_id = 0;
  initial.zeta = cfg.initial_zeta;
  initial.effective_from = 0;
  near_rt.deliver_policy(initial);

  SessionResult result;
  std::vector<DemandReportMsg> sent;
  std::size_t last_tick_log_size = 0;
  for (std::size_t t = 0; t < traces.a.size(); ++t) {
    DemandReportMsg report{long(t), traces.a.demands[t], traces.b.demands[t]};
    reports.push(report);
    sent.push_back(report);
    ++result.reports_sent;

    const auto r = reports.pop();
    commands.push(near_rt.process_report(*r));
    while (auto cmd = commands.pop()) {
      (void)cmd;
      ++result.commands_received;
    }

    const bool learned = cfg.policy == PolicyKind::learned;
    if (cfg.enable_non_rt && learned && cfg.non_rt_period > 0 &&
        (t + 1) % std::size_t(cfg.non_rt_period) == 0 && t + 1 < traces.a.size()) {
      std::vector<SessionRecord> recent(near_rt.log().begin() +
                                            std::ptrdiff_t(last_tick_log_size),
                                        near_rt.log().end());
      last_tick_log_size = near_rt.log().size();
      if (auto msg = non_rt.tick(recent, sent, long(t + 1))) {
        near_rt.deliver_policy(*msg);
      }
    }
  }

  result.records = near_rt.log();
  result.policy_history = near_rt.policy_history();
  result.gap_warnings = near_rt.gap_warnings();
  result.retrain_failures = non_rt.retrain_failures();

  // Session metrics mirror the evaluation aggregates.
  std::vector<StepResult> steps;
  steps.reserve(result.records.size());
  for (const auto& rec : result.records) {
    StepResult s;
    s.allocation = {rec.n_a, rec.n_b};
    s.demands = {rec.d_a, rec.d_b};
    s.imbalance = rec.imbalance;
    s.reward = rec.reward;
    steps.push_back(std::move(s));
  }
  RewardParams metric_params = base_params;
  metric_params.zeta = cfg.initial_zeta;
  result.metrics = compute_metrics(steps, metric_params);
  return result;
}

void save_session_log(const std::vector<SessionRecord>& records,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write session log: " + path);
  out << "step,d_a,d_b,n_a_int,n_b_int,zeta,J,reward\n";
  char buf[64];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf << sep;
  };
  for (const auto& r : records) {
    out << r.step << ",";
    put(r.d_a, ',');
    put(r.d_b, ',');
    out << r.n_a_int << "," << r.n_b_int << ",";
    put(r.zeta, ',');
    put(r.imbalance, ',');
    put(r.reward, '\n');
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<SessionRecord> load_session_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open session log: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty session log: " + path);
  std::vector<SessionRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 8)
      throw std::runtime_error("bad session log row in " + path + ": " + line);
    SessionRecord r;
    r.step = std::stol(fields[0]);
    r.d_a = std::stod(fields[1]);
    r.d_b = std::stod(fields[2]);
    r.n_a_int = std::stol(fields[3]);
    r.n_b_int = std::stol(fields[4]);
    r.n_a = double(r.n_a_int);
    r.n_b = double(r.n_b_int);
    r.zeta = std::stod(fields[5]);
    r.imbalance = std::stod(fields[6]);
    r.reward = std::stod(fields[7]);
    records.push_back(r);
  }
  return records;
}

}  // namespace dss
