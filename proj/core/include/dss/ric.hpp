#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dss/agent.hpp"
#include "dss/env.hpp"
#include "dss/metrics.hpp"
#include "dss/trace.hpp"

namespace dss {

/// Slow-loop intent/policy message from the non-RT controller (rApp role).
/// The in-process transport may carry a refreshed actor directly; a wire
/// codec would ship checkpoint_ref instead.
struct IntentPolicyMsg {
  long policy_id = 0;       // strictly increasing per session
  double zeta = 0.5;        // [0,1]
  long effective_from = 0;  // step index; applies atomically between steps
  std::string checkpoint_ref;
  std::shared_ptr<const Mlp> actor;  // optional model refresh
};

struct DemandReportMsg {
  long step = 0;  // strictly increasing
  double d_a = 0.0;
  double d_b = 0.0;
};

struct AllocationCmdMsg {
  long step = 0;
  long n_a_int = 0;  // n_a_int + n_b_int == n_r exactly
  long n_b_int = 0;
};

/// One line of the session log.
struct SessionRecord {
  long step = 0;
  double d_a = 0.0, d_b = 0.0;
  double n_a = 0.0, n_b = 0.0;  // pre-integerization allocation
  long n_a_int = 0, n_b_int = 0;
  double zeta = 0.0;
  double imbalance = 0.0;
  double reward = 0.0;
};

enum class PolicyKind { learned, oracle, quasi_static };
PolicyKind policy_kind_from_string(const std::string& s);
std::string to_string(PolicyKind kind);

enum class IntentRuleKind { static_rule, ran_a_deficit };

/// Declarative intent rule evaluated once per non-RT tick.
struct IntentRule {
  IntentRuleKind kind = IntentRuleKind::static_rule;
  double deficit_threshold = 0.5;  // RAN_A deficit rate that triggers a bump
  double zeta_increment = 0.1;
  double zeta_cap = 1.0;
};

struct SessionConfig {
  PolicyKind policy = PolicyKind::learned;
  bool integerize = true;
  bool hold_last_on_gap = true;  // false: a report gap is a session error
  long non_rt_period = 1000;     // near-RT steps per non-RT tick
  IntentRule intent_rule;
  int retrain_steps = 0;  // non-RT model refresh per tick; 0 disables
  bool enable_non_rt = true;
  double initial_zeta = 0.5;
};

/// Minimal in-process transport; swap for a socket-backed queue without
/// touching the loop logic.
template <typename Msg>
class MessageQueue {
 public:
  void push(Msg m) { q_.push_back(std::move(m)); }
  std::optional<Msg> pop() {
    if (q_.empty()) return std::nullopt;
    Msg m = std::move(q_.front());
    q_.pop_front();
    return m;
  }
  bool empty() const { return q_.empty(); }
  std::size_t size() const { return q_.size(); }

 private:
  std::deque<Msg> q_;
};

/// Fast-loop controller (xApp role): consumes demand reports, applies the
/// currently effective intent policy, emits integerized allocation commands.
/// Reports are processed strictly sequentially.
class NearRtLoop {
 public:
  NearRtLoop(const RewardParams& base_params, int history_n, SessionConfig cfg,
             std::shared_ptr<const Mlp> actor, std::optional<Allocation> quasi_alloc);

  void deliver_policy(IntentPolicyMsg msg);
  AllocationCmdMsg process_report(const DemandReportMsg& report);

  const std::vector<SessionRecord>& log() const { return log_; }
  const std::vector<IntentPolicyMsg>& policy_history() const { return policy_history_; }
  std::size_t gap_warnings() const { return gap_warnings_; }
  double current_zeta() const { return params_.zeta; }

 private:
  RewardParams params_;
  int history_n_;
  SessionConfig cfg_;
  std::shared_ptr<const Mlp> actor_;
  std::optional<Allocation> quasi_alloc_;
  long n_r_int_;
  std::vector<IntentPolicyMsg> pending_;
  std::vector<IntentPolicyMsg> policy_history_;
  std::vector<double> hist_a_, hist_b_;
  std::vector<SessionRecord> log_;
  long last_policy_id_ = -1;
  long expected_step_ = 0;
  bool first_report_ = true;
  std::size_t gap_warnings_ = 0;
  std::optional<AllocationCmdMsg> last_cmd_;
};

/// Slow-loop controller (rApp role): once per schedule tick it may adjust
/// zeta per the intent rule and refresh the model from accumulated reports.
class NonRtLoop {
 public:
  NonRtLoop(SessionConfig cfg, AgentConfig agent_cfg, RewardParams base_params,
            std::shared_ptr<const Mlp> initial_actor,
            std::optional<Td3Networks> initial_networks);

  /// Returns a policy message when this tick changes anything.
  std::optional<IntentPolicyMsg> tick(const std::vector<SessionRecord>& recent,
                                      const std::vector<DemandReportMsg>& all_reports,
                                      long next_effective_step);

  std::size_t retrain_failures() const { return retrain_failures_; }

 private:
  SessionConfig cfg_;
  AgentConfig agent_cfg_;
  RewardParams base_params_;
  double zeta_;
  long next_policy_id_ = 1;
  std::shared_ptr<const Mlp> actor_;
  std::optional<Td3Networks> networks_;
  std::size_t retrain_failures_ = 0;
};

struct SessionResult {
  std::vector<SessionRecord> records;
  MetricsRecord metrics;
  long reports_sent = 0;
  long commands_received = 0;
  std::vector<IntentPolicyMsg> policy_history;
  std::size_t gap_warnings = 0;
  std::size_t retrain_failures = 0;
};

/// Wire trace playback through the near-RT loop, with the non-RT loop
/// attached for learned policies. Deterministic logical clocks.
SessionResult run_session(const TracePair& traces, const SessionConfig& cfg,
                          const RewardParams& base_params, const AgentConfig& agent_cfg,
                          std::shared_ptr<const Mlp> actor,
                          std::optional<Allocation> quasi_alloc,
                          std::optional<Td3Networks> networks = std::nullopt);

void save_session_log(const std::vector<SessionRecord>& records,
                      const std::string& path);
std::vector<SessionRecord> load_session_log(const std::string& path);

}  // namespace dss
