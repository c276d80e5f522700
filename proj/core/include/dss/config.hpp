#pragma once

#include <string>

#include "dss/agent.hpp"
#include "dss/env.hpp"
#include "dss/ric.hpp"
#include "dss/trace.hpp"

namespace dss {

/// One experiment, loaded from a key = value config file. See
/// docs/config-schema (README) for the full key list; every key has a
/// default, so a minimal config only names its inputs.
struct ExperimentConfig {
  // trace sources
  std::string trace_a;       // measured RAN_A trace file
  std::string trace_b;       // optional: pre-built RAN_B trace
  std::string dci_log;       // alternative RAN_A source: decoded DCI records
  double dci_window_s = 1.0;
  char dci_delimiter = ',';
  bool dci_strict = false;

  SynthConfig synth{50, 0.6, 0.05, 1, 4000};
  double split = 0.8;
  long train_steps = 20000;

  RewardParams reward;
  AgentConfig agent;
  SessionConfig harness;

  std::string checkpoint;  // input for eval/harness
  std::string out_dir = "out";
  bool plots = true;

  void validate() const;
};

/// Parse the config file. Unknown or malformed keys raise an error naming
/// the key.
ExperimentConfig load_experiment_config(const std::string& path);

}  // namespace dss
