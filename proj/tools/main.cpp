// dss: train, evaluate, and replay the spectrum-sharing allocator.
//
// Subcommands: synth, train, eval, harness, plot. Each takes --config PATH
// plus optional --seed / --out overrides. Exit codes: 0 success, 1
// usage/config error, 2 runtime error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>

#include <CLI11.hpp>

#include "dss/agent.hpp"
#include "dss/config.hpp"
#include "dss/env.hpp"
#include "dss/plot.hpp"
#include "dss/ric.hpp"
#include "dss/trace.hpp"

namespace fs = std::filesystem;
using namespace dss;

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<long> seed;
  std::optional<std::string> out;
};

ExperimentConfig load_config(const CommonArgs& args) {
  ExperimentConfig cfg = load_experiment_config(args.config_path);
  if (args.seed) {
    cfg.agent.seed = std::uint64_t(*args.seed);
    cfg.synth.seed = std::uint64_t(*args.seed);
  }
  if (args.out) cfg.out_dir = *args.out;
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  return cfg;
}

DemandTrace load_trace_a(const ExperimentConfig& cfg) {
  if (!cfg.trace_a.empty()) return load_trace(cfg.trace_a);
  if (!cfg.dci_log.empty()) {
    DciSchema schema;
    schema.delimiter = cfg.dci_delimiter;
    schema.strict = cfg.dci_strict;
    auto parsed = parse_dci_log(cfg.dci_log, schema);
    if (parsed.skipped_rows > 0)
      std::cerr << "warning: skipped " << parsed.skipped_rows
                << " malformed DCI rows\n";
    return aggregate_dci_records(parsed.records, cfg.dci_window_s);
  }
  throw std::runtime_error("config: need trace_a or dci_log");
}

TracePair load_trace_pair(const ExperimentConfig& cfg) {
  TracePair pair;
  pair.a = load_trace_a(cfg);
  if (!cfg.trace_b.empty()) {
    pair.b = load_trace(cfg.trace_b);
  } else {
    SynthConfig synth = cfg.synth;
    if (synth.length <= 0) synth.length = int(pair.a.size());
    pair.b = synthesize_trace(pair.a, synth);
  }
  if (pair.a.size() != pair.b.size()) {
    const std::size_t n = std::min(pair.a.size(), pair.b.size());
    pair.a.demands.resize(n);
    pair.b.demands.resize(n);
  }
  return pair;
}

std::string checkpoint_path(const ExperimentConfig& cfg) {
  if (!cfg.checkpoint.empty()) return cfg.checkpoint;
  return (fs::path(cfg.out_dir) / "checkpoint.json").string();
}

void print_stats(const std::string& name, const std::vector<double>& xs) {
  std::printf("%-10s mean=%.3f std=%.3f lag1_autocorr=%.3f n=%zu\n", name.c_str(),
              trace_mean(xs), trace_std(xs), lag1_autocorrelation(xs), xs.size());
}

void print_metrics_table(const MetricsTable& table) {
  std::printf("%-14s %10s %10s %8s %8s %8s %8s\n", "policy", "mean_J", "mean_r",
              "over_A", "under_A", "over_B", "under_B");
  for (const auto& [name, m] : table) {
    std::printf("%-14s %10.5f %10.5f %8.3f %8.3f %8.3f %8.3f\n", name.c_str(),
                m.mean_imbalance, m.mean_reward, m.over_rate_a, m.under_rate_a,
                m.over_rate_b, m.under_rate_b);
  }
}

PlotSeries demand_series(const std::vector<StepResult>& steps, bool ran_a) {
  PlotSeries s;
  s.label = ran_a ? "demand A" : "demand B";
  s.color = ran_a ? "#1f77b4" : "#2ca02c";
  for (std::size_t i = 0; i < steps.size(); ++i) {
    s.x.push_back(double(i));
    s.y.push_back(ran_a ? steps[i].demands.first : steps[i].demands.second);
  }
  return s;
}

PlotSeries alloc_series(const std::vector<StepResult>& steps, bool ran_a) {
  PlotSeries s;
  s.label = ran_a ? "alloc A" : "alloc B";
  s.color = ran_a ? "#ff7f0e" : "#d62728";
  for (std::size_t i = 0; i < steps.size(); ++i) {
    s.x.push_back(double(i));
    s.y.push_back(ran_a ? steps[i].allocation.n_a : steps[i].allocation.n_b);
  }
  return s;
}

void write_policy_plot(const std::string& path, const std::string& title,
                       const std::vector<StepResult>& steps) {
  write_svg_line_plot(path, title, "eval step", "PRBs",
                      {demand_series(steps, true), alloc_series(steps, true),
                       demand_series(steps, false), alloc_series(steps, false)});
}

void write_reward_curve(const std::string& path,
                        const std::vector<TrainLogEntry>& log) {
  PlotSeries raw{"reward", "#9ecae1", {}, {}};
  PlotSeries avg{"reward (100-step mean)", "#08519c", {}, {}};
  double acc = 0.0;
  std::deque<double> window;
  for (const auto& e : log) {
    raw.x.push_back(double(e.step));
    raw.y.push_back(e.reward);
    window.push_back(e.reward);
    acc += e.reward;
    if (window.size() > 100) {
      acc -= window.front();
      window.pop_front();
    }
    avg.x.push_back(double(e.step));
    avg.y.push_back(acc / double(window.size()));
  }
  write_svg_line_plot(path, "Training reward", "step", "reward", {raw, avg});
}

int cmd_synth(const CommonArgs& args) {
  const ExperimentConfig cfg = load_config(args);
  const DemandTrace source = load_trace_a(cfg);
  SynthConfig synth = cfg.synth;
  if (synth.length <= 0) synth.length = int(source.size());
  const DemandTrace synthetic = synthesize_trace(source, synth);
  const std::string out = (fs::path(cfg.out_dir) / "ran_b_synthetic.txt").string();
  save_trace(synthetic, out);
  print_stats("source", source.demands);
  print_stats("synthetic", synthetic.demands);
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

int cmd_train(const CommonArgs& args) {
  const ExperimentConfig cfg = load_config(args);
  const TracePair pair = load_trace_pair(cfg);
  const TraceSplit split = window_trace(pair.a, pair.b, cfg.split);

  Td3Agent agent(cfg.agent, cfg.reward);
  const auto log = agent.train(split.train, cfg.train_steps);

  const std::string ckpt = (fs::path(cfg.out_dir) / "checkpoint.json").string();
  save_checkpoint(ckpt, agent.networks(), cfg.agent, cfg.reward);
  const std::string log_path = (fs::path(cfg.out_dir) / "training_log.csv").string();
  save_training_log(log, log_path);
  if (cfg.plots && !log.empty())
    write_reward_curve((fs::path(cfg.out_dir) / "reward_curve.svg").string(), log);

  double tail_mean = 0.0;
  const std::size_t tail = std::min<std::size_t>(log.size(), 500);
  for (std::size_t i = log.size() - tail; i < log.size(); ++i)
    tail_mean += log[i].reward / double(tail ? tail : 1);
  std::printf("trained %ld steps; tail mean reward %.5f\nwrote %s\n", cfg.train_steps,
              tail_mean, ckpt.c_str());
  return 0;
}

int cmd_eval(const CommonArgs& args) {
  const ExperimentConfig cfg = load_config(args);
  const TracePair pair = load_trace_pair(cfg);
  const TraceSplit split = window_trace(pair.a, pair.b, cfg.split);

  const Checkpoint ckpt = load_checkpoint(checkpoint_path(cfg));
  const Allocation quasi =
      quasi_static_allocation(split.train.a, split.train.b, cfg.reward);
  const EvaluationReport report = evaluate(ckpt.networks.actor, split.eval, quasi,
                                           cfg.reward, cfg.agent.history_n);

  MetricsTable table{{"learned", report.learned.metrics},
                     {"quasi_static", report.quasi_static.metrics},
                     {"oracle", report.oracle.metrics}};
  save_metrics_table(table, (fs::path(cfg.out_dir) / "metrics.csv").string());
  print_metrics_table(table);

  if (cfg.plots) {
    write_policy_plot((fs::path(cfg.out_dir) / "eval_learned.svg").string(),
                      "PRB demand vs allocation (learned)", report.learned.steps);
    write_policy_plot((fs::path(cfg.out_dir) / "eval_quasi_static.svg").string(),
                      "PRB demand vs allocation (quasi-static)",
                      report.quasi_static.steps);
    write_policy_plot((fs::path(cfg.out_dir) / "eval_oracle.svg").string(),
                      "PRB demand vs allocation (oracle)", report.oracle.steps);
  }
  return 0;
}

int cmd_harness(const CommonArgs& args) {
  const ExperimentConfig cfg = load_config(args);
  const TracePair pair = load_trace_pair(cfg);
  const TraceSplit split = window_trace(pair.a, pair.b, cfg.split);

  std::shared_ptr<const Mlp> actor;
  std::optional<Td3Networks> networks;
  if (cfg.harness.policy == PolicyKind::learned) {
    Checkpoint ckpt = load_checkpoint(checkpoint_path(cfg));
    actor = std::make_shared<Mlp>(ckpt.networks.actor);
    networks = std::move(ckpt.networks);
  }
  const Allocation quasi =
      quasi_static_allocation(split.train.a, split.train.b, cfg.reward);

  SessionConfig scfg = cfg.harness;
  scfg.initial_zeta = cfg.reward.zeta;
  const SessionResult session = run_session(split.eval, scfg, cfg.reward, cfg.agent,
                                            actor, quasi, std::move(networks));

  save_session_log(session.records,
                   (fs::path(cfg.out_dir) / "session_log.csv").string());
  save_metrics_table({{to_string(scfg.policy), session.metrics}},
                     (fs::path(cfg.out_dir) / "session_metrics.csv").string());
  print_metrics_table({{to_string(scfg.policy), session.metrics}});
  std::printf("reports=%ld commands=%ld policy_changes=%zu gaps=%zu\n",
              session.reports_sent, session.commands_received,
              session.policy_history.size(), session.gap_warnings);

  if (cfg.plots && !session.records.empty()) {
    PlotSeries zeta{"zeta", "#d62728", {}, {}};
    PlotSeries na{"alloc A", "#ff7f0e", {}, {}};
    PlotSeries da{"demand A", "#1f77b4", {}, {}};
    for (const auto& r : session.records) {
      zeta.x.push_back(double(r.step));
      zeta.y.push_back(r.zeta);
      na.x.push_back(double(r.step));
      na.y.push_back(double(r.n_a_int));
      da.x.push_back(double(r.step));
      da.y.push_back(r.d_a);
    }
    write_svg_line_plot((fs::path(cfg.out_dir) / "zeta_timeline.svg").string(),
                        "Intent weight over the session", "step", "zeta", {zeta});
    write_svg_line_plot((fs::path(cfg.out_dir) / "harness_alloc.svg").string(),
                        "Session demand vs command (RAN_A)", "step", "PRBs",
                        {da, na});
  }
  return 0;
}

int cmd_plot(const CommonArgs& args) {
  const ExperimentConfig cfg = load_config(args);
  const fs::path out(cfg.out_dir);
  bool any = false;
  if (fs::exists(out / "training_log.csv")) {
    const auto log = load_training_log((out / "training_log.csv").string());
    if (!log.empty()) write_reward_curve((out / "reward_curve.svg").string(), log);
    any = true;
  }
  if (fs::exists(out / "session_log.csv")) {
    const auto records = load_session_log((out / "session_log.csv").string());
    PlotSeries zeta{"zeta", "#d62728", {}, {}};
    PlotSeries na{"alloc A", "#ff7f0e", {}, {}};
    PlotSeries da{"demand A", "#1f77b4", {}, {}};
    for (const auto& r : records) {
      zeta.x.push_back(double(r.step));
      zeta.y.push_back(r.zeta);
      na.x.push_back(double(r.step));
      na.y.push_back(double(r.n_a_int));
      da.x.push_back(double(r.step));
      da.y.push_back(r.d_a);
    }
    write_svg_line_plot((out / "zeta_timeline.svg").string(),
                        "Intent weight over the session", "step", "zeta", {zeta});
    write_svg_line_plot((out / "harness_alloc.svg").string(),
                        "Session demand vs command (RAN_A)", "step", "PRBs",
                        {da, na});
    any = true;
  }
  if (!any) {
    std::cerr << "nothing to plot in " << cfg.out_dir << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynamic spectrum sharing simulator"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config_path, "experiment config file")
        ->required();
    sub->add_option_function<long>(
        "--seed", [&](long v) { args.seed = v; }, "override config seeds");
    sub->add_option_function<std::string>(
        "--out", [&](const std::string& v) { args.out = v; },
        "override output directory");
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic RAN_B trace");
  auto* train = app.add_subcommand("train", "train the TD3 allocator");
  auto* eval = app.add_subcommand("eval", "compare learned/quasi-static/oracle");
  auto* harness = app.add_subcommand("harness", "run the simulated RIC session");
  auto* plot = app.add_subcommand("plot", "re-render plots from logs");
  for (auto* sub : {synth, train, eval, harness, plot}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) return cmd_synth(args);
    if (train->parsed()) return cmd_train(args);
    if (eval->parsed()) return cmd_eval(args);
    if (harness->parsed()) return cmd_harness(args);
    if (plot->parsed()) return cmd_plot(args);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    const std::string what = e.what();
    std::cerr << "error: " << what << "\n";
    if (what.find("config") != std::string::npos ||
        what.find("cannot open") != std::string::npos)
      return 1;
    return 2;
  }
  return 1;
}
