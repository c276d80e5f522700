#include "dss/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dss {

void RewardParams::validate() const {
  if (!(zeta >= 0.0 && zeta <= 1.0))
    throw std::invalid_argument("RewardParams: zeta outside [0,1]");
  if (!(n_r > 0.0)) throw std::invalid_argument("RewardParams: n_r <= 0");
  if (!(epsilon_demand > 0.0))
    throw std::invalid_argument("RewardParams: epsilon_demand <= 0");
}

Observation build_observation(const std::vector<double>& demands_a,
                              const std::vector<double>& demands_b,
                              std::size_t t, std::size_t history_n) {
  if (t >= demands_a.size() || t >= demands_b.size())
    throw std::out_of_range("build_observation: t out of range");
  Observation obs;
  obs.pairs.reserve(history_n + 1);
  for (std::size_t k = 0; k <= history_n; ++k) {
    const std::size_t idx = k <= t ? t - k : 0;  // pad with earliest pair
    obs.pairs.emplace_back(demands_a[idx], demands_b[idx]);
  }
  return obs;
}

Observation build_observation(const DemandTrace& trace_a, const DemandTrace& trace_b,
                              std::size_t t, std::size_t history_n) {
  return build_observation(trace_a.demands, trace_b.demands, t, history_n);
}

double compute_imbalance(const Allocation& alloc, double d_a, double d_b,
                         const RewardParams& params) {
  const double da = std::max(d_a, params.epsilon_demand);
  const double db = std::max(d_b, params.epsilon_demand);
  const double fa = (alloc.n_a - da) / da;
  const double fb = (alloc.n_b - db) / db;
  return params.zeta * fa * fa + (1.0 - params.zeta) * fb * fb;
}

double compute_reward(double imbalance, const RewardParams& params) {
  if (params.reward_form == RewardForm::plain) return -imbalance;
  return -(1.0 + params.zeta) * imbalance;
}

StepResult step(std::size_t t, const Allocation& alloc, const DemandTrace& trace_a,
                const DemandTrace& trace_b, const RewardParams& params,
                std::size_t history_n) {
  StepResult result;
  result.observation = build_observation(trace_a, trace_b, t, history_n);
  result.allocation = alloc;
  result.demands = {trace_a.demands[t], trace_b.demands[t]};
  result.imbalance =
      compute_imbalance(alloc, result.demands.first, result.demands.second, params);
  result.reward = compute_reward(result.imbalance, params);
  return result;
}

Allocation optimal_allocation(double d_a, double d_b, const RewardParams& params) {
  const double da = std::max(d_a, params.epsilon_demand);
  const double db = std::max(d_b, params.epsilon_demand);
  // Degenerate intent weights get a tiny floor so the quadratic stays strictly
  // convex and the stationary point well defined.
  const double tiny = 1e-9;
  const double wa = std::max(params.zeta, tiny);
  const double wb = std::max(1.0 - params.zeta, tiny);
  const double a = wa / (da * da);
  const double b = wb / (db * db);
  double n_a = (a * da + b * (params.n_r - db)) / (a + b);
  n_a = std::clamp(n_a, 0.0, params.n_r);
  return {n_a, params.n_r - n_a};
}

Allocation quasi_static_allocation(const DemandTrace& train_a,
                                   const DemandTrace& train_b,
                                   const RewardParams& params) {
  train_a.validate();
  train_b.validate();
  const double p_a = *std::max_element(train_a.demands.begin(), train_a.demands.end());
  const double p_b = *std::max_element(train_b.demands.begin(), train_b.demands.end());
  if (p_a + p_b <= params.n_r) {
    return {p_a, params.n_r - p_a};
  }
  const double n_a = params.n_r * p_a / (p_a + p_b);
  return {n_a, params.n_r - n_a};
}

}  // namespace dss
