#pragma once

#include <cstddef>
#include <vector>

#include "dss/trace.hpp"

namespace dss {

/// Which reward the environment reports: the literal -J - zeta*J from the
/// problem statement, or the plain -J. Both induce the same policy ordering
/// for a fixed zeta.
enum class RewardForm { literal, plain };

struct RewardParams {
  double zeta = 0.5;           // intent weight, [0,1]; ->1 favors RAN_A
  double n_r = 100.0;          // total PRB pool, > 0
  double epsilon_demand = 0.5; // division guard for idle windows, > 0
  RewardForm reward_form = RewardForm::literal;

  void validate() const;
};

/// Ordered demand-pair history; pairs[0] is the current step, pairs[k] the
/// demand k steps back.
struct Observation {
  std::vector<std::pair<double, double>> pairs;  // (d_a, d_b), length n+1
};

/// One partition of the n_r-PRB pool.
struct Allocation {
  double n_a = 0.0;
  double n_b = 0.0;
};

struct StepResult {
  Observation observation;
  Allocation allocation;
  double imbalance = 0.0;  // J >= 0
  double reward = 0.0;     // <= 0
  std::pair<double, double> demands;  // (d_a, d_b) at t
};

/// Observation from raw demand vectors; missing history at the start is
/// padded by repeating the earliest available pair.
Observation build_observation(const std::vector<double>& demands_a,
                              const std::vector<double>& demands_b,
                              std::size_t t, std::size_t history_n);

Observation build_observation(const DemandTrace& trace_a, const DemandTrace& trace_b,
                              std::size_t t, std::size_t history_n);

/// J = zeta*((n_a-d_a)/d_a)^2 + (1-zeta)*((n_b-d_b)/d_b)^2, with demands
/// guarded below by epsilon_demand.
double compute_imbalance(const Allocation& alloc, double d_a, double d_b,
                         const RewardParams& params);

double compute_reward(double imbalance, const RewardParams& params);

StepResult step(std::size_t t, const Allocation& alloc, const DemandTrace& trace_a,
                const DemandTrace& trace_b, const RewardParams& params,
                std::size_t history_n);

/// Closed-form minimizer of J over the constraint line n_a + n_b = n_r,
/// clipped to [0, n_r]. Unique stationary point of the convex quadratic.
Allocation optimal_allocation(double d_a, double d_b, const RewardParams& params);

/// Fixed partition sized to training peaks: RAN_A gets its peak and RAN_B the
/// remainder when both peaks fit, else a proportional split.
Allocation quasi_static_allocation(const DemandTrace& train_a,
                                   const DemandTrace& train_b,
                                   const RewardParams& params);

}  // namespace dss
