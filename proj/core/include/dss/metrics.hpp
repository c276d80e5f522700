#pragma once

#include <map>
#include <string>
#include <vector>

namespace dss {

/// Per-policy evaluation aggregates.
struct MetricsRecord {
  double mean_imbalance = 0.0;   // mean J
  double mean_reward = 0.0;
  double mean_surplus_a = 0.0;   // mean of max(0, (n-d)/d_eff)
  double mean_surplus_b = 0.0;
  double mean_deficit_a = 0.0;   // mean of max(0, (d-n)/d_eff)
  double mean_deficit_b = 0.0;
  double over_rate_a = 0.0;      // fraction of steps with n > d
  double over_rate_b = 0.0;
  double under_rate_a = 0.0;
  double under_rate_b = 0.0;
  double mean_sq_frac_err_a = 0.0;  // mean ((n-d)/d_eff)^2, intent-sweep metric
  double mean_sq_frac_err_b = 0.0;

  bool operator==(const MetricsRecord&) const = default;
};

/// Ordered (policy name, record) table.
using MetricsTable = std::vector<std::pair<std::string, MetricsRecord>>;

/// Delimiter-separated table with header; doubles at full round-trip
/// precision so parsing reproduces the in-memory record exactly.
void save_metrics_table(const MetricsTable& table, const std::string& path);
MetricsTable load_metrics_table(const std::string& path);
std::string format_metrics_table(const MetricsTable& table);

}  // namespace dss
