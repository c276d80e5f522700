#include "dss/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dss {

namespace {

const char* kHeader =
    "policy,mean_imbalance,mean_reward,mean_surplus_a,mean_surplus_b,"
    "mean_deficit_a,mean_deficit_b,over_rate_a,over_rate_b,under_rate_a,"
    "under_rate_b,mean_sq_frac_err_a,mean_sq_frac_err_b";

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string format_metrics_table(const MetricsTable& table) {
  std::ostringstream out;
  out << kHeader << "\n";
  for (const auto& [name, m] : table) {
    out << name << "," << fmt(m.mean_imbalance) << "," << fmt(m.mean_reward) << ","
        << fmt(m.mean_surplus_a) << "," << fmt(m.mean_surplus_b) << ","
        << fmt(m.mean_deficit_a) << "," << fmt(m.mean_deficit_b) << ","
        << fmt(m.over_rate_a) << "," << fmt(m.over_rate_b) << ","
        << fmt(m.under_rate_a) << "," << fmt(m.under_rate_b) << ","
        << fmt(m.mean_sq_frac_err_a) << "," << fmt(m.mean_sq_frac_err_b) << "\n";
  }
  return out.str();
}

void save_metrics_table(const MetricsTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write metrics table: " + path);
  out << format_metrics_table(table);
  if (!out) throw std::runtime_error("write failed: " + path);
}

MetricsTable load_metrics_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics table: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kHeader)
    throw std::runtime_error("bad metrics header in " + path);
  MetricsTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 13)
      throw std::runtime_error("bad metrics row in " + path + ": " + line);
    MetricsRecord m;
    std::size_t i = 1;
    for (double* p : {&m.mean_imbalance, &m.mean_reward, &m.mean_surplus_a,
                      &m.mean_surplus_b, &m.mean_deficit_a, &m.mean_deficit_b,
                      &m.over_rate_a, &m.over_rate_b, &m.under_rate_a,
                      &m.under_rate_b, &m.mean_sq_frac_err_a, &m.mean_sq_frac_err_b})
      *p = std::stod(fields[i++]);
    table.emplace_back(fields[0], m);
  }
  return table;
}

}  // namespace dss
