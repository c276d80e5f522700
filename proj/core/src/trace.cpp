#include "dss/trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace dss {

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, delim)) {
    // trim surrounding whitespace
    auto b = field.find_first_not_of(" \t\r");
    auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  return out;
}

int parse_int_field(const std::string& s) {
  std::size_t pos = 0;
  int v = std::stoi(s, &pos, 0);
  if (pos != s.size()) throw std::invalid_argument("trailing characters in '" + s + "'");
  return v;
}

}  // namespace

std::string to_string(RanId id) { return id == RanId::A ? "A" : "B"; }
std::string to_string(TraceSource src) {
  return src == TraceSource::measured ? "measured" : "synthetic";
}

RanId ran_id_from_string(const std::string& s) {
  if (s == "A") return RanId::A;
  if (s == "B") return RanId::B;
  throw std::invalid_argument("unknown ran_id: " + s);
}

TraceSource trace_source_from_string(const std::string& s) {
  if (s == "measured") return TraceSource::measured;
  if (s == "synthetic") return TraceSource::synthetic;
  throw std::invalid_argument("unknown trace source: " + s);
}

void DemandTrace::validate() const {
  if (demands.empty()) throw std::invalid_argument("DemandTrace: empty demands");
  if (step_duration <= 0.0) throw std::invalid_argument("DemandTrace: step_duration <= 0");
  for (double d : demands) {
    if (!(d >= 0.0)) throw std::invalid_argument("DemandTrace: negative or NaN demand");
  }
}

void SynthConfig::validate() const {
  if (block_length < 1) throw std::invalid_argument("SynthConfig: block_length < 1");
  if (ar_coefficient < 0.0 || ar_coefficient >= 1.0)
    throw std::invalid_argument("SynthConfig: ar_coefficient outside [0,1)");
  if (noise_scale < 0.0) throw std::invalid_argument("SynthConfig: noise_scale < 0");
  if (length <= 0) throw std::invalid_argument("SynthConfig: length <= 0");
}

DciParseResult parse_dci_log(const std::string& path, const DciSchema& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open DCI log: " + path);

  std::string line;
  if (!std::getline(in, line)) return {};  // empty file -> empty sequence

  const auto header = split_line(line, schema.delimiter);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* name : {"sfn", "subframe", "rnti", "prb_count", "mcs", "dci_type"}) {
    if (!col.count(name))
      throw std::runtime_error(std::string("DCI log missing column: ") + name);
  }

  DciParseResult result;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_line(line, schema.delimiter);
    try {
      if (fields.size() < header.size())
        throw std::invalid_argument("expected " + std::to_string(header.size()) +
                                    " fields, got " + std::to_string(fields.size()));
      DciRecord rec;
      rec.sfn = parse_int_field(fields[col["sfn"]]);
      rec.subframe = parse_int_field(fields[col["subframe"]]);
      rec.rnti = fields[col["rnti"]];
      rec.prb_count = parse_int_field(fields[col["prb_count"]]);
      rec.mcs = parse_int_field(fields[col["mcs"]]);
      rec.dci_type = fields[col["dci_type"]];
      if (rec.sfn < 0 || rec.sfn > 1023) throw std::invalid_argument("sfn out of [0,1023]");
      if (rec.subframe < 0 || rec.subframe > 9)
        throw std::invalid_argument("subframe out of [0,9]");
      if (rec.prb_count < 0) throw std::invalid_argument("prb_count < 0");
      result.records.push_back(std::move(rec));
    } catch (const std::exception& e) {
      if (schema.strict)
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": malformed DCI row: " + e.what());
      ++result.skipped_rows;
    }
  }
  return result;
}

DemandTrace aggregate_dci_records(const std::vector<DciRecord>& records,
                                  double window_seconds) {
  if (records.empty()) throw std::invalid_argument("aggregate_dci_records: no records");
  if (window_seconds <= 0.0)
    throw std::invalid_argument("aggregate_dci_records: window <= 0");

  // Unroll sfn wraparound: each sfn decrease adds one 10240 ms epoch.
  // Per-subframe PRB sums keyed by absolute subframe index (1 ms ticks).
  std::map<std::int64_t, double> per_subframe;
  std::int64_t epoch = 0;
  int prev_sfn = records.front().sfn;
  for (const auto& rec : records) {
    if (rec.sfn < prev_sfn) ++epoch;
    prev_sfn = rec.sfn;
    const std::int64_t tick = epoch * 10240 + std::int64_t(rec.sfn) * 10 + rec.subframe;
    per_subframe[tick] += rec.prb_count;
  }

  const std::int64_t window_ms = std::llround(window_seconds * 1000.0);
  if (window_ms < 1) throw std::invalid_argument("window below 1 ms resolution");

  const std::int64_t t0 = per_subframe.begin()->first;
  const std::int64_t t1 = per_subframe.rbegin()->first;
  const std::int64_t n_windows = (t1 - t0) / window_ms + 1;

  DemandTrace trace;
  trace.ran_id = RanId::A;
  trace.step_duration = window_seconds;
  trace.source = TraceSource::measured;
  trace.demands.assign(std::size_t(n_windows), 0.0);
  for (const auto& [tick, prb] : per_subframe) {
    trace.demands[std::size_t((tick - t0) / window_ms)] += prb;
  }
  for (double& d : trace.demands) d /= double(window_ms);  // mean over subframes
  return trace;
}

DemandTrace synthesize_trace(const DemandTrace& source, const SynthConfig& cfg) {
  source.validate();
  cfg.validate();

  const auto& src = source.demands;
  const std::size_t n = src.size();
  const double sigma = trace_std(src);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> start_dist(0, n - 1);
  std::normal_distribution<double> noise(0.0, 1.0);

  DemandTrace out;
  out.ran_id = RanId::B;
  out.step_duration = source.step_duration;
  out.source = TraceSource::synthetic;
  out.demands.reserve(std::size_t(cfg.length));

  // Circular block bootstrap. Block boundaries are glued by AR(1) smoothing of
  // the jump between the last emitted value and the new block's start.
  double carry = 0.0;  // smoothed offset, decays with ar_coefficient
  bool have_prev = false;
  double prev = 0.0;
  while (out.demands.size() < std::size_t(cfg.length)) {
    const std::size_t start = start_dist(rng);
    if (have_prev) {
      carry = prev - src[start];
    }
    for (int k = 0; k < cfg.block_length && out.demands.size() < std::size_t(cfg.length);
         ++k) {
      const double base = src[(start + std::size_t(k)) % n];
      double v = base + carry;
      carry *= cfg.ar_coefficient;
      if (cfg.noise_scale > 0.0) v += noise(rng) * cfg.noise_scale * sigma;
      v = std::max(0.0, v);
      out.demands.push_back(v);
      prev = v;
      have_prev = true;
    }
    carry = 0.0;
  }
  return out;
}

TraceSplit window_trace(const DemandTrace& a, const DemandTrace& b, double split) {
  a.validate();
  b.validate();
  if (a.size() != b.size())
    throw std::invalid_argument("window_trace: trace length mismatch");
  if (a.step_duration != b.step_duration)
    throw std::invalid_argument("window_trace: step_duration mismatch");
  if (!(split > 0.0 && split < 1.0))
    throw std::invalid_argument("window_trace: split outside (0,1)");

  const std::size_t n = a.size();
  std::size_t cut = std::size_t(std::floor(double(n) * split));
  cut = std::clamp<std::size_t>(cut, 1, n - 1);

  auto take = [](const DemandTrace& t, std::size_t from, std::size_t to) {
    DemandTrace out = t;
    out.demands.assign(t.demands.begin() + std::ptrdiff_t(from),
                       t.demands.begin() + std::ptrdiff_t(to));
    return out;
  };
  TraceSplit s;
  s.train = {take(a, 0, cut), take(b, 0, cut)};
  s.eval = {take(a, cut, n), take(b, cut, n)};
  return s;
}

void save_trace(const DemandTrace& trace, const std::string& path) {
  trace.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace: " + path);
  char buf[64];
  out << "# ran_id " << to_string(trace.ran_id) << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", trace.step_duration);
  out << "# step_duration " << buf << "\n";
  out << "# source " << to_string(trace.source) << "\n";
  for (std::size_t i = 0; i < trace.demands.size(); ++i) {
    char ts[64], d[64];
    std::snprintf(ts, sizeof ts, "%.17g", double(i) * trace.step_duration);
    std::snprintf(d, sizeof d, "%.17g", trace.demands[i]);
    out << ts << " " << d << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

DemandTrace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace: " + path);
  DemandTrace trace;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string key, value;
      ss >> key >> value;
      if (key == "ran_id") trace.ran_id = ran_id_from_string(value);
      else if (key == "step_duration") trace.step_duration = std::stod(value);
      else if (key == "source") trace.source = trace_source_from_string(value);
      continue;
    }
    std::istringstream ss(line);
    double ts = 0.0, d = 0.0;
    if (!(ss >> ts >> d))
      throw std::runtime_error("malformed trace row in " + path + ": " + line);
    trace.demands.push_back(d);
  }
  trace.validate();
  return trace;
}

double trace_mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / double(xs.size());
}

double trace_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = trace_mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / double(xs.size()));
}

double lag1_autocorrelation(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = trace_mean(xs);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    den += (xs[i] - m) * (xs[i] - m);
    if (i + 1 < xs.size()) num += (xs[i] - m) * (xs[i + 1] - m);
  }
  if (den == 0.0) return 0.0;
  return num / den;
}

}  // namespace dss
