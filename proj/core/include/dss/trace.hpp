#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace dss {

enum class RanId { A, B };
enum class TraceSource { measured, synthetic };

std::string to_string(RanId id);
std::string to_string(TraceSource src);
RanId ran_id_from_string(const std::string& s);
TraceSource trace_source_from_string(const std::string& s);

/// One decoded LTE downlink control message, as emitted by an external
/// control-channel decoder. mcs and dci_type are carried through but do not
/// enter the demand math.
struct DciRecord {
  int sfn = 0;        // system frame number, [0, 1023]
  int subframe = 0;   // [0, 9]
  std::string rnti;   // opaque device identifier
  int prb_count = 0;  // PRBs granted, >= 0
  int mcs = 0;
  std::string dci_type;
};

/// Per-RAN time series of PRB demand. The environment's ground truth.
struct DemandTrace {
  RanId ran_id = RanId::A;
  double step_duration = 1.0;   // seconds per sample, > 0
  std::vector<double> demands;  // non-negative PRB demands, non-empty
  TraceSource source = TraceSource::measured;

  std::size_t size() const { return demands.size(); }
  void validate() const;  // throws std::invalid_argument on broken invariants
};

/// Block-bootstrap synthetic-trace settings.
struct SynthConfig {
  int block_length = 50;       // samples per bootstrap block, >= 1
  double ar_coefficient = 0.6; // AR(1) transition smoothing, in [0, 1)
  double noise_scale = 0.05;   // Gaussian noise as fraction of source std
  std::uint64_t seed = 0;
  int length = 0;              // output samples, > 0

  void validate() const;
};

struct DciSchema {
  char delimiter = ',';
  bool strict = false;  // abort on malformed rows instead of skip-and-count
};

struct DciParseResult {
  std::vector<DciRecord> records;
  std::size_t skipped_rows = 0;  // malformed rows dropped (non-strict mode)
};

/// Parse a delimiter-separated DCI log with a header row naming columns
/// {sfn, subframe, rnti, prb_count, mcs, dci_type}. Malformed rows are
/// skipped and counted by default; strict mode aborts with the line number.
DciParseResult parse_dci_log(const std::string& path, const DciSchema& schema = {});

/// Aggregate decoded DCI records into a demand trace. Absolute time is
/// sfn*10ms + subframe*1ms with wraparound unrolling on sfn decrease; each
/// window's demand is the mean over the window of per-subframe PRB sums.
DemandTrace aggregate_dci_records(const std::vector<DciRecord>& records,
                                  double window_seconds);

/// Generate a statistically similar synthetic trace by circular block
/// bootstrap with AR(1)-smoothed block transitions and Gaussian noise scaled
/// to the source standard deviation. Deterministic for a fixed seed.
DemandTrace synthesize_trace(const DemandTrace& source, const SynthConfig& cfg);

struct TracePair {
  DemandTrace a;
  DemandTrace b;
};

struct TraceSplit {
  TracePair train;
  TracePair eval;
};

/// Chronological prefix/suffix split of two equal-length traces.
TraceSplit window_trace(const DemandTrace& a, const DemandTrace& b, double split);

/// Two-column trace file: '#'-prefixed metadata header (ran_id, step_duration,
/// source) followed by "timestamp_s prb_demand" rows.
void save_trace(const DemandTrace& trace, const std::string& path);
DemandTrace load_trace(const std::string& path);

double trace_mean(const std::vector<double>& xs);
double trace_std(const std::vector<double>& xs);
double lag1_autocorrelation(const std::vector<double>& xs);

}  // namespace dss
