#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "banyan/trace.hpp"
#include "json.hpp"

namespace banyan {

struct CheckReport {
  std::string property;
  bool pass = true;
  /// Human-readable summary; on violation names the round and replicas.
  std::string detail;
  Round round = 0;
  /// Records that witness the violation.
  std::vector<TraceRecord> counterexample;
};

/// At most one block finalized per round across correct replicas, and the
/// finalized blocks form one chain.
CheckReport check_safety(const Trace& trace);
/// A slow-path finalized block has no notarized sibling at any correct replica.
CheckReport check_lemma_sp(const Trace& trace);
/// A fast-path finalized block has no unlocked sibling at any correct replica.
CheckReport check_lemma_fp(const Trace& trace);
/// Every correct replica enters round rounds+1, each time extending a block it
/// saw notarized (and unlocked, in Banyan mode).
CheckReport check_growth(const Trace& trace);
/// Qualifying rounds finalize at the leader within two maximal one-way
/// delays (on either path: with uneven delays the slow quorum can win).
CheckReport check_fast_termination(const Trace& trace);
/// Correct replicas cast at most one fast and one finalization vote per round.
CheckReport check_vote_discipline(const Trace& trace);

std::vector<CheckReport> check_all(const Trace& trace);
bool all_pass(const std::vector<CheckReport>& reports);

struct LatencySample {
  Round round = 0;
  std::uint32_t proposer = 0;
  SimTime propose_time = 0;
  SimTime finalize_time = 0;
  PathTag path = PathTag::None;
  std::uint64_t bytes = 0;

  SimTime latency() const { return finalize_time - propose_time; }
};

struct Metrics {
  std::vector<LatencySample> samples;
  double mean_latency_ms = 0;
  double p50_latency_ms = 0;
  double p99_latency_ms = 0;
  double max_latency_ms = 0;
  /// Committed payload bytes per second, averaged over correct replicas.
  double throughput_bytes_per_s = 0;
  /// Mean time between round entries, averaged over correct replicas.
  double block_interval_ms = 0;
  double fast_hit_rate = 0;
  std::uint64_t rounds_finalized = 0;
};

Metrics compute_metrics(const Trace& trace);

nlohmann::json to_json(const CheckReport& report);
nlohmann::json to_json(const Metrics& metrics);

/// Columns: scenario, protocol, n, f, p, round, proposer, propose_ms,
/// finalize_ms, path, bytes.
void write_metrics_csv_header(std::ostream& out);
void write_metrics_csv_rows(const Trace& trace, const Metrics& metrics, std::ostream& out);

}  // namespace banyan
