#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "banyan/checkers.hpp"
#include "banyan/netsim.hpp"
#include "json.hpp"

namespace banyan {

/// Invalid scenario; the message starts with the offending field path.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Scenario {
  std::string name;
  std::string description;
  ProtocolConfig cfg;
  DelayModel delays;
  std::vector<FaultSpec> faults;  // one per replica
  bool allow_excess_faults = false;
  std::uint64_t payload_bytes = 0;
  std::uint64_t msg_overhead = 256;
  Round rounds = 10;
  std::vector<std::uint64_t> seeds{1};
  Mutation mutation = Mutation::None;
  std::string output_dir;
  std::vector<std::string> warnings;

  std::uint32_t fault_count() const;
};

inline constexpr int kScenarioSchemaVersion = 1;

Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& file);

/// "A..B" (inclusive) or a single number.
std::vector<std::uint64_t> parse_seed_range(const std::string& s);

RunParams run_params(const Scenario& sc, std::uint64_t seed);

struct RunOutcome {
  RunResult result;
  Digest digest;
  std::vector<CheckReport> reports;
  Metrics metrics;

  bool pass() const { return all_pass(reports); }
};

RunOutcome run_scenario(const Scenario& sc, std::uint64_t seed);

/// trace.jsonl, trace.jsonl.digest, report.json, metrics.csv under dir.
void write_run_outputs(const RunOutcome& outcome, const std::filesystem::path& dir);
nlohmann::json run_report_json(const RunOutcome& outcome);

struct SeedResult {
  std::uint64_t seed = 0;
  Mode mode = Mode::Banyan;
  Digest digest;
  std::vector<CheckReport> reports;
  Metrics metrics;
  bool hit_time_cap = false;
};

struct SweepOptions {
  std::vector<std::uint64_t> seeds;
  unsigned parallel = 1;
  /// Run every seed in both modes and report paired latency deltas.
  bool compare_modes = false;
};

struct SweepResult {
  std::string scenario;
  std::vector<SeedResult> runs;  // seed order, banyan before icc when comparing
  nlohmann::json summary;
  Digest summary_digest;

  bool pass() const;
};

SweepResult sweep(const Scenario& sc, const SweepOptions& opts);

/// summary.json, summary.digest, runs.csv and, when comparing modes,
/// paired.csv under dir.
void write_sweep_outputs(const SweepResult& result, const std::filesystem::path& dir);

struct PairedRound {
  std::uint64_t seed = 0;
  Round round = 0;
  double banyan_ms = 0;
  double icc_ms = 0;
};

/// Rounds whose latency sample exists in both runs of a seed.
std::vector<PairedRound> paired_rounds(const SweepResult& result);

}  // namespace banyan
