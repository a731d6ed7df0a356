#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "banyan/engine.hpp"
#include "banyan/trace.hpp"
#include "banyan/types.hpp"

namespace banyan {

struct Jitter {
  SimTime lo = 0;
  SimTime hi = 0;
};

/// One-way delays. Delivery time of a message sent at t from i to j outside
/// any asynchrony window is t + base[i][j] + jitter, where the jitter is a
/// seeded function of (seed, i, j, message round, message class).
struct DelayModel {
  std::vector<std::vector<SimTime>> base;
  Jitter jitter;
  /// Messages sent inside a window are held until a seeded time no later
  /// than the window end, then delayed normally.
  std::vector<AsyncWindow> async_windows;

  static DelayModel uniform(std::uint32_t n, SimTime delay);
  SimTime max_delay() const;
};

/// Empty when consistent with cfg; otherwise a reason.
std::string check_delay_model(const DelayModel& model, const ProtocolConfig& cfg);

enum class Behavior : std::uint8_t {
  Honest,
  Crash,
  MuteLeader,
  EquivocatingLeader,
  PromiscuousFastVoter,
  WithholdVotes,
};

struct FaultSpec {
  Behavior behavior = Behavior::Honest;
  SimTime crash_at = 0;
  std::vector<VoteKind> withhold;
};

const char* to_string(Behavior b);
/// Inverse of to_string; throws std::invalid_argument.
Behavior parse_behavior(const std::string& s);

struct RunParams {
  std::string scenario;
  ProtocolConfig cfg;
  DelayModel delays;
  /// One entry per replica, or empty for all honest.
  std::vector<FaultSpec> faults;
  Round rounds = 10;
  std::uint64_t seed = 0;
  std::uint64_t payload_bytes = 0;
  /// Wire-size overhead charged per message.
  std::uint64_t msg_overhead = 256;
  Mutation mutation = Mutation::None;
};

struct RunStats {
  std::uint64_t events = 0;
  std::uint64_t messages = 0;
  bool hit_time_cap = false;
};

struct RunResult {
  Trace trace;
  RunStats stats;
};

/// Drives n replicas plus fault behaviours over the delay model until the
/// event queue drains (no proposals past `rounds`) or the time cap is hit.
/// A pure function of its argument.
RunResult run(const RunParams& params);

/// Simulated-time cap used by run().
SimTime time_cap(const RunParams& params);

}  // namespace banyan
