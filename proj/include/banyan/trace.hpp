#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "banyan/message.hpp"
#include "banyan/types.hpp"

namespace banyan {

inline constexpr std::uint32_t kNoReplica = std::numeric_limits<std::uint32_t>::max();
inline constexpr std::uint8_t kNoVoteKind = 0xff;

enum class RecordKind : std::uint8_t {
  Send = 0,        // from -> to (kNoReplica = broadcast), msg id
  Deliver = 1,     // from -> to, msg id
  Timer = 2,       // replica `from`
  Propose = 3,     // from proposed block (round, rank, parent, bytes)
  Vote = 4,        // from emitted a vote (vote_kind, round, block)
  EnterRound = 5,  // from entered `round` extending block_hash
  Notarized = 6,   // block became notarized at `from`
  Unlocked = 7,    // block became unlocked at `from`
  Finalized = 8,   // block finalized at `from` with path tag
  Output = 9,      // from output payloads of rounds [round, aux]
  Drop = 10,       // adversary or crash suppressed a message from `from`
  Malformed = 11,  // from rejected an invalid message (aux = reason code)
};

const char* to_string(RecordKind k);

/// One line of the global, totally ordered trace.
struct TraceRecord {
  SimTime time = 0;
  RecordKind kind = RecordKind::Timer;
  std::uint32_t from = kNoReplica;
  std::uint32_t to = kNoReplica;
  Round round = 0;
  Digest block_hash{};
  std::uint8_t vote_kind = kNoVoteKind;
  PathTag path = PathTag::None;
  MsgType msg_type = MsgType::None;
  std::uint64_t msg_id = 0;
  Digest parent{};
  std::uint32_t rank = 0;
  std::uint64_t bytes = 0;
  std::uint64_t aux = 0;

  bool operator==(const TraceRecord&) const = default;
};

struct AsyncWindow {
  SimTime start = 0;
  SimTime end = 0;

  bool contains(SimTime t) const { return t >= start && t < end; }
  bool operator==(const AsyncWindow&) const = default;
};

/// Everything a checker needs to know about the run besides the records.
struct TraceHeader {
  std::string scenario;
  ProtocolConfig cfg;
  std::uint64_t seed = 0;
  Round rounds = 0;
  std::uint64_t payload_bytes = 0;
  /// Behaviour name per replica ("honest", "crash", ...).
  std::vector<std::string> behaviors;
  std::vector<AsyncWindow> async_windows;
  /// Time the simulation stopped.
  SimTime end_time = 0;

  bool is_honest(std::uint32_t r) const { return r < behaviors.size() && behaviors[r] == "honest"; }
  /// Honest, or runs the honest engine and only omits messages as leader.
  /// Safety and growth are asserted for these replicas.
  bool follows_protocol(std::uint32_t r) const {
    return is_honest(r) || (r < behaviors.size() && behaviors[r] == "mute_leader");
  }
};

struct Trace {
  TraceHeader header;
  std::vector<TraceRecord> records;
};

/// SHA-256 over the canonical little-endian encoding of header and records.
Digest trace_digest(const Trace& trace);

/// Line-delimited JSON: one header line, then one line per record.
void write_trace_jsonl(const Trace& trace, std::ostream& out);
/// Throws std::runtime_error on malformed input. Stops cleanly at a
/// truncated final line.
Trace read_trace_jsonl(std::istream& in);

}  // namespace banyan
