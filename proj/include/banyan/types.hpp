#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "banyan/digest.hpp"

namespace banyan {

enum class ReplicaId : std::uint32_t {};

constexpr std::uint32_t idx(ReplicaId r) { return static_cast<std::uint32_t>(r); }
constexpr ReplicaId replica(std::uint32_t i) { return static_cast<ReplicaId>(i); }

using Round = std::uint64_t;
using Rank = std::uint32_t;

/// Simulated time in microseconds. Scenario files and reports use
/// milliseconds; conversion happens at the edges.
using SimTime = std::int64_t;

constexpr SimTime from_ms(double ms) { return static_cast<SimTime>(ms * 1000.0 + (ms >= 0 ? 0.5 : -0.5)); }
constexpr double to_ms(SimTime t) { return static_cast<double>(t) / 1000.0; }

enum class Mode : std::uint8_t { Banyan, Icc };

enum class RotationKind : std::uint8_t { RoundRobin, SeededPermutation };

struct Rotation {
  RotationKind kind = RotationKind::RoundRobin;
  std::uint64_t seed = 0;
};

struct ProtocolConfig {
  std::uint32_t n = 4;
  std::uint32_t f = 1;
  std::uint32_t p = 1;
  SimTime delta_bound = from_ms(100);
  Mode mode = Mode::Banyan;
  Rotation rotation{};
};

struct ConfigCheck {
  bool ok = true;
  std::string reason;
  std::vector<std::string> warnings;
};

/// Resilience check: n >= max(3f + 2p - 1, 3f + 1), 0 <= p <= f, delta > 0.
ConfigCheck validate_config(const ProtocolConfig& cfg);

/// ceil((n + f + 1) / 2); shared by notarization and finalization votes.
std::uint32_t notarization_quorum(const ProtocolConfig& cfg);

/// n - p fast votes explicitly finalize a rank-0 block.
std::uint32_t fast_quorum(const ProtocolConfig& cfg);

/// Rank of `r` in round `k`. Round robin: (r - k) mod n, so the leader of
/// round k is replica k mod n.
Rank rank_of(ReplicaId r, Round k, const ProtocolConfig& cfg);

/// Inverse of rank_of: the replica holding `rank` in round `k`.
ReplicaId replica_at_rank(Rank rank, Round k, const ProtocolConfig& cfg);

inline ReplicaId leader_of(Round k, const ProtocolConfig& cfg) { return replica_at_rank(0, k, cfg); }

/// Proposal delay 2 * delta * rank, measured from round start.
SimTime proposal_delay(Rank rank, const ProtocolConfig& cfg);
/// Notarization delay 2 * delta * rank, measured from round start.
SimTime notarization_delay(Rank rank, const ProtocolConfig& cfg);

// ---------------------------------------------------------------------------
// Blocks, votes, aggregates

struct Signature {
  ReplicaId signer{};
  Digest tag{};

  bool operator==(const Signature&) const = default;
};

using Payload = std::vector<std::uint8_t>;

struct BlockHeader {
  Round round = 0;
  ReplicaId proposer{};
  Rank rank = 0;
  Digest parent{};
  Digest payload_digest{};
  Signature signature{};

  /// Digest over round | proposer | rank | parent | payload digest, all
  /// little-endian fixed width. The signature is not covered.
  Digest hash() const;
};

enum class VoteKind : std::uint8_t { Notarization = 0, Fast = 1, Finalization = 2 };

const char* to_string(VoteKind k);

struct Vote {
  VoteKind kind = VoteKind::Notarization;
  ReplicaId voter{};
  Round round = 0;
  Digest block_hash{};
  Signature signature{};

  /// Signed content: kind | voter | round | block hash.
  std::vector<std::uint8_t> signing_bytes() const;

  bool operator==(const Vote&) const = default;
};

struct Block {
  BlockHeader header;
  /// Cached header.hash(); receivers recompute it before trusting a block.
  Digest hash{};
  std::shared_ptr<const Payload> payload;
  /// The proposer's own fast vote, present iff rank 0 in Banyan mode.
  std::optional<Vote> embedded_fast_vote;

  Round round() const { return header.round; }
  Rank rank() const { return header.rank; }
  ReplicaId proposer() const { return header.proposer; }
  const Digest& parent() const { return header.parent; }
  std::size_t payload_size() const { return payload ? payload->size() : 0; }
};

/// The genesis block: round 0, no parent, notarized, finalized and unlocked
/// by definition.
std::shared_ptr<const Block> genesis_block();

enum class AggregateKind : std::uint8_t { Notarization = 0, Finalization = 1, FastFinalization = 2, UnlockProof = 3 };

const char* to_string(AggregateKind k);

struct Aggregate {
  AggregateKind kind = AggregateKind::Notarization;
  Round round = 0;
  /// Block the aggregate is about. For an UnlockProof that demonstrates the
  /// round-wide condition the subject may be zero.
  Digest subject{};
  /// Explicit voter set standing in for a multi-signature.
  std::vector<Vote> votes;
  /// Headers of the blocks the votes attest. Used by UnlockProof (to know
  /// ranks) and FastFinalization (to prove rank 0).
  std::vector<BlockHeader> headers;
};

enum class PathTag : std::uint8_t { None = 0, Fast = 1, Slow = 2, Implicit = 3 };

const char* to_string(PathTag t);
const char* to_string(Mode m);

}  // namespace banyan
