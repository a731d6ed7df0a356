#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "banyan/types.hpp"
#include "banyan/unlock.hpp"

namespace banyan {

/// Per-replica signing capability. Only the simulator hands these out, one
/// per replica, so a Byzantine replica holds exactly its own key.
class Signer {
 public:
  ReplicaId id() const { return id_; }
  Signature sign(std::span<const std::uint8_t> message) const;

 private:
  friend class KeyRegistry;
  Signer(ReplicaId id, Digest secret) : id_(id), secret_(secret) {}

  ReplicaId id_;
  Digest secret_;
};

/// Simulated PKI. A signature is (signer, tag) where the tag is a keyed
/// digest of the message; verification recomputes it from the registry's
/// secret, so tags cannot be produced without the Signer.
class KeyRegistry {
 public:
  KeyRegistry(std::uint32_t n, std::uint64_t seed);

  std::uint32_t size() const { return static_cast<std::uint32_t>(secrets_.size()); }

  Signer signer_for(ReplicaId r);

  bool verify(ReplicaId r, std::span<const std::uint8_t> message, const Signature& sig) const;

 private:
  std::vector<Digest> secrets_;
};

class AggregationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Vote make_vote(const Signer& signer, VoteKind kind, Round round, const Digest& block_hash);
bool verify_vote(const KeyRegistry& keys, const Vote& vote);

void sign_header(const Signer& signer, BlockHeader& header);
/// Signature by the proposer over the header hash, and rank consistent with
/// the rotation rule.
bool verify_header(const KeyRegistry& keys, const BlockHeader& header, const ProtocolConfig& cfg);

/// Quorum sizes and unlock rule in effect. Defaults come from the config;
/// engine mutations used by the sensitivity tests override them.
struct Thresholds {
  std::uint32_t notarization = 0;
  std::uint32_t fast = 0;
  UnlockRule unlock{};
};

Thresholds default_thresholds(const ProtocolConfig& cfg);

/// Builds an aggregate from explicit votes.
///
/// Notarization/Finalization/FastFinalization: all votes must be of the
/// matching kind, share round and block hash, and have distinct voters.
/// UnlockProof: fast votes of one round, distinct (voter, block) pairs;
/// `headers` must cover every attested block.
/// Throws AggregationError on duplicate voters, mixed rounds or mixed blocks.
Aggregate aggregate(AggregateKind kind, const Digest& subject, std::vector<Vote> votes,
                    std::vector<BlockHeader> headers = {});

struct UnlockProofVerdict {
  bool valid = false;
  /// Demonstrates the round-wide condition (covers every block of the round).
  bool round_wide = false;
  /// Blocks individually unlocked by the proof.
  std::vector<Digest> unlocked;
};

/// Checks an UnlockProof's votes and headers and re-evaluates the unlock
/// conditions over exactly the proof's contents.
UnlockProofVerdict check_unlock_proof(const Aggregate& proof, const ProtocolConfig& cfg, const KeyRegistry& keys,
                                      const Thresholds& th);

/// Signature, distinctness and quorum checks. Never throws.
bool verify_aggregate(const Aggregate& agg, const ProtocolConfig& cfg, const KeyRegistry& keys,
                      const Thresholds& th);
bool verify_aggregate(const Aggregate& agg, const ProtocolConfig& cfg, const KeyRegistry& keys);

}  // namespace banyan
