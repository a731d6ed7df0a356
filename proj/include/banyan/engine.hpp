#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <unordered_map>
#include <variant>
#include <vector>

#include "banyan/block_tree.hpp"
#include "banyan/crypto.hpp"
#include "banyan/message.hpp"
#include "banyan/trace.hpp"
#include "banyan/types.hpp"

namespace banyan {

struct TimerTick {
  SimTime now = 0;
};

struct Deliver {
  Message message;
  ReplicaId from{};
  SimTime now = 0;
};

using EngineInput = std::variant<TimerTick, Deliver>;

struct Outgoing {
  std::shared_ptr<const Message> message;
  /// nullopt: broadcast to every other replica.
  std::optional<ReplicaId> to;
};

/// Payloads of a contiguous, newly finalized span of rounds.
struct FinalizedOutput {
  Round first_round = 0;
  Round last_round = 0;
  std::vector<Digest> blocks;
  std::vector<std::shared_ptr<const Payload>> payloads;
};

struct EngineOutput {
  std::vector<Outgoing> sends;
  std::vector<FinalizedOutput> finalized;
  std::vector<TraceRecord> records;
};

/// Deliberate protocol bugs used to show the trace checkers have teeth.
enum class Mutation : std::uint8_t {
  None,
  QuorumMinusOne,     // notarization/finalization quorum lowered by one
  UnlockAtThreshold,  // unlock when support >= f+p instead of > f+p
  DoubleFastVote,     // a fast vote accompanies every notarization vote
};

const char* to_string(Mutation m);

struct EngineOptions {
  std::uint64_t payload_bytes = 0;
  std::uint64_t payload_seed = 0;
  /// No proposals in rounds beyond this one (0: unbounded).
  Round last_round = 0;
  Mutation mutation = Mutation::None;
};

/// Seeded payload for (replica, round).
std::shared_ptr<const Payload> make_payload(std::uint64_t seed, ReplicaId proposer, Round round, std::size_t size);

/// One replica running Banyan (or ICC when cfg.mode == Icc) as a pure,
/// deterministic state machine. Every input is processed to completion: all
/// handlers whose guards hold fire until none does.
class Replica {
 public:
  Replica(const ProtocolConfig& cfg, Signer signer, const KeyRegistry& keys, EngineOptions opts = {});

  EngineOutput handle(const EngineInput& input);

  /// Earliest future time at which a delay-guarded handler may fire.
  std::optional<SimTime> next_wakeup() const;

  ReplicaId id() const { return signer_.id(); }
  const ProtocolConfig& config() const { return cfg_; }
  const Thresholds& thresholds() const { return th_; }
  const Signer& signer() const { return signer_; }

  Round round() const { return k_; }
  Round finalized_round() const { return kmax_; }
  SimTime round_start() const { return t0_; }
  bool proposed() const { return proposed_; }
  bool fast_vote_sent() const { return fast_vote_sent_; }
  /// Blocks this replica sent notarization votes for in the current round.
  const std::vector<Digest>& notarization_votes_sent() const { return voted_; }
  const Digest& parent_choice() const { return parent_; }
  const BlockTree& tree() const { return tree_; }
  Rank own_rank() const { return rank_of(id(), k_, cfg_); }

  /// Block status queries against local state.
  bool unlocked(const Digest& block) const;
  bool notarized(const Digest& block) const;
  bool finalized(const Digest& block) const;

  /// Validity: extends a notarized and unlocked round (k-1) block, signed by
  /// its proposer with the right rank, and carries the proposer's fast vote
  /// when rank 0 (Banyan). Parent evidence attached to the message counts.
  bool valid(const BlockMsg& msg) const;

  /// Distinct voters of `kind` for `block` in `round` seen so far.
  std::size_t vote_count(VoteKind kind, Round round, const Digest& block) const;

 private:
  struct RoundVotes {
    std::unordered_map<Digest, std::map<std::uint32_t, Vote>, DigestHash> notarization;
    std::unordered_map<Digest, std::map<std::uint32_t, Vote>, DigestHash> fast;
    std::unordered_map<Digest, std::map<std::uint32_t, Vote>, DigestHash> finalization;

    std::unordered_map<Digest, std::map<std::uint32_t, Vote>, DigestHash>& of(VoteKind k);
    const std::unordered_map<Digest, std::map<std::uint32_t, Vote>, DigestHash>& of(VoteKind k) const;
  };

  // Ingestion: updates stores only; guards run in settle().
  void ingest(const Message& msg);
  void ingest_block(const BlockMsg& msg);
  void ingest_vote(const Vote& vote, bool own);
  void ingest_aggregate(const std::shared_ptr<const Aggregate>& agg);

  bool block_well_formed(const Block& b, std::uint64_t* reason) const;
  bool evidence_ok(const Digest& parent, const BlockMsg& msg) const;

  void settle();
  bool promote_pending();
  bool update_unlock();
  bool maybe_propose();
  bool maybe_notarize_vote();
  bool on_votes_notarization();
  bool maybe_finalize();
  bool maybe_advance_round();

  void enter_round(Round k);
  TreeNode& insert_block(std::shared_ptr<const Block> block);
  void mark_notarized(TreeNode& node, std::shared_ptr<const Aggregate> agg);
  void mark_unlocked(TreeNode& node, std::shared_ptr<const Aggregate> evidence);
  void finalize(TreeNode& node, std::shared_ptr<const Aggregate> agg, PathTag path);

  void broadcast(Message msg);
  void broadcast_vote(VoteKind kind, const Digest& block, Round round);
  BlockMsg block_msg_for(const TreeNode& node) const;
  std::shared_ptr<const Aggregate> build_aggregate(AggregateKind kind, Round round, const Digest& subject,
                                                   std::span<const Digest> attested) const;

  TraceRecord record(RecordKind kind) const;
  void malformed(std::uint64_t reason, Round round, const Digest& subject);

  ProtocolConfig cfg_;
  Signer signer_;
  const KeyRegistry* keys_;
  EngineOptions opts_;
  Thresholds th_;

  BlockTree tree_;
  std::map<Round, RoundVotes> votes_;
  std::map<Round, std::vector<Vote>> future_votes_;
  std::map<Digest, BlockMsg> pending_blocks_;
  std::unordered_map<Digest, std::shared_ptr<const Aggregate>, DigestHash> pending_notarization_;
  std::unordered_map<Digest, std::shared_ptr<const Aggregate>, DigestHash> pending_unlock_;
  std::unordered_map<Digest, std::shared_ptr<const Aggregate>, DigestHash> finalization_aggs_;
  std::set<std::pair<Round, Digest>> finalize_candidates_;

  // Per-round state.
  Round k_ = 1;
  Round kmax_ = 0;
  SimTime t0_ = 0;
  bool proposed_ = false;
  bool fast_vote_sent_ = false;
  std::vector<Digest> voted_;
  Digest parent_;
  bool unlock_dirty_ = true;

  SimTime now_ = 0;
  bool started_ = false;
  EngineOutput out_;
};

}  // namespace banyan
