#pragma once

#include <optional>
#include <span>
#include <vector>

#include "banyan/types.hpp"

namespace banyan {

/// Fast-vote support for one received block of the round.
struct BlockSupport {
  Digest hash;
  Rank rank = 0;
  /// Distinct fast-vote senders.
  std::vector<ReplicaId> supporters;
};

/// Support threshold for unlocking: |S| > threshold (strict) or, for the
/// documented mutation, |S| >= threshold.
struct UnlockRule {
  std::uint32_t threshold = 0;
  bool strict = true;

  bool passes(std::size_t support) const { return strict ? support > threshold : support >= threshold; }
};

struct UnlockEvaluation {
  /// The maximally supported rank-0 block (ties: smallest hash).
  std::optional<Digest> max_block;
  /// |supp(nonMaxBlocks)| passes the rule: every current and future block of
  /// the round is unlocked.
  bool round_wide = false;
  /// Blocks b with |supp(b) ∪ supp(nonLeaderBlocks)| passing the rule.
  std::vector<Digest> unlocked;
  std::size_t non_leader_support = 0;
  std::size_t non_max_support = 0;
};

/// Evaluates both unlock conditions over one round's received blocks and
/// fast votes. Pure; shared by the engine and by unlock-proof verification.
UnlockEvaluation evaluate_unlock(std::span<const BlockSupport> blocks, std::uint32_t n, UnlockRule rule);

}  // namespace banyan
