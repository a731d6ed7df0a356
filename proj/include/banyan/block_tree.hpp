#pragma once

#include <map>
#include <memory>
#include <set>
#include <unordered_map>
#include <vector>

#include "banyan/types.hpp"

namespace banyan {

struct TreeNode {
  std::shared_ptr<const Block> block;
  bool notarized = false;
  bool unlocked = false;
  bool finalized = false;
  PathTag path = PathTag::None;
  std::shared_ptr<const Aggregate> notarization;
  /// UnlockProof, Finalization or FastFinalization demonstrating `unlocked`.
  std::shared_ptr<const Aggregate> unlock_evidence;
  std::shared_ptr<const Aggregate> finalization;
};

/// A replica's view of the tree of valid blocks rooted at genesis.
///
/// Only blocks that passed validation are inserted, so every non-genesis
/// node's parent is already present. Status flags are monotone.
class BlockTree {
 public:
  BlockTree();

  const Digest& genesis_hash() const { return genesis_; }

  bool contains(const Digest& h) const { return nodes_.contains(h); }
  const TreeNode* find(const Digest& h) const;
  TreeNode* find(const Digest& h);

  /// Inserts a validated block. Returns the node (existing one if the hash
  /// was already present). Throws if the parent is missing.
  TreeNode& insert(std::shared_ptr<const Block> block);

  /// Hashes of round-k blocks in insertion order.
  const std::vector<Digest>& round_blocks(Round k) const;

  /// Round-wide unlock flag: set once the round-wide support condition fires;
  /// covers current and future blocks of the round.
  void set_round_unlocked(Round k, std::shared_ptr<const Aggregate> evidence);
  bool round_unlocked(Round k) const { return round_unlocked_.contains(k); }
  std::shared_ptr<const Aggregate> round_unlock_evidence(Round k) const;

  /// Walks parents from `tip` while the round is > `above`. Result is in
  /// ascending round order and includes `tip`.
  std::vector<const TreeNode*> chain_above(const Digest& tip, Round above) const;

  /// Ancestor of `tip` at round `k`, or nullptr.
  const TreeNode* ancestor_at(const Digest& tip, Round k) const;

  std::size_t size() const { return nodes_.size(); }

  /// Finalized blocks across rounds: at most one per round when the
  /// protocol is safe. Returns every finalized hash of round k.
  std::vector<Digest> finalized_in_round(Round k) const;

 private:
  Digest genesis_;
  std::unordered_map<Digest, TreeNode, DigestHash> nodes_;
  std::map<Round, std::vector<Digest>> by_round_;
  std::map<Round, std::shared_ptr<const Aggregate>> round_unlocked_;
};

}  // namespace banyan
