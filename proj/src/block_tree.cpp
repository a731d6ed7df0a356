#include "banyan/block_tree.hpp"

#include <algorithm>
#include <stdexcept>

namespace banyan {

BlockTree::BlockTree() {
  auto g = genesis_block();
  genesis_ = g->hash;
  TreeNode node;
  node.block = g;
  node.notarized = true;
  node.unlocked = true;
  node.finalized = true;
  nodes_.emplace(genesis_, std::move(node));
  by_round_[0].push_back(genesis_);
}

const TreeNode* BlockTree::find(const Digest& h) const {
  auto it = nodes_.find(h);
  return it == nodes_.end() ? nullptr : &it->second;
}

TreeNode* BlockTree::find(const Digest& h) {
  auto it = nodes_.find(h);
  return it == nodes_.end() ? nullptr : &it->second;
}

TreeNode& BlockTree::insert(std::shared_ptr<const Block> block) {
  if (auto* existing = find(block->hash)) return *existing;
  const TreeNode* parent = find(block->parent());
  if (parent == nullptr) throw std::logic_error("block tree: parent missing");
  if (parent->block->round() + 1 != block->round()) throw std::logic_error("block tree: parent round mismatch");
  const Round k = block->round();
  const Digest h = block->hash;
  TreeNode node;
  node.block = std::move(block);
  auto [it, _] = nodes_.emplace(h, std::move(node));
  by_round_[k].push_back(h);
  return it->second;
}

const std::vector<Digest>& BlockTree::round_blocks(Round k) const {
  static const std::vector<Digest> kEmpty;
  auto it = by_round_.find(k);
  return it == by_round_.end() ? kEmpty : it->second;
}

void BlockTree::set_round_unlocked(Round k, std::shared_ptr<const Aggregate> evidence) {
  round_unlocked_.try_emplace(k, std::move(evidence));
}

std::shared_ptr<const Aggregate> BlockTree::round_unlock_evidence(Round k) const {
  auto it = round_unlocked_.find(k);
  return it == round_unlocked_.end() ? nullptr : it->second;
}

std::vector<const TreeNode*> BlockTree::chain_above(const Digest& tip, Round above) const {
  std::vector<const TreeNode*> out;
  const TreeNode* cur = find(tip);
  while (cur != nullptr && cur->block->round() > above) {
    out.push_back(cur);
    if (cur->block->round() == 0) break;
    cur = find(cur->block->parent());
  }
  std::reverse(out.begin(), out.end());
  return out;
}

const TreeNode* BlockTree::ancestor_at(const Digest& tip, Round k) const {
  const TreeNode* cur = find(tip);
  while (cur != nullptr && cur->block->round() > k) cur = find(cur->block->parent());
  return (cur != nullptr && cur->block->round() == k) ? cur : nullptr;
}

std::vector<Digest> BlockTree::finalized_in_round(Round k) const {
  std::vector<Digest> out;
  for (const auto& h : round_blocks(k)) {
    if (find(h)->finalized) out.push_back(h);
  }
  return out;
}

}  // namespace banyan
