#include "banyan/unlock.hpp"

#include <algorithm>

namespace banyan {

namespace {

struct Mask {
  explicit Mask(std::uint32_t n) : bits(n, false) {}
  void add(const std::vector<ReplicaId>& ids) {
    for (auto r : ids) {
      if (idx(r) < bits.size() && !bits[idx(r)]) {
        bits[idx(r)] = true;
        ++count;
      }
    }
  }
  std::vector<bool> bits;
  std::size_t count = 0;
};

std::size_t distinct(const std::vector<ReplicaId>& ids, std::uint32_t n) {
  Mask m(n);
  m.add(ids);
  return m.count;
}

}  // namespace

UnlockEvaluation evaluate_unlock(std::span<const BlockSupport> blocks, std::uint32_t n, UnlockRule rule) {
  UnlockEvaluation out;

  const BlockSupport* max = nullptr;
  std::size_t max_support = 0;
  for (const auto& b : blocks) {
    if (b.rank != 0) continue;
    const std::size_t s = distinct(b.supporters, n);
    if (max == nullptr || s > max_support || (s == max_support && b.hash < max->hash)) {
      max = &b;
      max_support = s;
    }
  }
  if (max != nullptr) out.max_block = max->hash;

  Mask non_leader(n);
  Mask non_max(n);
  for (const auto& b : blocks) {
    if (b.rank != 0) non_leader.add(b.supporters);
    if (&b != max) non_max.add(b.supporters);
  }
  out.non_leader_support = non_leader.count;
  out.non_max_support = non_max.count;
  out.round_wide = rule.passes(non_max.count);

  for (const auto& b : blocks) {
    Mask m = non_leader;
    m.add(b.supporters);
    if (rule.passes(m.count)) out.unlocked.push_back(b.hash);
  }
  return out;
}

}  // namespace banyan
