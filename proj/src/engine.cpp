#include "banyan/engine.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace banyan {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Malformed-record reason codes (TraceRecord::aux).
constexpr std::uint64_t kBadHeader = 1;
constexpr std::uint64_t kBadPayload = 2;
constexpr std::uint64_t kBadEmbeddedVote = 3;
constexpr std::uint64_t kBadVote = 4;
constexpr std::uint64_t kBadAggregate = 5;
constexpr std::uint64_t kBadParent = 6;

}  // namespace

const char* to_string(Mutation m) {
  switch (m) {
    case Mutation::None: return "none";
    case Mutation::QuorumMinusOne: return "quorum_minus_one";
    case Mutation::UnlockAtThreshold: return "unlock_at_threshold";
    case Mutation::DoubleFastVote: return "double_fast_vote";
  }
  return "?";
}

std::shared_ptr<const Payload> make_payload(std::uint64_t seed, ReplicaId proposer, Round round, std::size_t size) {
  auto payload = std::make_shared<Payload>(size);
  SplitMix rng(mix64(seed, mix64(idx(proposer), round)));
  for (std::size_t i = 0; i < size; i += 8) {
    std::uint64_t x = rng.next();
    for (std::size_t j = 0; j < 8 && i + j < size; ++j) (*payload)[i + j] = static_cast<std::uint8_t>(x >> (8 * j));
  }
  return payload;
}

auto Replica::RoundVotes::of(VoteKind k) -> std::unordered_map<Digest, std::map<std::uint32_t, Vote>, DigestHash>& {
  switch (k) {
    case VoteKind::Notarization: return notarization;
    case VoteKind::Fast: return fast;
    case VoteKind::Finalization: return finalization;
  }
  throw std::logic_error("bad vote kind");
}

auto Replica::RoundVotes::of(VoteKind k) const
    -> const std::unordered_map<Digest, std::map<std::uint32_t, Vote>, DigestHash>& {
  return const_cast<RoundVotes*>(this)->of(k);
}

Replica::Replica(const ProtocolConfig& cfg, Signer signer, const KeyRegistry& keys, EngineOptions opts)
    : cfg_(cfg), signer_(std::move(signer)), keys_(&keys), opts_(opts), th_(default_thresholds(cfg)) {
  switch (opts_.mutation) {
    case Mutation::QuorumMinusOne: th_.notarization -= 1; break;
    case Mutation::UnlockAtThreshold: th_.unlock.strict = false; break;
    case Mutation::None:
    case Mutation::DoubleFastVote: break;
  }
  parent_ = tree_.genesis_hash();
}

EngineOutput Replica::handle(const EngineInput& input) {
  out_ = EngineOutput{};
  const SimTime t = std::visit(overloaded{[](const TimerTick& tick) { return tick.now; },
                                          [](const Deliver& d) { return d.now; }},
                               input);
  now_ = std::max(now_, t);
  if (!started_) {
    // Round 1 starts at the first input the replica sees.
    started_ = true;
    t0_ = now_;
    auto rec = record(RecordKind::EnterRound);
    rec.round = k_;
    rec.block_hash = parent_;
    out_.records.push_back(rec);
  }
  if (const auto* d = std::get_if<Deliver>(&input)) ingest(d->message);
  settle();
  return std::move(out_);
}

// ---------------------------------------------------------------------------
// Ingestion

void Replica::ingest(const Message& msg) {
  std::visit(overloaded{[&](const BlockMsg& b) { ingest_block(b); },
                        [&](const VoteMsg& v) { ingest_vote(v.vote, false); },
                        [&](const AggregateMsg& a) {
                          for (const auto& agg : a.aggregates) ingest_aggregate(agg);
                        }},
             msg);
}

bool Replica::block_well_formed(const Block& b, std::uint64_t* reason) const {
  if (b.header.hash() != b.hash || !verify_header(*keys_, b.header, cfg_)) {
    *reason = kBadHeader;
    return false;
  }
  if (!b.payload || sha256(*b.payload) != b.header.payload_digest) {
    *reason = kBadPayload;
    return false;
  }
  if (cfg_.mode == Mode::Banyan && b.rank() == 0) {
    const auto& v = b.embedded_fast_vote;
    if (!v || v->kind != VoteKind::Fast || v->voter != b.proposer() || v->round != b.round() ||
        v->block_hash != b.hash || !verify_vote(*keys_, *v)) {
      *reason = kBadEmbeddedVote;
      return false;
    }
  }
  return true;
}

void Replica::ingest_block(const BlockMsg& msg) {
  if (!msg.block) {
    malformed(kBadHeader, 0, Digest{});
    return;
  }
  if (msg.parent_notarization) ingest_aggregate(msg.parent_notarization);
  if (msg.parent_unlock && cfg_.mode == Mode::Banyan) ingest_aggregate(msg.parent_unlock);

  const Block& b = *msg.block;
  if (tree_.contains(b.hash) || pending_blocks_.contains(b.hash)) return;
  std::uint64_t reason = 0;
  if (!block_well_formed(b, &reason)) {
    malformed(reason, b.round(), b.hash);
    return;
  }
  pending_blocks_.emplace(b.hash, msg);
  if (cfg_.mode == Mode::Banyan && b.embedded_fast_vote) ingest_vote(*b.embedded_fast_vote, false);
}

void Replica::ingest_vote(const Vote& v, bool own) {
  if (idx(v.voter) >= cfg_.n || v.round == 0) {
    malformed(kBadVote, v.round, v.block_hash);
    return;
  }
  if (v.kind == VoteKind::Fast && cfg_.mode == Mode::Icc) return;
  if (v.round > k_) {
    future_votes_[v.round].push_back(v);
    return;
  }
  // Past rounds only feed finalization.
  if (v.round < k_ && v.kind == VoteKind::Notarization) return;

  auto& slot = votes_[v.round].of(v.kind)[v.block_hash];
  if (slot.contains(idx(v.voter))) return;
  if (!own && !verify_vote(*keys_, v)) {
    malformed(kBadVote, v.round, v.block_hash);
    return;
  }
  slot.emplace(idx(v.voter), v);
  if (v.kind == VoteKind::Fast && v.round == k_) unlock_dirty_ = true;
  if (v.kind != VoteKind::Notarization) finalize_candidates_.emplace(v.round, v.block_hash);
}

void Replica::ingest_aggregate(const std::shared_ptr<const Aggregate>& agg) {
  if (!agg) return;
  const Aggregate& a = *agg;
  switch (a.kind) {
    case AggregateKind::Notarization: {
      TreeNode* node = tree_.find(a.subject);
      if ((node != nullptr && node->notarized) || (node == nullptr && pending_notarization_.contains(a.subject))) return;
      if (!verify_aggregate(a, cfg_, *keys_, th_)) {
        malformed(kBadAggregate, a.round, a.subject);
        return;
      }
      if (node != nullptr) {
        mark_notarized(*node, agg);
      } else {
        pending_notarization_.emplace(a.subject, agg);
      }
      return;
    }
    case AggregateKind::UnlockProof: {
      if (cfg_.mode == Mode::Icc || tree_.round_unlocked(a.round)) return;
      if (!a.subject.is_zero()) {
        const TreeNode* node = tree_.find(a.subject);
        if ((node != nullptr && node->unlocked) || (node == nullptr && pending_unlock_.contains(a.subject))) return;
      }
      const auto verdict = check_unlock_proof(a, cfg_, *keys_, th_);
      if (!verdict.valid || (!verdict.round_wide && verdict.unlocked.empty())) {
        malformed(kBadAggregate, a.round, a.subject);
        return;
      }
      if (verdict.round_wide) {
        tree_.set_round_unlocked(a.round, agg);
        for (const auto& h : tree_.round_blocks(a.round)) mark_unlocked(*tree_.find(h), agg);
      }
      for (const auto& h : verdict.unlocked) {
        if (TreeNode* node = tree_.find(h)) {
          mark_unlocked(*node, agg);
        } else {
          pending_unlock_.try_emplace(h, agg);
        }
      }
      return;
    }
    case AggregateKind::Finalization:
    case AggregateKind::FastFinalization: {
      if (a.round <= kmax_) return;
      TreeNode* node = tree_.find(a.subject);
      if ((node != nullptr && node->finalized) || finalization_aggs_.contains(a.subject)) return;
      if (!verify_aggregate(a, cfg_, *keys_, th_)) {
        malformed(kBadAggregate, a.round, a.subject);
        return;
      }
      finalization_aggs_.emplace(a.subject, agg);
      finalize_candidates_.emplace(a.round, a.subject);
      if (cfg_.mode == Mode::Banyan) {
        // Finalized blocks are unlocked by definition.
        if (node != nullptr) {
          mark_unlocked(*node, agg);
        } else {
          pending_unlock_.try_emplace(a.subject, agg);
        }
      }
      return;
    }
  }
}

// ---------------------------------------------------------------------------
// Tree status

TreeNode& Replica::insert_block(std::shared_ptr<const Block> block) {
  const Digest h = block->hash;
  const Round r = block->round();
  TreeNode& node = tree_.insert(std::move(block));
  if (auto it = pending_notarization_.find(h); it != pending_notarization_.end()) {
    mark_notarized(node, it->second);
    pending_notarization_.erase(it);
  }
  if (auto it = pending_unlock_.find(h); it != pending_unlock_.end()) {
    mark_unlocked(node, it->second);
    pending_unlock_.erase(it);
  }
  if (tree_.round_unlocked(r)) mark_unlocked(node, tree_.round_unlock_evidence(r));
  finalize_candidates_.emplace(r, h);
  if (r == k_) unlock_dirty_ = true;
  return node;
}

void Replica::mark_notarized(TreeNode& node, std::shared_ptr<const Aggregate> agg) {
  if (node.notarized) return;
  node.notarized = true;
  node.notarization = std::move(agg);
  auto rec = record(RecordKind::Notarized);
  rec.round = node.block->round();
  rec.block_hash = node.block->hash;
  rec.rank = node.block->rank();
  out_.records.push_back(rec);
}

void Replica::mark_unlocked(TreeNode& node, std::shared_ptr<const Aggregate> evidence) {
  if (cfg_.mode == Mode::Icc || node.unlocked) return;
  node.unlocked = true;
  node.unlock_evidence = std::move(evidence);
  auto rec = record(RecordKind::Unlocked);
  rec.round = node.block->round();
  rec.block_hash = node.block->hash;
  rec.rank = node.block->rank();
  out_.records.push_back(rec);
}

bool Replica::unlocked(const Digest& block) const {
  const TreeNode* node = tree_.find(block);
  if (node == nullptr) return false;
  return cfg_.mode == Mode::Icc || node->unlocked || node->finalized;
}

bool Replica::notarized(const Digest& block) const {
  const TreeNode* node = tree_.find(block);
  return node != nullptr && node->notarized;
}

bool Replica::finalized(const Digest& block) const {
  const TreeNode* node = tree_.find(block);
  return node != nullptr && node->finalized;
}

bool Replica::evidence_ok(const Digest& parent, const BlockMsg& msg) const {
  const TreeNode* node = tree_.find(parent);
  if (node == nullptr || node->block->round() + 1 != msg.block->round()) return false;
  bool notarized_ok = node->notarized;
  if (!notarized_ok && msg.parent_notarization) {
    const auto& a = *msg.parent_notarization;
    notarized_ok = a.kind == AggregateKind::Notarization && a.subject == parent && verify_aggregate(a, cfg_, *keys_, th_);
  }
  if (!notarized_ok) return false;
  if (cfg_.mode == Mode::Icc || node->unlocked || node->finalized) return true;
  if (tree_.round_unlocked(node->block->round())) return true;
  if (!msg.parent_unlock) return false;
  const auto& a = *msg.parent_unlock;
  if (a.kind == AggregateKind::UnlockProof) {
    const auto verdict = check_unlock_proof(a, cfg_, *keys_, th_);
    return verdict.valid && a.round == node->block->round() &&
           (verdict.round_wide ||
            std::find(verdict.unlocked.begin(), verdict.unlocked.end(), parent) != verdict.unlocked.end());
  }
  return (a.kind == AggregateKind::Finalization || a.kind == AggregateKind::FastFinalization) && a.subject == parent &&
         verify_aggregate(a, cfg_, *keys_, th_);
}

bool Replica::valid(const BlockMsg& msg) const {
  if (!msg.block) return false;
  std::uint64_t reason = 0;
  return block_well_formed(*msg.block, &reason) && evidence_ok(msg.block->parent(), msg);
}

std::size_t Replica::vote_count(VoteKind kind, Round round, const Digest& block) const {
  auto rit = votes_.find(round);
  if (rit == votes_.end()) return 0;
  const auto& by_block = rit->second.of(kind);
  auto it = by_block.find(block);
  return it == by_block.end() ? 0 : it->second.size();
}

// ---------------------------------------------------------------------------
// Run to completion

void Replica::settle() {
  bool progress = true;
  while (progress) {
    progress = false;
    progress |= promote_pending();
    if (unlock_dirty_) progress |= update_unlock();
    progress |= maybe_propose();
    progress |= maybe_notarize_vote();
    progress |= on_votes_notarization();
    progress |= maybe_finalize();
    progress |= maybe_advance_round();
  }
}

bool Replica::promote_pending() {
  bool progress = false;
  bool again = true;
  while (again) {
    again = false;
    for (auto it = pending_blocks_.begin(); it != pending_blocks_.end();) {
      const auto& block = it->second.block;
      const TreeNode* parent = tree_.find(block->parent());
      if (parent == nullptr) {
        ++it;
        continue;
      }
      if (parent->block->round() + 1 != block->round()) {
        malformed(kBadParent, block->round(), block->hash);
        it = pending_blocks_.erase(it);
        continue;
      }
      const bool parent_unlocked = cfg_.mode == Mode::Icc || parent->unlocked || parent->finalized;
      if (!parent->notarized || !parent_unlocked) {
        ++it;
        continue;
      }
      auto b = block;
      it = pending_blocks_.erase(it);
      insert_block(std::move(b));
      progress = again = true;
    }
  }
  return progress;
}

bool Replica::update_unlock() {
  unlock_dirty_ = false;
  if (cfg_.mode == Mode::Icc) return false;
  const auto& hashes = tree_.round_blocks(k_);
  if (hashes.empty()) return false;

  std::vector<BlockSupport> support;
  support.reserve(hashes.size());
  const auto vit = votes_.find(k_);
  for (const auto& h : hashes) {
    BlockSupport s{h, tree_.find(h)->block->rank(), {}};
    if (vit != votes_.end()) {
      if (auto f = vit->second.fast.find(h); f != vit->second.fast.end()) {
        for (const auto& [voter, _] : f->second) s.supporters.push_back(replica(voter));
      }
    }
    support.push_back(std::move(s));
  }
  const auto eval = evaluate_unlock(support, cfg_.n, th_.unlock);

  bool progress = false;
  if (eval.round_wide && !tree_.round_unlocked(k_)) {
    // Snapshot now: the round-wide condition is not monotone in later votes.
    auto evidence = build_aggregate(AggregateKind::UnlockProof, k_, Digest{}, hashes);
    tree_.set_round_unlocked(k_, evidence);
    for (const auto& h : hashes) mark_unlocked(*tree_.find(h), evidence);
    progress = true;
  }
  if (!eval.unlocked.empty()) {
    std::vector<Digest> non_leader;
    for (const auto& s : support) {
      if (s.rank != 0) non_leader.push_back(s.hash);
    }
    for (const auto& h : eval.unlocked) {
      TreeNode& node = *tree_.find(h);
      if (node.unlocked) continue;
      std::vector<Digest> attested = non_leader;
      if (node.block->rank() == 0) attested.push_back(h);
      mark_unlocked(node, build_aggregate(AggregateKind::UnlockProof, k_, h, attested));
      progress = true;
    }
  }
  return progress;
}

bool Replica::maybe_propose() {
  if (proposed_ || (opts_.last_round != 0 && k_ > opts_.last_round)) return false;
  const Rank r = own_rank();
  if (now_ < t0_ + proposal_delay(r, cfg_)) return false;

  const TreeNode* parent = tree_.find(parent_);
  auto block = std::make_shared<Block>();
  block->payload = make_payload(opts_.payload_seed, id(), k_, opts_.payload_bytes);
  block->header.round = k_;
  block->header.proposer = id();
  block->header.rank = r;
  block->header.parent = parent_;
  block->header.payload_digest = sha256(*block->payload);
  sign_header(signer_, block->header);
  block->hash = block->header.hash();
  if (cfg_.mode == Mode::Banyan && r == 0) block->embedded_fast_vote = make_vote(signer_, VoteKind::Fast, k_, block->hash);
  proposed_ = true;

  std::shared_ptr<const Block> cblock = block;
  BlockMsg msg{cblock, parent->notarization, cfg_.mode == Mode::Banyan ? parent->unlock_evidence : nullptr};

  auto rec = record(RecordKind::Propose);
  rec.round = k_;
  rec.block_hash = cblock->hash;
  rec.parent = parent_;
  rec.rank = r;
  rec.bytes = cblock->payload_size();
  out_.records.push_back(rec);

  insert_block(cblock);
  if (cblock->embedded_fast_vote) {
    fast_vote_sent_ = true;
    ingest_vote(*cblock->embedded_fast_vote, true);
    auto vr = record(RecordKind::Vote);
    vr.round = k_;
    vr.block_hash = cblock->hash;
    vr.vote_kind = static_cast<std::uint8_t>(VoteKind::Fast);
    vr.parent = parent_;
    out_.records.push_back(vr);
  }
  broadcast(std::move(msg));
  return true;
}

bool Replica::maybe_notarize_vote() {
  const auto& hashes = tree_.round_blocks(k_);
  if (hashes.empty()) return false;
  Rank min_rank = std::numeric_limits<Rank>::max();
  for (const auto& h : hashes) min_rank = std::min(min_rank, tree_.find(h)->block->rank());

  std::vector<const TreeNode*> ready;
  for (const auto& h : hashes) {
    const TreeNode* node = tree_.find(h);
    if (node->block->rank() != min_rank) continue;
    if (std::find(voted_.begin(), voted_.end(), h) != voted_.end()) continue;
    if (now_ < t0_ + notarization_delay(min_rank, cfg_)) continue;
    ready.push_back(node);
  }
  std::sort(ready.begin(), ready.end(),
            [](const TreeNode* a, const TreeNode* b) { return a->block->hash < b->block->hash; });

  for (const TreeNode* node : ready) {
    const Digest h = node->block->hash;
    if (node->block->proposer() != id()) broadcast(block_msg_for(*node));
    voted_.push_back(h);
    const bool fast = cfg_.mode == Mode::Banyan && (!fast_vote_sent_ || opts_.mutation == Mutation::DoubleFastVote);
    if (fast) {
      broadcast_vote(VoteKind::Fast, h, k_);
      fast_vote_sent_ = true;
    }
    broadcast_vote(VoteKind::Notarization, h, k_);
  }
  return !ready.empty();
}

bool Replica::on_votes_notarization() {
  const auto vit = votes_.find(k_);
  if (vit == votes_.end()) return false;
  bool progress = false;
  for (const auto& h : tree_.round_blocks(k_)) {
    TreeNode& node = *tree_.find(h);
    if (node.notarized) continue;
    auto it = vit->second.notarization.find(h);
    if (it == vit->second.notarization.end() || it->second.size() < th_.notarization) continue;
    const Digest attested[] = {h};
    mark_notarized(node, build_aggregate(AggregateKind::Notarization, k_, h, attested));
    progress = true;
  }
  return progress;
}

bool Replica::maybe_finalize() {
  bool progress = false;
  while (!finalize_candidates_.empty()) {
    const auto [round, hash] = *finalize_candidates_.begin();
    finalize_candidates_.erase(finalize_candidates_.begin());
    TreeNode* node = tree_.find(hash);
    if (node == nullptr || node->finalized) continue;

    std::shared_ptr<const Aggregate> agg;
    PathTag path = PathTag::None;
    const Digest attested[] = {hash};
    if (auto fit = finalization_aggs_.find(hash); fit != finalization_aggs_.end() && round > kmax_) {
      agg = fit->second;
      path = agg->kind == AggregateKind::FastFinalization ? PathTag::Fast : PathTag::Slow;
    } else if (cfg_.mode == Mode::Banyan && node->block->rank() == 0 &&
               vote_count(VoteKind::Fast, round, hash) >= th_.fast) {
      agg = build_aggregate(AggregateKind::FastFinalization, round, hash, attested);
      path = PathTag::Fast;
    } else if (vote_count(VoteKind::Finalization, round, hash) >= th_.notarization) {
      agg = build_aggregate(AggregateKind::Finalization, round, hash, attested);
      path = PathTag::Slow;
    } else {
      continue;
    }
    broadcast(AggregateMsg{{agg}});
    finalize(*node, agg, path);
    progress = true;
  }
  return progress;
}

void Replica::finalize(TreeNode& node, std::shared_ptr<const Aggregate> agg, PathTag path) {
  const Round r = node.block->round();
  auto note = [&](TreeNode& m, PathTag tag) {
    m.finalized = true;
    m.path = tag;
    auto rec = record(RecordKind::Finalized);
    rec.round = m.block->round();
    rec.block_hash = m.block->hash;
    rec.parent = m.block->parent();
    rec.rank = m.block->rank();
    rec.path = tag;
    rec.bytes = m.block->payload_size();
    out_.records.push_back(rec);
    mark_unlocked(m, agg);
  };
  node.finalization = agg;

  if (r <= kmax_) {
    // Nothing new to output (k - kMax <= 0); only possible if safety broke.
    note(node, path);
    return;
  }
  FinalizedOutput fo;
  fo.first_round = kmax_ + 1;
  fo.last_round = r;
  for (const TreeNode* c : tree_.chain_above(node.block->hash, kmax_)) {
    TreeNode& m = *tree_.find(c->block->hash);
    if (!m.finalized) note(m, &m == &node ? path : PathTag::Implicit);
    fo.blocks.push_back(m.block->hash);
    fo.payloads.push_back(m.block->payload);
  }
  auto rec = record(RecordKind::Output);
  rec.round = fo.first_round;
  rec.aux = fo.last_round;
  rec.block_hash = node.block->hash;
  out_.records.push_back(rec);
  out_.finalized.push_back(std::move(fo));
  kmax_ = r;
}

bool Replica::maybe_advance_round() {
  const bool banyan = cfg_.mode == Mode::Banyan;
  if (banyan && !fast_vote_sent_) return false;
  const TreeNode* best = nullptr;
  for (const auto& h : tree_.round_blocks(k_)) {
    const TreeNode* node = tree_.find(h);
    if (!node->notarized || (banyan && !node->unlocked)) continue;
    if (best == nullptr || std::pair(node->block->rank(), h) < std::pair(best->block->rank(), best->block->hash)) {
      best = node;
    }
  }
  if (best == nullptr) return false;

  const Digest b = best->block->hash;
  AggregateMsg am;
  am.aggregates.push_back(best->notarization);
  if (banyan) am.aggregates.push_back(best->unlock_evidence);
  broadcast(std::move(am));

  const bool only_b = std::all_of(voted_.begin(), voted_.end(), [&](const Digest& v) { return v == b; });
  if (only_b) broadcast_vote(VoteKind::Finalization, b, k_);

  parent_ = b;
  enter_round(k_ + 1);
  return true;
}

void Replica::enter_round(Round k) {
  k_ = k;
  t0_ = now_;
  proposed_ = false;
  fast_vote_sent_ = false;
  voted_.clear();
  unlock_dirty_ = true;

  auto rec = record(RecordKind::EnterRound);
  rec.round = k;
  rec.block_hash = parent_;
  out_.records.push_back(rec);

  if (auto it = future_votes_.find(k); it != future_votes_.end()) {
    auto buffered = std::move(it->second);
    future_votes_.erase(it);
    for (const auto& v : buffered) ingest_vote(v, false);
  }
}

std::optional<SimTime> Replica::next_wakeup() const {
  std::optional<SimTime> best;
  auto consider = [&](SimTime t) {
    if (t > now_ && (!best || t < *best)) best = t;
  };
  if (!proposed_ && (opts_.last_round == 0 || k_ <= opts_.last_round)) consider(t0_ + proposal_delay(own_rank(), cfg_));
  const auto& hashes = tree_.round_blocks(k_);
  if (!hashes.empty()) {
    Rank min_rank = std::numeric_limits<Rank>::max();
    for (const auto& h : hashes) min_rank = std::min(min_rank, tree_.find(h)->block->rank());
    for (const auto& h : hashes) {
      if (tree_.find(h)->block->rank() != min_rank) continue;
      if (std::find(voted_.begin(), voted_.end(), h) != voted_.end()) continue;
      consider(t0_ + notarization_delay(min_rank, cfg_));
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Emission helpers

void Replica::broadcast(Message msg) {
  out_.sends.push_back(Outgoing{std::make_shared<const Message>(std::move(msg)), std::nullopt});
}

void Replica::broadcast_vote(VoteKind kind, const Digest& block, Round round) {
  Vote v = make_vote(signer_, kind, round, block);
  ingest_vote(v, true);
  auto rec = record(RecordKind::Vote);
  rec.round = round;
  rec.block_hash = block;
  rec.vote_kind = static_cast<std::uint8_t>(kind);
  if (const TreeNode* node = tree_.find(block)) rec.parent = node->block->parent();
  out_.records.push_back(rec);
  broadcast(VoteMsg{v});
}

BlockMsg Replica::block_msg_for(const TreeNode& node) const {
  const TreeNode* parent = tree_.find(node.block->parent());
  BlockMsg msg{node.block, nullptr, nullptr};
  if (parent != nullptr) {
    msg.parent_notarization = parent->notarization;
    if (cfg_.mode == Mode::Banyan) msg.parent_unlock = parent->unlock_evidence;
  }
  return msg;
}

std::shared_ptr<const Aggregate> Replica::build_aggregate(AggregateKind kind, Round round, const Digest& subject,
                                                          std::span<const Digest> attested) const {
  VoteKind vk = VoteKind::Fast;
  if (kind == AggregateKind::Notarization) vk = VoteKind::Notarization;
  if (kind == AggregateKind::Finalization) vk = VoteKind::Finalization;

  std::vector<Vote> votes;
  std::vector<BlockHeader> headers;
  const auto rit = votes_.find(round);
  for (const auto& h : attested) {
    if (rit != votes_.end()) {
      const auto& by_block = rit->second.of(vk);
      if (auto it = by_block.find(h); it != by_block.end()) {
        for (const auto& [_, v] : it->second) votes.push_back(v);
      }
    }
    if (kind == AggregateKind::UnlockProof || kind == AggregateKind::FastFinalization) {
      headers.push_back(tree_.find(h)->block->header);
    }
  }
  return std::make_shared<const Aggregate>(aggregate(kind, subject, std::move(votes), std::move(headers)));
}

TraceRecord Replica::record(RecordKind kind) const {
  TraceRecord r;
  r.time = now_;
  r.kind = kind;
  r.from = idx(id());
  return r;
}

void Replica::malformed(std::uint64_t reason, Round round, const Digest& subject) {
  auto rec = record(RecordKind::Malformed);
  rec.aux = reason;
  rec.round = round;
  rec.block_hash = subject;
  out_.records.push_back(rec);
}

}  // namespace banyan
