#include "banyan/crypto.hpp"

#include <algorithm>
#include <set>
#include <tuple>
#include <utility>

namespace banyan {

namespace {

Digest tag_for(const Digest& secret, std::span<const std::uint8_t> message) {
  Hasher h;
  h.update(secret.bytes);
  h.update(message);
  return h.finish();
}

VoteKind vote_kind_for(AggregateKind k) {
  switch (k) {
    case AggregateKind::Notarization: return VoteKind::Notarization;
    case AggregateKind::Finalization: return VoteKind::Finalization;
    case AggregateKind::FastFinalization:
    case AggregateKind::UnlockProof: return VoteKind::Fast;
  }
  return VoteKind::Notarization;
}

}  // namespace

Signature Signer::sign(std::span<const std::uint8_t> message) const { return {id_, tag_for(secret_, message)}; }

KeyRegistry::KeyRegistry(std::uint32_t n, std::uint64_t seed) {
  secrets_.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    ByteWriter w;
    w.str("banyan/key").u64(seed).u32(i);
    secrets_.push_back(sha256(w.bytes()));
  }
}

Signer KeyRegistry::signer_for(ReplicaId r) {
  if (idx(r) >= secrets_.size()) throw std::out_of_range("unknown replica " + std::to_string(idx(r)));
  return Signer(r, secrets_[idx(r)]);
}

bool KeyRegistry::verify(ReplicaId r, std::span<const std::uint8_t> message, const Signature& sig) const {
  if (idx(r) >= secrets_.size() || sig.signer != r) return false;
  return tag_for(secrets_[idx(r)], message) == sig.tag;
}

Vote make_vote(const Signer& signer, VoteKind kind, Round round, const Digest& block_hash) {
  Vote v;
  v.kind = kind;
  v.voter = signer.id();
  v.round = round;
  v.block_hash = block_hash;
  v.signature = signer.sign(v.signing_bytes());
  return v;
}

bool verify_vote(const KeyRegistry& keys, const Vote& vote) {
  return keys.verify(vote.voter, vote.signing_bytes(), vote.signature);
}

void sign_header(const Signer& signer, BlockHeader& header) {
  const Digest h = header.hash();
  header.signature = signer.sign(h.bytes);
}

bool verify_header(const KeyRegistry& keys, const BlockHeader& header, const ProtocolConfig& cfg) {
  if (idx(header.proposer) >= cfg.n || header.round == 0) return false;
  if (header.rank != rank_of(header.proposer, header.round, cfg)) return false;
  const Digest h = header.hash();
  return keys.verify(header.proposer, h.bytes, header.signature);
}

Thresholds default_thresholds(const ProtocolConfig& cfg) {
  return Thresholds{notarization_quorum(cfg), fast_quorum(cfg), UnlockRule{cfg.f + cfg.p, true}};
}

Aggregate aggregate(AggregateKind kind, const Digest& subject, std::vector<Vote> votes,
                    std::vector<BlockHeader> headers) {
  if (votes.empty()) throw AggregationError("aggregate: no votes");
  const VoteKind want = vote_kind_for(kind);
  const Round round = votes.front().round;
  std::set<std::pair<std::uint32_t, Digest>> seen;
  for (const auto& v : votes) {
    if (v.kind != want) throw AggregationError("aggregate: vote kind does not match aggregate kind");
    if (v.round != round) throw AggregationError("aggregate: votes from mixed rounds");
    if (kind != AggregateKind::UnlockProof && v.block_hash != subject) {
      throw AggregationError("aggregate: votes for different blocks");
    }
    const Digest key = kind == AggregateKind::UnlockProof ? v.block_hash : Digest{};
    if (!seen.emplace(idx(v.voter), key).second) throw AggregationError("aggregate: duplicate voter");
  }
  // Canonical order so equal vote sets produce equal aggregates.
  std::sort(votes.begin(), votes.end(), [](const Vote& a, const Vote& b) {
    return std::tie(a.block_hash, a.voter) < std::tie(b.block_hash, b.voter);
  });
  std::sort(headers.begin(), headers.end(),
            [](const BlockHeader& a, const BlockHeader& b) { return a.hash() < b.hash(); });
  Aggregate agg;
  agg.kind = kind;
  agg.round = round;
  agg.subject = subject;
  agg.votes = std::move(votes);
  agg.headers = std::move(headers);
  return agg;
}

UnlockProofVerdict check_unlock_proof(const Aggregate& proof, const ProtocolConfig& cfg, const KeyRegistry& keys,
                                      const Thresholds& th) {
  UnlockProofVerdict out;
  if (proof.kind != AggregateKind::UnlockProof || proof.votes.empty()) return out;

  std::vector<BlockSupport> blocks;
  blocks.reserve(proof.headers.size());
  for (const auto& h : proof.headers) {
    if (h.round != proof.round || !verify_header(keys, h, cfg)) return out;
    const Digest hash = h.hash();
    for (const auto& b : blocks) {
      if (b.hash == hash) return out;
    }
    blocks.push_back(BlockSupport{hash, h.rank, {}});
  }

  std::set<std::pair<std::uint32_t, Digest>> seen;
  for (const auto& v : proof.votes) {
    if (v.kind != VoteKind::Fast || v.round != proof.round || idx(v.voter) >= cfg.n) return out;
    if (!seen.emplace(idx(v.voter), v.block_hash).second) return out;
    auto it = std::find_if(blocks.begin(), blocks.end(), [&](const BlockSupport& b) { return b.hash == v.block_hash; });
    if (it == blocks.end() || !verify_vote(keys, v)) return out;
    it->supporters.push_back(v.voter);
  }

  const auto eval = evaluate_unlock(blocks, cfg.n, th.unlock);
  out.valid = true;
  out.round_wide = eval.round_wide;
  out.unlocked = eval.unlocked;
  return out;
}

bool verify_aggregate(const Aggregate& agg, const ProtocolConfig& cfg, const KeyRegistry& keys,
                      const Thresholds& th) {
  if (agg.kind == AggregateKind::UnlockProof) {
    auto verdict = check_unlock_proof(agg, cfg, keys, th);
    if (!verdict.valid) return false;
    return verdict.round_wide ||
           std::find(verdict.unlocked.begin(), verdict.unlocked.end(), agg.subject) != verdict.unlocked.end();
  }

  const VoteKind want = vote_kind_for(agg.kind);
  std::vector<bool> voters(cfg.n, false);
  std::uint32_t count = 0;
  for (const auto& v : agg.votes) {
    if (v.kind != want || v.round != agg.round || v.block_hash != agg.subject) return false;
    if (idx(v.voter) >= cfg.n || voters[idx(v.voter)]) return false;
    if (!verify_vote(keys, v)) return false;
    voters[idx(v.voter)] = true;
    ++count;
  }

  switch (agg.kind) {
    case AggregateKind::Notarization:
    case AggregateKind::Finalization: return count >= th.notarization;
    case AggregateKind::FastFinalization: {
      if (count < th.fast) return false;
      for (const auto& h : agg.headers) {
        if (h.hash() == agg.subject) return h.rank == 0 && h.round == agg.round && verify_header(keys, h, cfg);
      }
      return false;
    }
    case AggregateKind::UnlockProof: break;
  }
  return false;
}

bool verify_aggregate(const Aggregate& agg, const ProtocolConfig& cfg, const KeyRegistry& keys) {
  return verify_aggregate(agg, cfg, keys, default_thresholds(cfg));
}

}  // namespace banyan
