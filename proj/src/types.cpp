#include "banyan/types.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace banyan {

ConfigCheck validate_config(const ProtocolConfig& cfg) {
  ConfigCheck out;
  const std::uint64_t n = cfg.n;
  const std::uint64_t f = cfg.f;
  const std::uint64_t p = cfg.p;
  if (n == 0) {
    out.ok = false;
    out.reason = "n must be positive";
    return out;
  }
  if (p > f) {
    out.ok = false;
    out.reason = "p <= f violated (p=" + std::to_string(p) + ", f=" + std::to_string(f) + ")";
    return out;
  }
  if (n < 3 * f + 1) {
    out.ok = false;
    out.reason = "n >= 3f+1 violated (n=" + std::to_string(n) + ", needs " + std::to_string(3 * f + 1) + ")";
    return out;
  }
  if (p > 0 && n + 1 < 3 * f + 2 * p) {
    out.ok = false;
    out.reason = "n >= 3f+2p-1 violated (n=" + std::to_string(n) + ", needs " +
                 std::to_string(3 * f + 2 * p - 1) + ")";
    return out;
  }
  if (cfg.delta_bound <= 0) {
    out.ok = false;
    out.reason = "delta_bound must be positive";
    return out;
  }
  if (p == 0) {
    out.warnings.emplace_back("p = 0 gives no benefit over p = 1 at the same replica count");
  }
  return out;
}

std::uint32_t notarization_quorum(const ProtocolConfig& cfg) { return (cfg.n + cfg.f + 2) / 2; }

std::uint32_t fast_quorum(const ProtocolConfig& cfg) { return cfg.n - cfg.p; }

namespace {

std::vector<ReplicaId> seeded_order(Round k, const ProtocolConfig& cfg) {
  std::vector<ReplicaId> order(cfg.n);
  for (std::uint32_t i = 0; i < cfg.n; ++i) order[i] = replica(i);
  SplitMix rng(mix64(cfg.rotation.seed, k));
  for (std::uint32_t i = cfg.n; i > 1; --i) {
    auto j = static_cast<std::uint32_t>(rng.below(i));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

}  // namespace

Rank rank_of(ReplicaId r, Round k, const ProtocolConfig& cfg) {
  if (idx(r) >= cfg.n) throw std::out_of_range("replica id out of range");
  if (cfg.rotation.kind == RotationKind::RoundRobin) {
    return static_cast<Rank>((idx(r) + cfg.n - (k % cfg.n)) % cfg.n);
  }
  auto order = seeded_order(k, cfg);
  return static_cast<Rank>(std::find(order.begin(), order.end(), r) - order.begin());
}

ReplicaId replica_at_rank(Rank rank, Round k, const ProtocolConfig& cfg) {
  if (rank >= cfg.n) throw std::out_of_range("rank out of range");
  if (cfg.rotation.kind == RotationKind::RoundRobin) {
    return replica(static_cast<std::uint32_t>((rank + k) % cfg.n));
  }
  return seeded_order(k, cfg)[rank];
}

SimTime proposal_delay(Rank rank, const ProtocolConfig& cfg) { return 2 * cfg.delta_bound * rank; }

SimTime notarization_delay(Rank rank, const ProtocolConfig& cfg) { return 2 * cfg.delta_bound * rank; }

Digest BlockHeader::hash() const {
  ByteWriter w;
  w.u64(round).u32(idx(proposer)).u32(rank).digest(parent).digest(payload_digest);
  return sha256(w.bytes());
}

std::vector<std::uint8_t> Vote::signing_bytes() const {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(kind)).u32(idx(voter)).u64(round).digest(block_hash);
  return w.bytes();
}

std::shared_ptr<const Block> genesis_block() {
  static const std::shared_ptr<const Block> genesis = [] {
    auto b = std::make_shared<Block>();
    b->payload = std::make_shared<Payload>();
    b->hash = b->header.hash();
    return std::shared_ptr<const Block>(std::move(b));
  }();
  return genesis;
}

const char* to_string(VoteKind k) {
  switch (k) {
    case VoteKind::Notarization: return "notarization";
    case VoteKind::Fast: return "fast";
    case VoteKind::Finalization: return "finalization";
  }
  return "?";
}

const char* to_string(AggregateKind k) {
  switch (k) {
    case AggregateKind::Notarization: return "notarization";
    case AggregateKind::Finalization: return "finalization";
    case AggregateKind::FastFinalization: return "fast_finalization";
    case AggregateKind::UnlockProof: return "unlock_proof";
  }
  return "?";
}

const char* to_string(PathTag t) {
  switch (t) {
    case PathTag::None: return "";
    case PathTag::Fast: return "fast";
    case PathTag::Slow: return "slow";
    case PathTag::Implicit: return "implicit";
  }
  return "?";
}

const char* to_string(Mode m) { return m == Mode::Banyan ? "banyan" : "icc"; }

}  // namespace banyan
