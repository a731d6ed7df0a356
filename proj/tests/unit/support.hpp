#pragma once

#include <memory>
#include <string>

#include "banyan/crypto.hpp"
#include "banyan/engine.hpp"

namespace banyan::test {

inline ProtocolConfig cfg4(Mode mode = Mode::Banyan) {
  ProtocolConfig c;
  c.n = 4;
  c.f = 1;
  c.p = 1;
  c.delta_bound = from_ms(100);
  c.mode = mode;
  return c;
}

/// A correctly signed block with a seeded payload.
inline std::shared_ptr<Block> make_block(const Signer& s, Round round, const Digest& parent, const ProtocolConfig& cfg,
                                         std::uint64_t payload_seed = 7, bool embed_fast_vote = true) {
  auto b = std::make_shared<Block>();
  b->payload = make_payload(payload_seed, s.id(), round, 32);
  b->header.round = round;
  b->header.proposer = s.id();
  b->header.rank = rank_of(s.id(), round, cfg);
  b->header.parent = parent;
  b->header.payload_digest = sha256(*b->payload);
  sign_header(s, b->header);
  b->hash = b->header.hash();
  if (embed_fast_vote && cfg.mode == Mode::Banyan && b->header.rank == 0) {
    b->embedded_fast_vote = make_vote(s, VoteKind::Fast, round, b->hash);
  }
  return b;
}

inline Digest digest_of(const std::string& s) {
  return sha256(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

}  // namespace banyan::test
