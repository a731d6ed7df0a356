#include "banyan/crypto.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace banyan;

TEST_CASE("votes verify only under the right key") {
  KeyRegistry keys(4, 1);
  const Signer s0 = keys.signer_for(replica(0));
  Vote v = make_vote(s0, VoteKind::Fast, 3, test::digest_of("b"));
  CHECK(verify_vote(keys, v));

  Vote forged = v;
  forged.voter = replica(1);
  forged.signature.signer = replica(1);
  CHECK_FALSE(verify_vote(keys, forged));

  Vote other_round = v;
  other_round.round = 4;
  CHECK_FALSE(verify_vote(keys, other_round));

  Vote other_kind = v;
  other_kind.kind = VoteKind::Notarization;
  CHECK_FALSE(verify_vote(keys, other_kind));

  KeyRegistry other(4, 2);
  CHECK_FALSE(verify_vote(other, v));
  CHECK_THROWS_AS(keys.signer_for(replica(4)), std::out_of_range);
}

TEST_CASE("headers must carry the rotation rank") {
  KeyRegistry keys(4, 1);
  const auto cfg = test::cfg4();
  const auto b = test::make_block(keys.signer_for(replica(1)), 1, genesis_block()->hash, cfg);
  CHECK(b->header.rank == 0);
  CHECK(verify_header(keys, b->header, cfg));
  BlockHeader wrong = b->header;
  wrong.rank = 1;
  sign_header(keys.signer_for(replica(1)), wrong);
  CHECK_FALSE(verify_header(keys, wrong, cfg));
  BlockHeader round0 = b->header;
  round0.round = 0;
  CHECK_FALSE(verify_header(keys, round0, cfg));
}

TEST_CASE("aggregation rejects duplicates and mixed content") {
  KeyRegistry keys(4, 1);
  const Digest b = test::digest_of("b");
  const Vote v0 = make_vote(keys.signer_for(replica(0)), VoteKind::Notarization, 2, b);
  const Vote v1 = make_vote(keys.signer_for(replica(1)), VoteKind::Notarization, 2, b);
  CHECK_THROWS_AS(aggregate(AggregateKind::Notarization, b, {v0, v0}), AggregationError);
  CHECK_THROWS_AS(aggregate(AggregateKind::Notarization, b, {}), AggregationError);
  const Vote other_block = make_vote(keys.signer_for(replica(2)), VoteKind::Notarization, 2, test::digest_of("c"));
  CHECK_THROWS_AS(aggregate(AggregateKind::Notarization, b, {v0, other_block}), AggregationError);
  const Vote other_round = make_vote(keys.signer_for(replica(2)), VoteKind::Notarization, 3, b);
  CHECK_THROWS_AS(aggregate(AggregateKind::Notarization, b, {v0, other_round}), AggregationError);
  const Vote fast = make_vote(keys.signer_for(replica(2)), VoteKind::Fast, 2, b);
  CHECK_THROWS_AS(aggregate(AggregateKind::Notarization, b, {v0, fast}), AggregationError);
  CHECK(aggregate(AggregateKind::Notarization, b, {v1, v0}).votes.size() == 2);
}

TEST_CASE("notarization needs a quorum of valid signatures") {
  KeyRegistry keys(4, 1);
  const auto cfg = test::cfg4();
  const Digest b = test::digest_of("b");
  std::vector<Vote> votes;
  for (std::uint32_t i = 0; i < 3; ++i) votes.push_back(make_vote(keys.signer_for(replica(i)), VoteKind::Notarization, 2, b));
  const auto full = aggregate(AggregateKind::Notarization, b, votes);
  CHECK(verify_aggregate(full, cfg, keys));
  votes.pop_back();
  CHECK_FALSE(verify_aggregate(aggregate(AggregateKind::Notarization, b, votes), cfg, keys));

  auto tampered = full;
  tampered.votes[0].signature.tag = test::digest_of("x");
  CHECK_FALSE(verify_aggregate(tampered, cfg, keys));
}

TEST_CASE("fast finalization needs n-p fast votes for a rank-0 header") {
  KeyRegistry keys(4, 1);
  const auto cfg = test::cfg4();
  const auto b = test::make_block(keys.signer_for(replica(1)), 1, genesis_block()->hash, cfg);
  std::vector<Vote> votes;
  for (std::uint32_t i : {0u, 1u, 2u}) votes.push_back(make_vote(keys.signer_for(replica(i)), VoteKind::Fast, 1, b->hash));
  CHECK(verify_aggregate(aggregate(AggregateKind::FastFinalization, b->hash, votes, {b->header}), cfg, keys));
  CHECK_FALSE(verify_aggregate(aggregate(AggregateKind::FastFinalization, b->hash, votes, {}), cfg, keys));
  votes.pop_back();
  CHECK_FALSE(verify_aggregate(aggregate(AggregateKind::FastFinalization, b->hash, votes, {b->header}), cfg, keys));

  const auto r1 = test::make_block(keys.signer_for(replica(2)), 1, genesis_block()->hash, cfg);
  std::vector<Vote> r1votes;
  for (std::uint32_t i : {0u, 1u, 2u}) r1votes.push_back(make_vote(keys.signer_for(replica(i)), VoteKind::Fast, 1, r1->hash));
  CHECK_FALSE(verify_aggregate(aggregate(AggregateKind::FastFinalization, r1->hash, r1votes, {r1->header}), cfg, keys));
}

TEST_CASE("unlock proofs are re-evaluated from their contents") {
  KeyRegistry keys(4, 1);
  const auto cfg = test::cfg4();
  const auto th = default_thresholds(cfg);
  const auto b = test::make_block(keys.signer_for(replica(1)), 1, genesis_block()->hash, cfg);
  std::vector<Vote> votes;
  for (std::uint32_t i : {1u, 2u, 3u}) votes.push_back(make_vote(keys.signer_for(replica(i)), VoteKind::Fast, 1, b->hash));
  const auto proof = aggregate(AggregateKind::UnlockProof, b->hash, votes, {b->header});
  const auto verdict = check_unlock_proof(proof, cfg, keys, th);
  CHECK(verdict.valid);
  CHECK_FALSE(verdict.round_wide);
  REQUIRE(verdict.unlocked.size() == 1);
  CHECK(verify_aggregate(proof, cfg, keys, th));

  // Two votes are not more than f + p.
  votes.pop_back();
  const auto weak = aggregate(AggregateKind::UnlockProof, b->hash, votes, {b->header});
  CHECK_FALSE(verify_aggregate(weak, cfg, keys, th));

  // A header missing for an attested block invalidates the proof.
  const auto headless = aggregate(AggregateKind::UnlockProof, b->hash, proof.votes, {});
  CHECK_FALSE(check_unlock_proof(headless, cfg, keys, th).valid);
}

TEST_CASE("unlock proof may hold one voter's votes for distinct blocks") {
  KeyRegistry keys(4, 1);
  const Digest a = test::digest_of("a");
  const Digest c = test::digest_of("c");
  const Vote va = make_vote(keys.signer_for(replica(0)), VoteKind::Fast, 1, a);
  const Vote vc = make_vote(keys.signer_for(replica(0)), VoteKind::Fast, 1, c);
  CHECK_NOTHROW(aggregate(AggregateKind::UnlockProof, a, {va, vc}));
  CHECK_THROWS_AS(aggregate(AggregateKind::UnlockProof, a, {va, va}), AggregationError);
}
