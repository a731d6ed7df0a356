#include "banyan/unlock.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace banyan;

namespace {

BlockSupport block(const std::string& name, Rank rank, std::initializer_list<std::uint32_t> voters) {
  BlockSupport s{test::digest_of(name), rank, {}};
  for (auto v : voters) s.supporters.push_back(replica(v));
  return s;
}

const UnlockRule kRule{2, true};  // n = 4, f = 1, p = 1: support must exceed 2

}  // namespace

TEST_CASE("condition 1: leader block with three fast votes") {
  // Round k of the figure: one rank-0 block, fast votes from 0, 1, 2.
  const std::vector<BlockSupport> blocks{block("b0", 0, {0, 1, 2})};
  const auto e = evaluate_unlock(blocks, 4, kRule);
  REQUIRE(e.unlocked.size() == 1);
  CHECK(e.unlocked[0] == test::digest_of("b0"));
  CHECK_FALSE(e.round_wide);
  CHECK(e.max_block == test::digest_of("b0"));
}

TEST_CASE("condition 1 counts support of non-leader blocks") {
  // supp(b0) = {0}, supp(b1) = {2, 3}: b0 reaches 3 with the non-leader
  // support, b1 stays at 2.
  const std::vector<BlockSupport> blocks{block("b0", 0, {0}), block("b1", 1, {2, 3})};
  const auto e = evaluate_unlock(blocks, 4, kRule);
  CHECK(e.non_leader_support == 2);
  REQUIRE(e.unlocked.size() == 1);
  CHECK(e.unlocked[0] == test::digest_of("b0"));
  CHECK_FALSE(e.round_wide);
}

TEST_CASE("condition 2: split support unlocks the whole round") {
  // Round k+1 of the figure: two rank-0 blocks (equivocation) and a rank-1
  // block; max has 2 votes, the others together 3 distinct voters.
  const std::vector<BlockSupport> blocks{block("a", 0, {0, 1}), block("a2", 0, {1, 2}), block("c", 1, {3})};
  const auto e = evaluate_unlock(blocks, 4, kRule);
  CHECK(e.non_max_support == 3);
  CHECK(e.round_wide);
}

TEST_CASE("max ties break towards the smaller hash") {
  auto x = block("x", 0, {0});
  auto y = block("y", 0, {1});
  const std::vector<BlockSupport> blocks{x, y};
  const auto e = evaluate_unlock(blocks, 4, kRule);
  CHECK(e.max_block == std::min(x.hash, y.hash));
}

TEST_CASE("supporters are counted once across blocks") {
  const std::vector<BlockSupport> blocks{block("a", 0, {0, 1}), block("b", 1, {0, 1}), block("c", 2, {1})};
  const auto e = evaluate_unlock(blocks, 4, kRule);
  CHECK(e.non_leader_support == 2);
  CHECK(e.non_max_support == 2);
  CHECK(e.unlocked.empty());
  CHECK_FALSE(e.round_wide);
}

TEST_CASE("threshold is strict unless mutated") {
  const std::vector<BlockSupport> blocks{block("b", 0, {0, 1})};
  CHECK(evaluate_unlock(blocks, 4, kRule).unlocked.empty());
  CHECK(evaluate_unlock(blocks, 4, UnlockRule{2, false}).unlocked.size() == 1);
}

TEST_CASE("no rank-0 block: every block is non-max") {
  const std::vector<BlockSupport> blocks{block("r1", 1, {0, 1, 2})};
  const auto e = evaluate_unlock(blocks, 4, kRule);
  CHECK_FALSE(e.max_block.has_value());
  CHECK(e.round_wide);
  CHECK(e.unlocked.size() == 1);
}
