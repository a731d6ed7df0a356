#pragma once

#include <memory>
#include <variant>
#include <vector>

#include "banyan/types.hpp"

namespace banyan {

/// A block together with its parent's notarization and unlock evidence.
/// Evidence is null when the parent is genesis (or in ICC mode for unlock).
struct BlockMsg {
  std::shared_ptr<const Block> block;
  std::shared_ptr<const Aggregate> parent_notarization;
  std::shared_ptr<const Aggregate> parent_unlock;
};

struct VoteMsg {
  Vote vote;
};

/// One or more aggregates delivered together (e.g. notarization plus unlock
/// proof on round advancement).
struct AggregateMsg {
  std::vector<std::shared_ptr<const Aggregate>> aggregates;
};

using Message = std::variant<BlockMsg, VoteMsg, AggregateMsg>;

enum class MsgType : std::uint8_t { None = 0, Block = 1, Vote = 2, Aggregate = 3 };

MsgType message_type(const Message& m);
/// Round the message belongs to (block round, vote round, first aggregate).
Round message_round(const Message& m);
/// Block the message is about (zero for mixed aggregates).
Digest message_subject(const Message& m);
/// Wire-size estimate: payload bytes plus a fixed per-message overhead.
std::uint64_t message_bytes(const Message& m, std::uint64_t overhead);

}  // namespace banyan
