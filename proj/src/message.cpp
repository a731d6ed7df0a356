#include "banyan/message.hpp"

namespace banyan {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

MsgType message_type(const Message& m) {
  return std::visit(overloaded{[](const BlockMsg&) { return MsgType::Block; },
                               [](const VoteMsg&) { return MsgType::Vote; },
                               [](const AggregateMsg&) { return MsgType::Aggregate; }},
                    m);
}

Round message_round(const Message& m) {
  return std::visit(overloaded{[](const BlockMsg& b) { return b.block ? b.block->round() : Round{0}; },
                               [](const VoteMsg& v) { return v.vote.round; },
                               [](const AggregateMsg& a) {
                                 return a.aggregates.empty() || !a.aggregates.front() ? Round{0}
                                                                                      : a.aggregates.front()->round;
                               }},
                    m);
}

Digest message_subject(const Message& m) {
  return std::visit(overloaded{[](const BlockMsg& b) { return b.block ? b.block->hash : Digest{}; },
                               [](const VoteMsg& v) { return v.vote.block_hash; },
                               [](const AggregateMsg& a) {
                                 return a.aggregates.empty() || !a.aggregates.front() ? Digest{}
                                                                                      : a.aggregates.front()->subject;
                               }},
                    m);
}

std::uint64_t message_bytes(const Message& m, std::uint64_t overhead) {
  if (const auto* b = std::get_if<BlockMsg>(&m)) {
    return overhead + (b->block ? b->block->payload_size() : 0);
  }
  return overhead;
}

}  // namespace banyan
