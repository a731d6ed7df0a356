#include "banyan/netsim.hpp"

#include <algorithm>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>

namespace banyan {

DelayModel DelayModel::uniform(std::uint32_t n, SimTime delay) {
  DelayModel m;
  m.base.assign(n, std::vector<SimTime>(n, delay));
  for (std::uint32_t i = 0; i < n; ++i) m.base[i][i] = 0;
  return m;
}

SimTime DelayModel::max_delay() const {
  SimTime worst = 0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    for (std::size_t j = 0; j < base[i].size(); ++j) {
      if (i != j) worst = std::max(worst, base[i][j]);
    }
  }
  return worst + jitter.hi;
}

std::string check_delay_model(const DelayModel& model, const ProtocolConfig& cfg) {
  if (model.base.size() != cfg.n) return "delays: matrix must be n x n";
  for (const auto& row : model.base) {
    if (row.size() != cfg.n) return "delays: matrix must be n x n";
    for (SimTime d : row) {
      if (d < 0) return "delays: negative delay";
    }
  }
  if (model.jitter.lo < 0 || model.jitter.hi < model.jitter.lo) return "delays.jitter: need 0 <= lo <= hi";
  if (model.max_delay() > cfg.delta_bound) {
    return "delays: max one-way delay " + std::to_string(to_ms(model.max_delay())) +
           "ms exceeds delta_bound; use async_windows for asynchrony";
  }
  for (const auto& w : model.async_windows) {
    if (w.start < 0 || w.end <= w.start) return "delays.async_windows: need 0 <= start < end";
  }
  return {};
}

const char* to_string(Behavior b) {
  switch (b) {
    case Behavior::Honest: return "honest";
    case Behavior::Crash: return "crash";
    case Behavior::MuteLeader: return "mute_leader";
    case Behavior::EquivocatingLeader: return "equivocating_leader";
    case Behavior::PromiscuousFastVoter: return "promiscuous_fast_voter";
    case Behavior::WithholdVotes: return "withhold_votes";
  }
  return "?";
}

Behavior parse_behavior(const std::string& s) {
  for (auto b : {Behavior::Honest, Behavior::Crash, Behavior::MuteLeader, Behavior::EquivocatingLeader,
                 Behavior::PromiscuousFastVoter, Behavior::WithholdVotes}) {
    if (s == to_string(b)) return b;
  }
  throw std::invalid_argument("unknown behavior '" + s + "'");
}

SimTime time_cap(const RunParams& params) {
  SimTime windows = 0;
  for (const auto& w : params.delays.async_windows) windows = std::max(windows, w.end);
  const SimTime d = params.cfg.delta_bound;
  const SimTime per_round = 2 * d * params.cfg.n + 4 * d;
  return windows + static_cast<SimTime>(params.rounds) * per_round + 10 * d;
}

namespace {

enum class MsgClass : std::uint64_t { Block = 0, Vote = 1, Aggregate = 2 };

MsgClass class_of(const Message& m) {
  switch (message_type(m)) {
    case MsgType::Block: return MsgClass::Block;
    case MsgType::Vote: return MsgClass::Vote;
    default: return MsgClass::Aggregate;
  }
}

struct Event {
  SimTime time = 0;
  std::uint32_t sender = 0;
  std::uint64_t seq = 0;
  std::uint32_t to = 0;
  bool timer = false;
  std::shared_ptr<const Message> msg;
  std::uint64_t msg_id = 0;

  bool operator>(const Event& o) const {
    return std::tie(time, sender, seq) > std::tie(o.time, o.sender, o.seq);
  }
};

struct Node {
  Replica engine;
  FaultSpec fault;
  Signer signer;
  std::uint64_t seq = 0;
  std::optional<SimTime> timer;
  std::set<Digest> promiscuous_voted;
};

class Simulator {
 public:
  explicit Simulator(const RunParams& p) : p_(p), keys_(p.cfg.n, mix64(p.seed, 0x6b657973)) {
    const auto& cfg = p_.cfg;
    EngineOptions opts;
    opts.payload_bytes = p_.payload_bytes;
    opts.payload_seed = p_.seed;
    opts.last_round = p_.rounds;
    opts.mutation = p_.mutation;
    nodes_.reserve(cfg.n);
    for (std::uint32_t i = 0; i < cfg.n; ++i) {
      FaultSpec fault = i < p_.faults.size() ? p_.faults[i] : FaultSpec{};
      Signer s = keys_.signer_for(replica(i));
      nodes_.push_back(Node{Replica(cfg, s, keys_, opts), fault, s, 0, std::nullopt, {}});
    }
    auto& h = result_.trace.header;
    h.scenario = p_.scenario;
    h.cfg = cfg;
    h.seed = p_.seed;
    h.rounds = p_.rounds;
    h.payload_bytes = p_.payload_bytes;
    for (const auto& n : nodes_) h.behaviors.emplace_back(to_string(n.fault.behavior));
    h.async_windows = p_.delays.async_windows;
    cap_ = time_cap(p_);
  }

  RunResult run() {
    for (std::uint32_t i = 0; i < p_.cfg.n; ++i) step(i, TimerTick{0});
    SimTime last = 0;
    while (!queue_.empty()) {
      Event ev = queue_.top();
      queue_.pop();
      if (ev.time > cap_) {
        result_.stats.hit_time_cap = true;
        break;
      }
      last = ev.time;
      ++result_.stats.events;
      Node& node = nodes_[ev.to];
      if (crashed(node, ev.time)) continue;
      if (ev.timer) {
        if (node.timer != ev.time) continue;
        node.timer.reset();
        TraceRecord rec;
        rec.time = ev.time;
        rec.kind = RecordKind::Timer;
        rec.from = ev.to;
        push(rec);
        step(ev.to, TimerTick{ev.time});
        continue;
      }
      TraceRecord rec;
      rec.time = ev.time;
      rec.kind = RecordKind::Deliver;
      rec.from = ev.sender;
      rec.to = ev.to;
      rec.msg_id = ev.msg_id;
      rec.msg_type = message_type(*ev.msg);
      rec.round = message_round(*ev.msg);
      rec.block_hash = message_subject(*ev.msg);
      push(rec);
      if (node.fault.behavior == Behavior::PromiscuousFastVoter) promiscuous(ev.to, *ev.msg, ev.time);
      step(ev.to, Deliver{*ev.msg, replica(ev.sender), ev.time});
    }
    result_.trace.header.end_time = last;
    return std::move(result_);
  }

 private:
  static bool crashed(const Node& n, SimTime t) { return n.fault.behavior == Behavior::Crash && t >= n.fault.crash_at; }

  void push(const TraceRecord& r) { result_.trace.records.push_back(r); }

  void step(std::uint32_t i, const EngineInput& input) {
    Node& node = nodes_[i];
    const SimTime now = std::visit([](const auto& x) { return x.now; }, input);
    if (crashed(node, now)) return;
    EngineOutput out = node.engine.handle(input);
    for (const auto& r : out.records) push(r);
    for (const auto& s : out.sends) dispatch(i, s, now);
    if (auto wake = node.engine.next_wakeup(); wake && (!node.timer || *wake < *node.timer)) {
      node.timer = *wake;
      queue_.push(Event{*wake, i, node.seq++, i, true, nullptr, 0});
    }
  }

  std::vector<std::uint32_t> others(std::uint32_t i) const {
    std::vector<std::uint32_t> v;
    for (std::uint32_t j = 0; j < p_.cfg.n; ++j) {
      if (j != i) v.push_back(j);
    }
    return v;
  }

  void drop(std::uint32_t i, const Message& m, SimTime now) {
    TraceRecord rec;
    rec.time = now;
    rec.kind = RecordKind::Drop;
    rec.from = i;
    rec.msg_type = message_type(m);
    rec.round = message_round(m);
    rec.block_hash = message_subject(m);
    push(rec);
  }

  // Applies the sender's fault behaviour to one engine output.
  void dispatch(std::uint32_t i, const Outgoing& o, SimTime now) {
    Node& node = nodes_[i];
    const Message& m = *o.message;
    const auto targets = o.to ? std::vector<std::uint32_t>{idx(*o.to)} : others(i);
    switch (node.fault.behavior) {
      case Behavior::MuteLeader:
        if (rank_of(replica(i), message_round(m), p_.cfg) == 0) {
          drop(i, m, now);
          return;
        }
        break;
      case Behavior::WithholdVotes:
        if (const auto* v = std::get_if<VoteMsg>(&m)) {
          const auto& kinds = node.fault.withhold;
          if (std::find(kinds.begin(), kinds.end(), v->vote.kind) != kinds.end()) {
            drop(i, m, now);
            return;
          }
        }
        break;
      case Behavior::EquivocatingLeader:
        if (const auto* b = std::get_if<BlockMsg>(&m); b && b->block && b->block->proposer() == replica(i) &&
                                                        b->block->rank() == 0 && !o.to) {
          equivocate(i, *b, now);
          return;
        }
        break;
      default: break;
    }
    send(i, o.message, targets, now);
  }

  void send(std::uint32_t i, std::shared_ptr<const Message> msg, const std::vector<std::uint32_t>& targets,
            SimTime now) {
    Node& node = nodes_[i];
    const std::uint64_t id = ++result_.stats.messages;
    TraceRecord rec;
    rec.time = now;
    rec.kind = RecordKind::Send;
    rec.from = i;
    rec.to = targets.size() == 1 ? targets.front() : kNoReplica;
    rec.msg_id = id;
    rec.msg_type = message_type(*msg);
    rec.round = message_round(*msg);
    rec.block_hash = message_subject(*msg);
    rec.bytes = message_bytes(*msg, p_.msg_overhead) * targets.size();
    push(rec);
    const Round round = message_round(*msg);
    const auto cls = static_cast<std::uint64_t>(class_of(*msg));
    for (std::uint32_t j : targets) {
      queue_.push(Event{deliver_at(i, j, round, cls, id, now), i, node.seq++, j, false, msg, id});
    }
  }

  SimTime deliver_at(std::uint32_t i, std::uint32_t j, Round round, std::uint64_t cls, std::uint64_t id,
                     SimTime now) const {
    const auto& d = p_.delays;
    SimTime delay = d.base[i][j];
    if (d.jitter.hi > d.jitter.lo) {
      SplitMix rng(mix64(mix64(p_.seed, mix64(i, j)), mix64(round, cls)));
      delay += d.jitter.lo + static_cast<SimTime>(rng.below(static_cast<std::uint64_t>(d.jitter.hi - d.jitter.lo) + 1));
    } else {
      delay += d.jitter.lo;
    }
    SimTime start = now;
    for (const auto& w : d.async_windows) {
      if (w.contains(now)) {
        SplitMix rng(mix64(mix64(p_.seed, 0x6173796e63), mix64(id, j)));
        start = std::max(start, now + static_cast<SimTime>(rng.below(static_cast<std::uint64_t>(w.end - now) + 1)));
      }
    }
    return start + delay;
  }

  void broadcast_vote(std::uint32_t i, VoteKind kind, Round round, const Digest& block, SimTime now) {
    auto msg = std::make_shared<const Message>(VoteMsg{make_vote(nodes_[i].signer, kind, round, block)});
    send(i, msg, others(i), now);
  }

  // Two conflicting rank-0 blocks to disjoint halves, then every vote kind
  // for both.
  void equivocate(std::uint32_t i, const BlockMsg& orig, SimTime now) {
    const Node& node = nodes_[i];
    const Block& b = *orig.block;
    auto alt = std::make_shared<Block>(b);
    const std::size_t size = std::max<std::size_t>(b.payload_size(), 8);
    alt->payload = make_payload(mix64(p_.seed, 0x65717569766f6361), replica(i), b.round(), size);
    alt->header.payload_digest = sha256(*alt->payload);
    sign_header(node.signer, alt->header);
    alt->hash = alt->header.hash();
    alt->embedded_fast_vote.reset();
    if (p_.cfg.mode == Mode::Banyan) alt->embedded_fast_vote = make_vote(node.signer, VoteKind::Fast, b.round(), alt->hash);

    const auto rest = others(i);
    const std::size_t half = (rest.size() + 1) / 2;
    const std::vector<std::uint32_t> first(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(half));
    const std::vector<std::uint32_t> second(rest.begin() + static_cast<std::ptrdiff_t>(half), rest.end());
    send(i, std::make_shared<const Message>(orig), first, now);
    if (!second.empty()) {
      send(i, std::make_shared<const Message>(BlockMsg{alt, orig.parent_notarization, orig.parent_unlock}), second,
           now);
    }
    for (const Digest& h : {b.hash, alt->hash}) {
      broadcast_vote(i, VoteKind::Notarization, b.round(), h, now);
      if (p_.cfg.mode == Mode::Banyan) broadcast_vote(i, VoteKind::Fast, b.round(), h, now);
      broadcast_vote(i, VoteKind::Finalization, b.round(), h, now);
    }
  }

  void promiscuous(std::uint32_t i, const Message& m, SimTime now) {
    if (p_.cfg.mode != Mode::Banyan) return;
    const auto* b = std::get_if<BlockMsg>(&m);
    if (b == nullptr || !b->block) return;
    Node& node = nodes_[i];
    if (!node.promiscuous_voted.insert(b->block->hash).second) return;
    broadcast_vote(i, VoteKind::Fast, b->block->round(), b->block->hash, now);
  }

  const RunParams& p_;
  KeyRegistry keys_;
  std::vector<Node> nodes_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  SimTime cap_ = 0;
  RunResult result_;
};

}  // namespace

RunResult run(const RunParams& params) {
  const auto check = validate_config(params.cfg);
  if (!check.ok) throw std::invalid_argument(check.reason);
  if (params.rounds == 0) throw std::invalid_argument("rounds must be > 0");
  if (auto reason = check_delay_model(params.delays, params.cfg); !reason.empty()) throw std::invalid_argument(reason);
  if (!params.faults.empty() && params.faults.size() != params.cfg.n) {
    throw std::invalid_argument("faults: need one entry per replica");
  }
  return Simulator(params).run();
}

}  // namespace banyan
