#include "banyan/trace.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace banyan {

using nlohmann::json;

const char* to_string(RecordKind k) {
  switch (k) {
    case RecordKind::Send: return "send";
    case RecordKind::Deliver: return "deliver";
    case RecordKind::Timer: return "timer";
    case RecordKind::Propose: return "propose";
    case RecordKind::Vote: return "vote";
    case RecordKind::EnterRound: return "enter_round";
    case RecordKind::Notarized: return "notarized";
    case RecordKind::Unlocked: return "unlocked";
    case RecordKind::Finalized: return "finalized";
    case RecordKind::Output: return "output";
    case RecordKind::Drop: return "drop";
    case RecordKind::Malformed: return "malformed";
  }
  return "?";
}

namespace {

constexpr RecordKind kAllKinds[] = {RecordKind::Send,      RecordKind::Deliver,   RecordKind::Timer,
                                    RecordKind::Propose,   RecordKind::Vote,      RecordKind::EnterRound,
                                    RecordKind::Notarized, RecordKind::Unlocked,  RecordKind::Finalized,
                                    RecordKind::Output,    RecordKind::Drop,      RecordKind::Malformed};

RecordKind parse_kind(const std::string& s) {
  for (auto k : kAllKinds) {
    if (s == to_string(k)) return k;
  }
  throw std::runtime_error("trace: unknown record kind '" + s + "'");
}

PathTag parse_path(const std::string& s) {
  if (s == "fast") return PathTag::Fast;
  if (s == "slow") return PathTag::Slow;
  if (s == "implicit") return PathTag::Implicit;
  if (s.empty()) return PathTag::None;
  throw std::runtime_error("trace: unknown path tag '" + s + "'");
}

std::uint8_t parse_vote_kind(const std::string& s) {
  for (auto k : {VoteKind::Notarization, VoteKind::Fast, VoteKind::Finalization}) {
    if (s == to_string(k)) return static_cast<std::uint8_t>(k);
  }
  throw std::runtime_error("trace: unknown vote kind '" + s + "'");
}

const char* msg_type_name(MsgType t) {
  switch (t) {
    case MsgType::None: return "";
    case MsgType::Block: return "block";
    case MsgType::Vote: return "vote";
    case MsgType::Aggregate: return "aggregate";
  }
  return "";
}

MsgType parse_msg_type(const std::string& s) {
  if (s == "block") return MsgType::Block;
  if (s == "vote") return MsgType::Vote;
  if (s == "aggregate") return MsgType::Aggregate;
  return MsgType::None;
}

void encode_header(ByteWriter& w, const TraceHeader& h) {
  w.str("banyan/trace/v1").str(h.scenario);
  w.u32(h.cfg.n).u32(h.cfg.f).u32(h.cfg.p).i64(h.cfg.delta_bound);
  w.u8(static_cast<std::uint8_t>(h.cfg.mode)).u8(static_cast<std::uint8_t>(h.cfg.rotation.kind)).u64(h.cfg.rotation.seed);
  w.u64(h.seed).u64(h.rounds).u64(h.payload_bytes);
  w.u32(static_cast<std::uint32_t>(h.behaviors.size()));
  for (const auto& b : h.behaviors) w.str(b);
  w.u32(static_cast<std::uint32_t>(h.async_windows.size()));
  for (const auto& win : h.async_windows) w.i64(win.start).i64(win.end);
  w.i64(h.end_time);
}

void encode_record(ByteWriter& w, const TraceRecord& r) {
  w.i64(r.time).u8(static_cast<std::uint8_t>(r.kind)).u32(r.from).u32(r.to).u64(r.round).digest(r.block_hash);
  w.u8(r.vote_kind).u8(static_cast<std::uint8_t>(r.path)).u8(static_cast<std::uint8_t>(r.msg_type)).u64(r.msg_id);
  w.digest(r.parent).u32(r.rank).u64(r.bytes).u64(r.aux);
}

json header_json(const TraceHeader& h) {
  json j;
  j["type"] = "header";
  j["scenario"] = h.scenario;
  j["n"] = h.cfg.n;
  j["f"] = h.cfg.f;
  j["p"] = h.cfg.p;
  j["delta_us"] = h.cfg.delta_bound;
  j["mode"] = to_string(h.cfg.mode);
  j["rotation"] = h.cfg.rotation.kind == RotationKind::RoundRobin ? "round_robin" : "seeded_permutation";
  j["rotation_seed"] = h.cfg.rotation.seed;
  j["seed"] = h.seed;
  j["rounds"] = h.rounds;
  j["payload_bytes"] = h.payload_bytes;
  j["behaviors"] = h.behaviors;
  json windows = json::array();
  for (const auto& w : h.async_windows) windows.push_back({w.start, w.end});
  j["async_windows_us"] = windows;
  j["end_us"] = h.end_time;
  return j;
}

TraceHeader parse_header(const json& j) {
  if (j.value("type", "") != "header") throw std::runtime_error("trace: first line is not a header");
  TraceHeader h;
  h.scenario = j.at("scenario").get<std::string>();
  h.cfg.n = j.at("n").get<std::uint32_t>();
  h.cfg.f = j.at("f").get<std::uint32_t>();
  h.cfg.p = j.at("p").get<std::uint32_t>();
  h.cfg.delta_bound = j.at("delta_us").get<SimTime>();
  h.cfg.mode = j.at("mode").get<std::string>() == "icc" ? Mode::Icc : Mode::Banyan;
  h.cfg.rotation.kind = j.at("rotation").get<std::string>() == "round_robin" ? RotationKind::RoundRobin
                                                                             : RotationKind::SeededPermutation;
  h.cfg.rotation.seed = j.at("rotation_seed").get<std::uint64_t>();
  h.seed = j.at("seed").get<std::uint64_t>();
  h.rounds = j.at("rounds").get<Round>();
  h.payload_bytes = j.at("payload_bytes").get<std::uint64_t>();
  h.behaviors = j.at("behaviors").get<std::vector<std::string>>();
  for (const auto& w : j.at("async_windows_us")) h.async_windows.push_back({w.at(0).get<SimTime>(), w.at(1).get<SimTime>()});
  h.end_time = j.at("end_us").get<SimTime>();
  return h;
}

}  // namespace

Digest trace_digest(const Trace& trace) {
  Hasher hasher;
  ByteWriter w;
  encode_header(w, trace.header);
  hasher.update(w.bytes());
  for (const auto& r : trace.records) {
    w.clear();
    encode_record(w, r);
    hasher.update(w.bytes());
  }
  return hasher.finish();
}

void write_trace_jsonl(const Trace& trace, std::ostream& out) {
  out << header_json(trace.header).dump() << '\n';
  for (const auto& r : trace.records) {
    json j;
    j["time"] = to_ms(r.time);
    j["kind"] = to_string(r.kind);
    if (r.from != kNoReplica) j["from"] = r.from;
    if (r.to != kNoReplica) j["to"] = r.to;
    if (r.round != 0) j["round"] = r.round;
    if (!r.block_hash.is_zero()) j["block_hash"] = r.block_hash.hex();
    if (r.vote_kind != kNoVoteKind) j["vote_kind"] = to_string(static_cast<VoteKind>(r.vote_kind));
    if (r.path != PathTag::None) j["path_tag"] = to_string(r.path);
    if (r.msg_type != MsgType::None) j["msg_type"] = msg_type_name(r.msg_type);
    if (r.msg_id != 0) j["msg"] = r.msg_id;
    if (!r.parent.is_zero()) j["parent"] = r.parent.hex();
    if (r.rank != 0) j["rank"] = r.rank;
    if (r.bytes != 0) j["bytes"] = r.bytes;
    if (r.aux != 0) j["aux"] = r.aux;
    out << j.dump() << '\n';
  }
}

Trace read_trace_jsonl(std::istream& in) {
  Trace trace;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trace: empty input");
  trace.header = parse_header(json::parse(line));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      // A torn final line (truncated file) ends the trace; anything else is corrupt.
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw std::runtime_error("trace: malformed record line");
    }
    TraceRecord r;
    r.time = from_ms(j.at("time").get<double>());
    r.kind = parse_kind(j.at("kind").get<std::string>());
    r.from = j.value("from", kNoReplica);
    r.to = j.value("to", kNoReplica);
    r.round = j.value("round", Round{0});
    if (j.contains("block_hash")) r.block_hash = Digest::from_hex(j["block_hash"].get<std::string>());
    if (j.contains("vote_kind")) r.vote_kind = parse_vote_kind(j["vote_kind"].get<std::string>());
    r.path = parse_path(j.value("path_tag", std::string{}));
    r.msg_type = parse_msg_type(j.value("msg_type", std::string{}));
    r.msg_id = j.value("msg", std::uint64_t{0});
    if (j.contains("parent")) r.parent = Digest::from_hex(j["parent"].get<std::string>());
    r.rank = j.value("rank", std::uint32_t{0});
    r.bytes = j.value("bytes", std::uint64_t{0});
    r.aux = j.value("aux", std::uint64_t{0});
    trace.records.push_back(r);
  }
  return trace;
}

}  // namespace banyan
