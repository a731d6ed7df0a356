#include "banyan/checkers.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <unordered_map>

namespace banyan {

using nlohmann::json;

namespace {

CheckReport pass(std::string property, std::string detail) {
  return CheckReport{std::move(property), true, std::move(detail), 0, {}};
}

CheckReport violation(std::string property, Round round, std::string detail, std::vector<TraceRecord> witness) {
  return CheckReport{std::move(property), false, std::move(detail), round, std::move(witness)};
}

std::string who(std::uint32_t r) { return "replica " + std::to_string(r); }

// Records of `kind` at replicas that follow the protocol.
template <class F>
void for_each_correct(const Trace& trace, RecordKind kind, F&& f) {
  for (const auto& r : trace.records) {
    if (r.kind == kind && trace.header.follows_protocol(r.from)) f(r);
  }
}

// Per-round slow/fast-path finalizations at correct replicas (first seen).
std::map<Round, TraceRecord> explicit_finalizations(const Trace& trace, PathTag path) {
  std::map<Round, TraceRecord> out;
  for_each_correct(trace, RecordKind::Finalized, [&](const TraceRecord& r) {
    if (r.path == path) out.try_emplace(r.round, r);
  });
  return out;
}

CheckReport sibling_check(const Trace& trace, std::string property, PathTag path, RecordKind sibling_kind,
                          const char* status) {
  const auto finals = explicit_finalizations(trace, path);
  std::size_t checked = 0;
  for (const auto& r : trace.records) {
    if (r.kind != sibling_kind || !trace.header.follows_protocol(r.from)) continue;
    auto it = finals.find(r.round);
    if (it == finals.end()) continue;
    ++checked;
    if (r.block_hash != it->second.block_hash) {
      return violation(property, r.round,
                       "round " + std::to_string(r.round) + ": block " + it->second.block_hash.short_hex() + " " +
                           to_string(path) + "-finalized at " + who(it->second.from) + " but " +
                           r.block_hash.short_hex() + " " + status + " at " + who(r.from),
                       {it->second, r});
    }
  }
  return pass(property, std::to_string(finals.size()) + " " + to_string(path) + "-finalized rounds, " +
                            std::to_string(checked) + " status records checked");
}

}  // namespace

CheckReport check_safety(const Trace& trace) {
  const std::string name = "safety";
  std::map<Round, TraceRecord> finalized;
  std::size_t count = 0;
  for_each_correct(trace, RecordKind::Finalized, [&](const TraceRecord&) { ++count; });
  for (const auto& r : trace.records) {
    if (r.kind != RecordKind::Finalized || !trace.header.follows_protocol(r.from)) continue;
    auto [it, fresh] = finalized.try_emplace(r.round, r);
    if (!fresh && it->second.block_hash != r.block_hash) {
      return violation(name, r.round,
                       "round " + std::to_string(r.round) + ": " + it->second.block_hash.short_hex() +
                           " finalized at " + who(it->second.from) + ", " + r.block_hash.short_hex() +
                           " finalized at " + who(r.from),
                       {it->second, r});
    }
  }
  for (const auto& [round, rec] : finalized) {
    if (round <= 1) continue;
    auto prev = finalized.find(round - 1);
    if (prev != finalized.end() && prev->second.block_hash != rec.parent) {
      return violation(name, round,
                       "round " + std::to_string(round) + ": finalized block " + rec.block_hash.short_hex() +
                           " does not extend finalized " + prev->second.block_hash.short_hex(),
                       {prev->second, rec});
    }
  }
  return pass(name, std::to_string(finalized.size()) + " rounds finalized, " + std::to_string(count) +
                        " finalization records agree");
}

CheckReport check_lemma_sp(const Trace& trace) {
  return sibling_check(trace, "lemma_sp", PathTag::Slow, RecordKind::Notarized, "notarized");
}

CheckReport check_lemma_fp(const Trace& trace) {
  return sibling_check(trace, "lemma_fp", PathTag::Fast, RecordKind::Unlocked, "unlocked");
}

CheckReport check_growth(const Trace& trace) {
  const std::string name = "growth";
  const auto& h = trace.header;
  const Round target = h.rounds + 1;
  const bool banyan = h.cfg.mode == Mode::Banyan;

  struct Seen {
    std::set<Digest> notarized;
    std::set<Digest> unlocked;
    Round reached = 0;
  };
  std::map<std::uint32_t, Seen> seen;
  for (std::uint32_t r = 0; r < h.cfg.n; ++r) {
    if (h.follows_protocol(r)) seen[r];
  }
  for (const auto& rec : trace.records) {
    auto it = seen.find(rec.from);
    if (it == seen.end()) continue;
    Seen& s = it->second;
    switch (rec.kind) {
      case RecordKind::Notarized: s.notarized.insert(rec.block_hash); break;
      case RecordKind::Unlocked: s.unlocked.insert(rec.block_hash); break;
      case RecordKind::EnterRound:
        if (rec.round > 1) {
          if (!s.notarized.contains(rec.block_hash) || (banyan && !s.unlocked.contains(rec.block_hash))) {
            return violation(name, rec.round,
                             who(rec.from) + " entered round " + std::to_string(rec.round) + " extending " +
                                 rec.block_hash.short_hex() + " without seeing it notarized and unlocked",
                             {rec});
          }
        }
        s.reached = std::max(s.reached, rec.round);
        break;
      default: break;
    }
  }
  for (const auto& [r, s] : seen) {
    if (s.reached < target) {
      return violation(name, s.reached,
                       who(r) + " reached round " + std::to_string(s.reached) + " of " + std::to_string(target) +
                           " (horizon shortfall)",
                       {});
    }
  }
  return pass(name, std::to_string(seen.size()) + " correct replicas reached round " + std::to_string(target));
}

CheckReport check_fast_termination(const Trace& trace) {
  const std::string name = "fast_termination";
  const auto& h = trace.header;
  if (h.cfg.mode != Mode::Banyan) return pass(name, "not applicable in icc mode");
  std::uint32_t faulty = 0;
  for (std::uint32_t r = 0; r < h.cfg.n; ++r) faulty += h.is_honest(r) ? 0 : 1;
  if (faulty > h.cfg.p) return pass(name, "not applicable: more than p non-honest replicas");

  std::unordered_map<std::uint64_t, SimTime> sends;
  std::unordered_map<Digest, TraceRecord, DigestHash> proposals;
  std::map<std::pair<std::uint32_t, Digest>, TraceRecord> finals;
  std::vector<TraceRecord> delivers;
  for (const auto& r : trace.records) {
    switch (r.kind) {
      case RecordKind::Send: sends.emplace(r.msg_id, r.time); break;
      case RecordKind::Deliver: delivers.push_back(r); break;
      case RecordKind::Propose: proposals.try_emplace(r.block_hash, r); break;
      case RecordKind::Finalized: finals.try_emplace({r.from, r.block_hash}, r); break;
      default: break;
    }
  }

  std::size_t qualifying = 0;
  for (const auto& [hash, prop] : proposals) {
    if (prop.rank != 0 || !h.is_honest(prop.from) || prop.round > h.rounds) continue;
    // Parent must be rank 0 or genesis.
    if (!prop.parent.is_zero() && prop.round > 1) {
      auto parent = proposals.find(prop.parent);
      if (parent == proposals.end() || parent->second.rank != 0) continue;
    }
    auto fin = finals.find({prop.from, hash});
    const SimTime end = fin == finals.end() ? h.end_time : fin->second.time;
    bool async = false;
    for (const auto& w : h.async_windows) async |= w.start <= end && w.end > prop.time - h.cfg.delta_bound;
    if (async) continue;
    ++qualifying;
    if (fin == finals.end()) {
      return violation(name, prop.round,
                       "round " + std::to_string(prop.round) + ": leader " + who(prop.from) +
                           " never finalized its block",
                       {prop});
    }
    // One round trip: leader to responder and back.
    SimTime delta_max = 0;
    for (const auto& d : delivers) {
      if (d.time > end || (d.from != prop.from && d.to != prop.from)) continue;
      auto s = sends.find(d.msg_id);
      if (s == sends.end() || s->second < prop.time) continue;
      delta_max = std::max(delta_max, d.time - s->second);
    }
    const SimTime latency = fin->second.time - prop.time;
    if (latency > 2 * delta_max) {
      return violation(name, prop.round,
                       "round " + std::to_string(prop.round) + ": latency " + std::to_string(to_ms(latency)) +
                           "ms exceeds 2 x " + std::to_string(to_ms(delta_max)) + "ms",
                       {prop, fin->second});
    }
  }
  return pass(name, std::to_string(qualifying) + " qualifying rounds within one round trip");
}

CheckReport check_vote_discipline(const Trace& trace) {
  const std::string name = "vote_discipline";
  std::map<std::tuple<std::uint32_t, Round, std::uint8_t>, TraceRecord> first;
  std::size_t votes = 0;
  for (const auto& r : trace.records) {
    if (r.kind != RecordKind::Vote || !trace.header.follows_protocol(r.from)) continue;
    if (r.vote_kind == static_cast<std::uint8_t>(VoteKind::Notarization)) continue;
    ++votes;
    auto [it, fresh] = first.try_emplace({r.from, r.round, r.vote_kind}, r);
    if (!fresh) {
      return violation(name, r.round,
                       who(r.from) + " sent two " + to_string(static_cast<VoteKind>(r.vote_kind)) +
                           " votes in round " + std::to_string(r.round),
                       {it->second, r});
    }
  }
  return pass(name, std::to_string(votes) + " fast/finalization votes, one per kind per round");
}

std::vector<CheckReport> check_all(const Trace& trace) {
  return {check_safety(trace),      check_lemma_sp(trace),         check_lemma_fp(trace),
          check_growth(trace),      check_fast_termination(trace), check_vote_discipline(trace)};
}

bool all_pass(const std::vector<CheckReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const CheckReport& r) { return r.pass; });
}

Metrics compute_metrics(const Trace& trace) {
  const auto& h = trace.header;
  Metrics m;

  std::unordered_map<Digest, TraceRecord, DigestHash> proposals;
  std::map<Round, Digest> finalized;
  std::map<std::pair<std::uint32_t, Digest>, TraceRecord> finals;
  struct PerReplica {
    std::uint64_t bytes = 0;
    SimTime last_output = 0;
    SimTime first_enter = -1;
    SimTime last_enter = 0;
    Round first_round = 0;
    Round last_round = 0;
  };
  std::map<std::uint32_t, PerReplica> per;
  for (const auto& r : trace.records) {
    const bool correct = h.follows_protocol(r.from);
    switch (r.kind) {
      case RecordKind::Propose: proposals.try_emplace(r.block_hash, r); break;
      case RecordKind::Finalized:
        if (!correct) break;
        finalized.try_emplace(r.round, r.block_hash);
        finals.try_emplace({r.from, r.block_hash}, r);
        per[r.from].bytes += r.bytes;
        break;
      case RecordKind::Output:
        if (correct) per[r.from].last_output = r.time;
        break;
      case RecordKind::EnterRound:
        if (correct) {
          auto& p = per[r.from];
          if (p.first_enter < 0) {
            p.first_enter = r.time;
            p.first_round = r.round;
          }
          p.last_enter = r.time;
          p.last_round = r.round;
        }
        break;
      default: break;
    }
  }
  m.rounds_finalized = finalized.size();

  for (const auto& [round, hash] : finalized) {
    auto prop = proposals.find(hash);
    if (prop == proposals.end() || !h.follows_protocol(prop->second.from)) continue;
    auto fin = finals.find({prop->second.from, hash});
    if (fin == finals.end()) continue;
    m.samples.push_back(LatencySample{round, prop->second.from, prop->second.time, fin->second.time,
                                      fin->second.path, prop->second.bytes});
  }

  if (!m.samples.empty()) {
    std::vector<SimTime> lat;
    std::size_t fast = 0;
    double sum = 0;
    for (const auto& s : m.samples) {
      lat.push_back(s.latency());
      sum += to_ms(s.latency());
      fast += s.path == PathTag::Fast ? 1 : 0;
    }
    std::sort(lat.begin(), lat.end());
    auto rank = [&](double q) {
      const auto i = static_cast<std::size_t>(std::ceil(q * static_cast<double>(lat.size())));
      return to_ms(lat[std::clamp<std::size_t>(i, 1, lat.size()) - 1]);
    };
    m.mean_latency_ms = sum / static_cast<double>(lat.size());
    m.p50_latency_ms = rank(0.50);
    m.p99_latency_ms = rank(0.99);
    m.max_latency_ms = to_ms(lat.back());
    m.fast_hit_rate = static_cast<double>(fast) / static_cast<double>(lat.size());
  }

  double tput = 0;
  double interval = 0;
  std::size_t tput_n = 0;
  std::size_t interval_n = 0;
  for (const auto& [r, p] : per) {
    if (p.last_output > 0) {
      tput += static_cast<double>(p.bytes) / (to_ms(p.last_output) / 1000.0);
      ++tput_n;
    }
    if (p.last_round > p.first_round) {
      interval += to_ms(p.last_enter - p.first_enter) / static_cast<double>(p.last_round - p.first_round);
      ++interval_n;
    }
  }
  if (tput_n > 0) m.throughput_bytes_per_s = tput / static_cast<double>(tput_n);
  if (interval_n > 0) m.block_interval_ms = interval / static_cast<double>(interval_n);
  return m;
}

json to_json(const CheckReport& report) {
  json j;
  j["property"] = report.property;
  j["verdict"] = report.pass ? "pass" : "violated";
  j["detail"] = report.detail;
  if (!report.pass) {
    j["round"] = report.round;
    json ce = json::array();
    for (const auto& r : report.counterexample) {
      json c;
      c["time_ms"] = to_ms(r.time);
      c["kind"] = to_string(r.kind);
      c["replica"] = r.from;
      c["round"] = r.round;
      c["block_hash"] = r.block_hash.hex();
      if (r.path != PathTag::None) c["path_tag"] = to_string(r.path);
      ce.push_back(c);
    }
    j["counterexample"] = ce;
  }
  return j;
}

json to_json(const Metrics& m) {
  json j;
  j["samples"] = m.samples.size();
  j["rounds_finalized"] = m.rounds_finalized;
  j["mean_latency_ms"] = m.mean_latency_ms;
  j["p50_latency_ms"] = m.p50_latency_ms;
  j["p99_latency_ms"] = m.p99_latency_ms;
  j["max_latency_ms"] = m.max_latency_ms;
  j["throughput_bytes_per_s"] = m.throughput_bytes_per_s;
  j["block_interval_ms"] = m.block_interval_ms;
  j["fast_hit_rate"] = m.fast_hit_rate;
  return j;
}

void write_metrics_csv_header(std::ostream& out) {
  out << "scenario,protocol,n,f,p,round,proposer,propose_ms,finalize_ms,path,bytes\n";
}

void write_metrics_csv_rows(const Trace& trace, const Metrics& metrics, std::ostream& out) {
  const auto& h = trace.header;
  for (const auto& s : metrics.samples) {
    out << h.scenario << ',' << to_string(h.cfg.mode) << ',' << h.cfg.n << ',' << h.cfg.f << ',' << h.cfg.p << ','
        << s.round << ',' << s.proposer << ',' << to_ms(s.propose_time) << ',' << to_ms(s.finalize_time) << ','
        << to_string(s.path) << ',' << s.bytes << '\n';
  }
}

}  // namespace banyan
