#include <algorithm>
#include <map>

#include "banyan/checkers.hpp"
#include "banyan/netsim.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace banyan;

namespace {

RunParams base(Mode mode = Mode::Banyan) {
  RunParams p;
  p.scenario = "unit";
  p.cfg = test::cfg4(mode);
  p.delays = DelayModel::uniform(4, from_ms(50));
  p.rounds = 12;
  p.seed = 3;
  p.payload_bytes = 128;
  return p;
}

std::vector<TraceRecord> of_kind(const Trace& t, RecordKind k) {
  std::vector<TraceRecord> v;
  std::copy_if(t.records.begin(), t.records.end(), std::back_inserter(v), [&](const TraceRecord& r) { return r.kind == k; });
  return v;
}

}  // namespace

TEST_CASE("runs are a pure function of their parameters") {
  auto p = base();
  p.delays.jitter = {0, from_ms(30)};
  const auto a = run(p);
  const auto b = run(p);
  CHECK(trace_digest(a.trace) == trace_digest(b.trace));
  CHECK(a.trace.records == b.trace.records);
  p.seed = 4;
  CHECK(trace_digest(run(p).trace) != trace_digest(a.trace));
}

TEST_CASE("good case: leader finalizes after one round trip") {
  for (auto mode : {Mode::Banyan, Mode::Icc}) {
    const auto r = run(base(mode));
    CHECK_FALSE(r.stats.hit_time_cap);
    CHECK(all_pass(check_all(r.trace)));
    const auto m = compute_metrics(r.trace);
    CHECK(m.rounds_finalized == 12);
    // 2 x 50ms fast path, 3 x 50ms slow path.
    CHECK(m.max_latency_ms == doctest::Approx(mode == Mode::Banyan ? 100 : 150));
    CHECK(m.fast_hit_rate == doctest::Approx(mode == Mode::Banyan ? 1.0 : 0.0));
  }
}

TEST_CASE("broadcast reaches the other n-1 replicas") {
  const auto r = run(base());
  std::size_t block_deliveries = 0;
  for (const auto& d : of_kind(r.trace, RecordKind::Deliver)) {
    if (d.round == 1 && d.msg_type == MsgType::Block && d.from == 1) ++block_deliveries;
  }
  CHECK(block_deliveries == 3);
}

TEST_CASE("crashed leader: the rank-1 block is finalized") {
  auto p = base();
  p.faults.assign(4, FaultSpec{});
  p.faults[1] = FaultSpec{Behavior::Crash, 0, {}};  // leads rounds 1, 5, 9
  const auto r = run(p);
  CHECK(all_pass(check_all(r.trace)));
  for (const auto& prop : of_kind(r.trace, RecordKind::Propose)) CHECK(prop.from != 1);
  bool seen = false;
  for (const auto& prop : of_kind(r.trace, RecordKind::Propose)) {
    if (prop.round != 5) continue;
    CHECK(prop.from == 2);
    CHECK(prop.rank == 1);
    seen = true;
    for (const auto& f : of_kind(r.trace, RecordKind::Finalized)) {
      if (f.round == 5) CHECK(f.block_hash == prop.block_hash);
    }
  }
  CHECK(seen);
}

TEST_CASE("crash mid-run stops all activity of that replica") {
  auto p = base();
  p.faults.assign(4, FaultSpec{});
  p.faults[0] = FaultSpec{Behavior::Crash, from_ms(500), {}};
  const auto r = run(p);
  for (const auto& rec : r.trace.records) {
    if (rec.kind != RecordKind::Deliver && rec.kind != RecordKind::Drop && rec.from == 0) CHECK(rec.time < from_ms(500));
  }
  CHECK(all_pass(check_all(r.trace)));
}

TEST_CASE("delay model must respect the bound") {
  auto p = base();
  CHECK(check_delay_model(p.delays, p.cfg).empty());
  p.delays.jitter = {0, from_ms(60)};
  CHECK_FALSE(check_delay_model(p.delays, p.cfg).empty());
  CHECK_THROWS(run(p));
  p.delays = DelayModel::uniform(3, from_ms(50));
  CHECK_FALSE(check_delay_model(p.delays, p.cfg).empty());
}

TEST_CASE("invalid config is rejected before running") {
  auto p = base();
  p.cfg.n = 6;
  p.cfg.f = 2;
  p.delays = DelayModel::uniform(6, from_ms(50));
  CHECK_THROWS(run(p));
}

TEST_CASE("asynchrony window delays but does not break the run") {
  auto p = base();
  p.rounds = 20;
  p.delays.async_windows.push_back({from_ms(300), from_ms(900)});
  const auto r = run(p);
  CHECK(all_pass(check_all(r.trace)));
  std::map<std::uint64_t, SimTime> sent;
  for (const auto& x : of_kind(r.trace, RecordKind::Send)) sent.emplace(x.msg_id, x.time);
  SimTime slowest = 0;
  for (const auto& d : of_kind(r.trace, RecordKind::Deliver)) slowest = std::max(slowest, d.time - sent.at(d.msg_id));
  CHECK(slowest > p.cfg.delta_bound);
}

TEST_CASE("behaviour names round-trip") {
  for (auto b : {Behavior::Honest, Behavior::Crash, Behavior::MuteLeader, Behavior::EquivocatingLeader,
                 Behavior::PromiscuousFastVoter, Behavior::WithholdVotes}) {
    CHECK(parse_behavior(to_string(b)) == b);
  }
  CHECK_THROWS_AS(parse_behavior("sneaky"), std::invalid_argument);
}
