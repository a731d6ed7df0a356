#include "banyan/harness.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace banyan {

using nlohmann::json;

std::uint32_t Scenario::fault_count() const {
  return static_cast<std::uint32_t>(
      std::count_if(faults.begin(), faults.end(), [](const FaultSpec& f) { return f.behavior != Behavior::Honest; }));
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ScenarioError(path + ": " + what); }

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void expect_object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      fail(join(path, key), "unknown field");
    }
  }
}

template <class T>
T get(const json& obj, const std::string& path, const char* key, T fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    fail(join(path, key), "wrong type");
  }
}

template <class T>
T require(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) fail(join(path, key), "missing");
  return get<T>(obj, path, key, T{});
}

std::uint64_t non_negative(const json& obj, const std::string& path, const char* key, std::uint64_t fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_integer() || it->get<std::int64_t>() < 0) fail(join(path, key), "expected a non-negative integer");
  return it->get<std::uint64_t>();
}

SimTime ms_field(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected milliseconds");
  const double ms = v.get<double>();
  if (ms < 0) fail(path, "must be >= 0");
  return from_ms(ms);
}

VoteKind parse_vote_kind(const std::string& s, const std::string& path) {
  for (auto k : {VoteKind::Notarization, VoteKind::Fast, VoteKind::Finalization}) {
    if (s == to_string(k)) return k;
  }
  fail(path, "unknown vote kind '" + s + "'");
}

Mutation parse_mutation(const std::string& s, const std::string& path) {
  for (auto m : {Mutation::None, Mutation::QuorumMinusOne, Mutation::UnlockAtThreshold, Mutation::DoubleFastVote}) {
    if (s == to_string(m)) return m;
  }
  fail(path, "unknown mutation '" + s + "'");
}

std::vector<std::vector<SimTime>> parse_matrix(const json& j, const std::string& path, std::size_t size) {
  if (!j.is_array() || j.size() != size) fail(path, "expected a " + std::to_string(size) + "x" + std::to_string(size) + " matrix");
  std::vector<std::vector<SimTime>> m(size);
  for (std::size_t i = 0; i < size; ++i) {
    const auto row_path = path + "[" + std::to_string(i) + "]";
    if (!j[i].is_array() || j[i].size() != size) fail(row_path, "expected " + std::to_string(size) + " entries");
    for (std::size_t k = 0; k < size; ++k) m[i].push_back(ms_field(j[i][k], row_path + "[" + std::to_string(k) + "]"));
  }
  return m;
}

ProtocolConfig parse_protocol(const json& j) {
  const std::string path = "protocol";
  expect_object(j, path, {"n", "f", "p", "delta_ms", "mode", "rotation", "rotation_seed"});
  ProtocolConfig cfg;
  cfg.n = static_cast<std::uint32_t>(non_negative(j, path, "n", 0));
  cfg.f = static_cast<std::uint32_t>(non_negative(j, path, "f", 0));
  cfg.p = static_cast<std::uint32_t>(non_negative(j, path, "p", 0));
  if (!j.contains("n")) fail("protocol.n", "missing");
  if (!j.contains("delta_ms")) fail("protocol.delta_ms", "missing");
  cfg.delta_bound = ms_field(j["delta_ms"], "protocol.delta_ms");
  const auto mode = get<std::string>(j, path, "mode", "banyan");
  if (mode != "banyan" && mode != "icc") fail("protocol.mode", "expected banyan or icc");
  cfg.mode = mode == "icc" ? Mode::Icc : Mode::Banyan;
  const auto rotation = get<std::string>(j, path, "rotation", "round_robin");
  if (rotation != "round_robin" && rotation != "seeded_permutation") {
    fail("protocol.rotation", "expected round_robin or seeded_permutation");
  }
  cfg.rotation.kind = rotation == "round_robin" ? RotationKind::RoundRobin : RotationKind::SeededPermutation;
  cfg.rotation.seed = non_negative(j, path, "rotation_seed", 0);
  return cfg;
}

DelayModel parse_delays(const json& j, std::uint32_t n) {
  const std::string path = "delays";
  expect_object(j, path, {"uniform_ms", "matrix_ms", "sites", "jitter_ms", "async_windows_ms"});
  const int forms = static_cast<int>(j.contains("uniform_ms")) + static_cast<int>(j.contains("matrix_ms")) +
                    static_cast<int>(j.contains("sites"));
  if (forms != 1) fail(path, "exactly one of uniform_ms, matrix_ms, sites is required");

  DelayModel m;
  if (j.contains("uniform_ms")) {
    m = DelayModel::uniform(n, ms_field(j["uniform_ms"], "delays.uniform_ms"));
  } else if (j.contains("matrix_ms")) {
    m.base = parse_matrix(j["matrix_ms"], "delays.matrix_ms", n);
  } else {
    const auto& s = j["sites"];
    expect_object(s, "delays.sites", {"names", "matrix_ms", "assignment"});
    const auto names = require<std::vector<std::string>>(s, "delays.sites", "names");
    const auto site = parse_matrix(s.value("matrix_ms", json()), "delays.sites.matrix_ms", names.size());
    const auto assignment = require<std::vector<std::uint32_t>>(s, "delays.sites", "assignment");
    if (assignment.size() != n) fail("delays.sites.assignment", "expected one site per replica");
    for (auto a : assignment) {
      if (a >= names.size()) fail("delays.sites.assignment", "site index out of range");
    }
    m.base.assign(n, std::vector<SimTime>(n, 0));
    for (std::uint32_t a = 0; a < n; ++a) {
      for (std::uint32_t b = 0; b < n; ++b) m.base[a][b] = a == b ? 0 : site[assignment[a]][assignment[b]];
    }
  }
  if (j.contains("jitter_ms")) {
    const auto& jt = j["jitter_ms"];
    expect_object(jt, "delays.jitter_ms", {"lo", "hi"});
    m.jitter.lo = ms_field(jt.value("lo", json(0)), "delays.jitter_ms.lo");
    m.jitter.hi = ms_field(jt.value("hi", json(0)), "delays.jitter_ms.hi");
  }
  if (j.contains("async_windows_ms")) {
    const auto& ws = j["async_windows_ms"];
    if (!ws.is_array()) fail("delays.async_windows_ms", "expected a list of [start, end]");
    for (std::size_t i = 0; i < ws.size(); ++i) {
      const auto wp = "delays.async_windows_ms[" + std::to_string(i) + "]";
      if (!ws[i].is_array() || ws[i].size() != 2) fail(wp, "expected [start, end]");
      m.async_windows.push_back({ms_field(ws[i][0], wp), ms_field(ws[i][1], wp)});
    }
  }
  return m;
}

std::vector<FaultSpec> parse_faults(const json& j, std::uint32_t n) {
  std::vector<FaultSpec> faults(n);
  if (!j.is_array()) fail("faults", "expected a list");
  std::set<std::uint32_t> seen;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto path = "faults[" + std::to_string(i) + "]";
    const auto& e = j[i];
    expect_object(e, path, {"replica", "behavior", "at_ms", "kinds"});
    if (!e.contains("replica")) fail(path + ".replica", "missing");
    const auto r = static_cast<std::uint32_t>(non_negative(e, path, "replica", 0));
    if (r >= n) fail(path + ".replica", "out of range");
    if (!seen.insert(r).second) fail(path + ".replica", "duplicate");
    FaultSpec spec;
    try {
      spec.behavior = parse_behavior(require<std::string>(e, path, "behavior"));
    } catch (const std::invalid_argument& ex) {
      fail(path + ".behavior", ex.what());
    }
    if (e.contains("at_ms")) {
      if (spec.behavior != Behavior::Crash) fail(path + ".at_ms", "only valid for crash");
      spec.crash_at = ms_field(e["at_ms"], path + ".at_ms");
    }
    if (e.contains("kinds")) {
      if (spec.behavior != Behavior::WithholdVotes) fail(path + ".kinds", "only valid for withhold_votes");
      for (const auto& k : require<std::vector<std::string>>(e, path, "kinds")) {
        spec.withhold.push_back(parse_vote_kind(k, path + ".kinds"));
      }
    } else if (spec.behavior == Behavior::WithholdVotes) {
      fail(path + ".kinds", "missing");
    }
    faults[r] = spec;
  }
  return faults;
}

}  // namespace

Scenario parse_scenario(const json& j) {
  expect_object(j, "", {"schema_version", "name", "description", "protocol", "delays", "faults",
                        "allow_excess_faults", "payload_bytes", "msg_overhead_bytes", "rounds", "seeds",
                        "engine_mutation", "output_dir"});
  if (!j.contains("schema_version")) fail("schema_version", "missing");
  if (get<int>(j, "", "schema_version", 0) != kScenarioSchemaVersion) {
    fail("schema_version", "unsupported (expected " + std::to_string(kScenarioSchemaVersion) + ")");
  }
  Scenario sc;
  sc.name = require<std::string>(j, "", "name");
  sc.description = get<std::string>(j, "", "description", "");
  if (!j.contains("protocol")) fail("protocol", "missing");
  sc.cfg = parse_protocol(j["protocol"]);
  const auto check = validate_config(sc.cfg);
  if (!check.ok) fail("protocol", check.reason);
  sc.warnings = check.warnings;

  if (!j.contains("delays")) fail("delays", "missing");
  sc.delays = parse_delays(j["delays"], sc.cfg.n);
  if (auto reason = check_delay_model(sc.delays, sc.cfg); !reason.empty()) throw ScenarioError(reason);

  sc.faults = j.contains("faults") ? parse_faults(j["faults"], sc.cfg.n) : std::vector<FaultSpec>(sc.cfg.n);
  sc.allow_excess_faults = get<bool>(j, "", "allow_excess_faults", false);
  if (sc.fault_count() > sc.cfg.f && !sc.allow_excess_faults) {
    fail("faults", std::to_string(sc.fault_count()) + " faulty replicas exceed f=" + std::to_string(sc.cfg.f) +
                       " (set allow_excess_faults to run anyway)");
  }

  sc.payload_bytes = non_negative(j, "", "payload_bytes", 0);
  sc.msg_overhead = non_negative(j, "", "msg_overhead_bytes", 256);
  sc.rounds = non_negative(j, "", "rounds", 10);
  if (sc.rounds == 0) fail("rounds", "must be > 0");

  if (j.contains("seeds")) {
    const auto& s = j["seeds"];
    if (s.is_array()) {
      sc.seeds = get<std::vector<std::uint64_t>>(j, "", "seeds", {});
    } else if (s.is_object()) {
      expect_object(s, "seeds", {"from", "to"});
      const auto from = non_negative(s, "seeds", "from", 1);
      const auto to = non_negative(s, "seeds", "to", from);
      if (to < from) fail("seeds", "to < from");
      sc.seeds.clear();
      for (auto x = from; x <= to; ++x) sc.seeds.push_back(x);
    } else {
      fail("seeds", "expected a list or {from, to}");
    }
    if (sc.seeds.empty()) fail("seeds", "empty");
  }
  sc.mutation = parse_mutation(get<std::string>(j, "", "engine_mutation", "none"), "engine_mutation");
  sc.output_dir = get<std::string>(j, "", "output_dir", "");
  return sc;
}

Scenario load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ScenarioError(file.string() + ": cannot open");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ScenarioError(file.string() + ": not valid JSON");
  return parse_scenario(j);
}

std::vector<std::uint64_t> parse_seed_range(const std::string& s) {
  auto number = [&](const std::string& t) {
    if (t.empty() || !std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      throw std::invalid_argument("bad seed range '" + s + "'");
    }
    return std::stoull(t);
  };
  const auto dots = s.find("..");
  if (dots == std::string::npos) return {number(s)};
  const auto a = number(s.substr(0, dots));
  const auto b = number(s.substr(dots + 2));
  if (b < a) throw std::invalid_argument("bad seed range '" + s + "'");
  std::vector<std::uint64_t> out;
  for (auto x = a; x <= b; ++x) out.push_back(x);
  return out;
}

RunParams run_params(const Scenario& sc, std::uint64_t seed) {
  RunParams p;
  p.scenario = sc.name;
  p.cfg = sc.cfg;
  p.delays = sc.delays;
  p.faults = sc.faults;
  p.rounds = sc.rounds;
  p.seed = seed;
  p.payload_bytes = sc.payload_bytes;
  p.msg_overhead = sc.msg_overhead;
  p.mutation = sc.mutation;
  return p;
}

RunOutcome run_scenario(const Scenario& sc, std::uint64_t seed) {
  RunOutcome out;
  out.result = run(run_params(sc, seed));
  out.digest = trace_digest(out.result.trace);
  out.reports = check_all(out.result.trace);
  out.metrics = compute_metrics(out.result.trace);
  return out;
}

json run_report_json(const RunOutcome& outcome) {
  const auto& h = outcome.result.trace.header;
  json j;
  j["scenario"] = h.scenario;
  j["mode"] = to_string(h.cfg.mode);
  j["seed"] = h.seed;
  j["trace_digest"] = outcome.digest.hex();
  j["events"] = outcome.result.stats.events;
  j["messages"] = outcome.result.stats.messages;
  j["hit_time_cap"] = outcome.result.stats.hit_time_cap;
  j["verdict"] = outcome.pass() ? "pass" : "violated";
  json checks = json::array();
  for (const auto& r : outcome.reports) checks.push_back(to_json(r));
  j["checks"] = checks;
  j["metrics"] = to_json(outcome.metrics);
  return j;
}

void write_run_outputs(const RunOutcome& outcome, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream t(dir / "trace.jsonl");
    write_trace_jsonl(outcome.result.trace, t);
  }
  std::ofstream(dir / "trace.jsonl.digest") << outcome.digest.hex() << '\n';
  std::ofstream(dir / "report.json") << run_report_json(outcome).dump(2) << '\n';
  std::ofstream csv(dir / "metrics.csv");
  write_metrics_csv_header(csv);
  write_metrics_csv_rows(outcome.result.trace, outcome.metrics, csv);
  if (!csv) throw std::runtime_error("cannot write outputs under " + dir.string());
}

bool SweepResult::pass() const {
  return std::all_of(runs.begin(), runs.end(), [](const SeedResult& r) { return all_pass(r.reports); });
}

std::vector<PairedRound> paired_rounds(const SweepResult& result) {
  std::vector<PairedRound> out;
  for (std::size_t i = 0; i + 1 < result.runs.size(); ++i) {
    const auto& a = result.runs[i];
    const auto& b = result.runs[i + 1];
    if (a.mode != Mode::Banyan || b.mode != Mode::Icc || a.seed != b.seed) continue;
    std::map<Round, const LatencySample*> icc;
    for (const auto& s : b.metrics.samples) icc[s.round] = &s;
    for (const auto& s : a.metrics.samples) {
      auto it = icc.find(s.round);
      if (it == icc.end()) continue;
      out.push_back({a.seed, s.round, to_ms(s.latency()), to_ms(it->second->latency())});
    }
  }
  return out;
}

namespace {

json distribution(const std::vector<double>& xs) {
  if (xs.empty()) return json::object();
  double sum = 0;
  for (double x : xs) sum += x;
  return {{"mean", sum / static_cast<double>(xs.size())},
          {"min", *std::min_element(xs.begin(), xs.end())},
          {"max", *std::max_element(xs.begin(), xs.end())}};
}

json summarize(const Scenario& sc, const SweepResult& r, bool compare) {
  json j;
  j["scenario"] = sc.name;
  j["runs"] = r.runs.size();
  std::map<std::string, json> by_mode;
  for (Mode mode : {Mode::Banyan, Mode::Icc}) {
    std::vector<const SeedResult*> runs;
    for (const auto& s : r.runs) {
      if (s.mode == mode) runs.push_back(&s);
    }
    if (runs.empty()) continue;
    json m;
    std::map<std::string, std::size_t> passes;
    json violations = json::array();
    std::vector<double> latency, tput, interval, hit;
    std::size_t capped = 0;
    for (const auto* s : runs) {
      for (const auto& rep : s->reports) {
        passes[rep.property] += rep.pass ? 1 : 0;
        if (!rep.pass) violations.push_back({{"seed", s->seed}, {"property", rep.property}, {"detail", rep.detail}});
      }
      latency.push_back(s->metrics.mean_latency_ms);
      tput.push_back(s->metrics.throughput_bytes_per_s);
      interval.push_back(s->metrics.block_interval_ms);
      hit.push_back(s->metrics.fast_hit_rate);
      capped += s->hit_time_cap ? 1 : 0;
    }
    m["runs"] = runs.size();
    m["passes"] = passes;
    m["violations"] = violations;
    m["hit_time_cap"] = capped;
    m["mean_latency_ms"] = distribution(latency);
    m["throughput_bytes_per_s"] = distribution(tput);
    m["block_interval_ms"] = distribution(interval);
    m["fast_hit_rate"] = distribution(hit);
    by_mode[to_string(mode)] = m;
  }
  j["modes"] = by_mode;
  if (compare) {
    const auto pairs = paired_rounds(r);
    std::size_t strict = 0;
    std::size_t not_worse = 0;
    std::vector<double> deltas;
    for (const auto& p : pairs) {
      strict += p.banyan_ms < p.icc_ms ? 1 : 0;
      not_worse += p.banyan_ms <= p.icc_ms ? 1 : 0;
      deltas.push_back(p.icc_ms - p.banyan_ms);
    }
    j["paired"] = {{"rounds", pairs.size()},
                   {"banyan_strictly_faster", strict},
                   {"banyan_not_slower", not_worse},
                   {"icc_minus_banyan_ms", distribution(deltas)}};
  }
  json digests = json::array();
  for (const auto& s : r.runs) digests.push_back({{"seed", s.seed}, {"mode", to_string(s.mode)}, {"digest", s.digest.hex()}});
  j["trace_digests"] = digests;
  return j;
}

}  // namespace

SweepResult sweep(const Scenario& sc, const SweepOptions& opts) {
  struct Job {
    std::uint64_t seed;
    Mode mode;
  };
  std::vector<Job> jobs;
  for (auto seed : opts.seeds) {
    if (opts.compare_modes) {
      jobs.push_back({seed, Mode::Banyan});
      jobs.push_back({seed, Mode::Icc});
    } else {
      jobs.push_back({seed, sc.cfg.mode});
    }
  }
  SweepResult result;
  result.scenario = sc.name;
  result.runs.resize(jobs.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      Scenario s = sc;
      s.cfg.mode = jobs[i].mode;
      RunOutcome o = run_scenario(s, jobs[i].seed);
      result.runs[i] = SeedResult{jobs[i].seed, jobs[i].mode, o.digest, std::move(o.reports), std::move(o.metrics),
                                  o.result.stats.hit_time_cap};
    }
  };
  const unsigned k = std::max(1u, std::min<unsigned>(opts.parallel, static_cast<unsigned>(jobs.size())));
  std::vector<std::thread> threads;
  for (unsigned t = 1; t < k; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  result.summary = summarize(sc, result, opts.compare_modes);
  const auto text = result.summary.dump();
  result.summary_digest = sha256(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  return result;
}

void write_sweep_outputs(const SweepResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "summary.json") << result.summary.dump(2) << '\n';
  std::ofstream(dir / "summary.digest") << result.summary_digest.hex() << '\n';
  std::ofstream csv(dir / "runs.csv");
  csv << "seed,mode,digest";
  if (!result.runs.empty()) {
    for (const auto& rep : result.runs.front().reports) csv << ',' << rep.property;
  }
  csv << ",mean_latency_ms,throughput_bytes_per_s,block_interval_ms,fast_hit_rate\n";
  for (const auto& r : result.runs) {
    csv << r.seed << ',' << to_string(r.mode) << ',' << r.digest.hex();
    for (const auto& rep : r.reports) csv << ',' << (rep.pass ? "pass" : "violated");
    csv << ',' << r.metrics.mean_latency_ms << ',' << r.metrics.throughput_bytes_per_s << ','
        << r.metrics.block_interval_ms << ',' << r.metrics.fast_hit_rate << '\n';
  }
  const auto pairs = paired_rounds(result);
  if (!pairs.empty()) {
    std::ofstream p(dir / "paired.csv");
    p << "seed,round,banyan_ms,icc_ms,delta_ms\n";
    for (const auto& x : pairs) p << x.seed << ',' << x.round << ',' << x.banyan_ms << ',' << x.icc_ms << ',' << x.icc_ms - x.banyan_ms << '\n';
  }
  if (!csv) throw std::runtime_error("cannot write outputs under " + dir.string());
}

}  // namespace banyan
