// One line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <thread>
#include <unordered_map>

#include "banyan/harness.hpp"
#include "banyan/unlock.hpp"

using namespace banyan;
namespace fs = std::filesystem;

namespace {

fs::path g_dir = BANYAN_SCENARIO_DIR;
unsigned g_parallel = std::max(1u, std::thread::hardware_concurrency());

struct Verdict {
  bool pass = true;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Scenario load(const std::string& name) { return load_scenario(g_dir / (name + ".json")); }

Scenario with_mode(Scenario sc, Mode m) {
  sc.cfg.mode = m;
  return sc;
}

const CheckReport* find_report(const std::vector<CheckReport>& reports, const std::string& name) {
  for (const auto& r : reports) {
    if (r.property == name) return &r;
  }
  return nullptr;
}

// 1 --------------------------------------------------------------------------

Verdict latency_ratio() {
  Verdict v;
  const auto sc = load("good-case-n4");
  const SimTime delta = sc.delays.base[0][1];
  for (auto [mode, factor] : {std::pair{Mode::Banyan, 2}, std::pair{Mode::Icc, 3}}) {
    Stopwatch sw;
    const auto o = run_scenario(with_mode(sc, mode), sc.seeds.front());
    const double secs = sw.seconds();
    std::size_t exact = 0;
    for (const auto& s : o.metrics.samples) exact += s.latency() == factor * delta;
    const bool ok = o.pass() && o.metrics.samples.size() == sc.rounds && exact == sc.rounds && secs < 5.0;
    v.pass &= ok;
    v.detail += fmt("%s %zu/%llu rounds at exactly %d x %.0fms (%.2fs); ", to_string(mode), exact,
                    static_cast<unsigned long long>(sc.rounds), factor, to_ms(delta), secs);
  }

  const auto jitter = load("jitter-n4");
  const auto sw = sweep(jitter, SweepOptions{jitter.seeds, g_parallel, true});
  const auto pairs = paired_rounds(sw);
  std::size_t strict = 0;
  std::size_t not_worse = 0;
  for (const auto& p : pairs) {
    strict += p.banyan_ms < p.icc_ms;
    not_worse += p.banyan_ms <= p.icc_ms;
  }
  const double frac = pairs.empty() ? 0 : static_cast<double>(strict) / static_cast<double>(pairs.size());
  const bool jitter_ok = sw.pass() && !pairs.empty() && not_worse == pairs.size() && frac >= 0.99;
  v.pass &= jitter_ok;
  v.detail += fmt("jitter-n4 paired: banyan < icc in %zu/%zu rounds (%.2f%%), never slower in %zu", strict,
                  pairs.size(), 100 * frac, not_worse);
  return v;
}

// 2 --------------------------------------------------------------------------

struct FastStats {
  std::size_t rounds = 0;
  std::size_t fast = 0;
  std::size_t within = 0;
  std::string first_miss;
};

// Rounds led by an honest replica at rank 0: path must be fast and latency at
// most twice the slowest delivery between the leader and a live replica.
void fast_rounds(const Trace& t, FastStats& st) {
  const auto& h = t.header;
  std::unordered_map<std::uint64_t, SimTime> sent;
  for (const auto& r : t.records) {
    if (r.kind == RecordKind::Send) sent.emplace(r.msg_id, r.time);
  }
  std::map<std::pair<std::uint32_t, Digest>, TraceRecord> fins;
  for (const auto& r : t.records) {
    if (r.kind == RecordKind::Finalized) fins.try_emplace({r.from, r.block_hash}, r);
  }
  for (const auto& prop : t.records) {
    if (prop.kind != RecordKind::Propose || prop.rank != 0 || !h.is_honest(prop.from) || prop.round > h.rounds) continue;
    ++st.rounds;
    auto it = fins.find({prop.from, prop.block_hash});
    if (it == fins.end()) {
      if (st.first_miss.empty()) st.first_miss = fmt("seed %llu round %llu never finalized", (unsigned long long)h.seed, (unsigned long long)prop.round);
      continue;
    }
    const auto& fin = it->second;
    st.fast += fin.path == PathTag::Fast;
    SimTime dmax = 0;
    for (const auto& d : t.records) {
      if (d.kind != RecordKind::Deliver || d.time > fin.time) continue;
      if (d.from != prop.from && d.to != prop.from) continue;
      auto s = sent.find(d.msg_id);
      if (s == sent.end() || s->second < prop.time) continue;
      dmax = std::max(dmax, d.time - s->second);
    }
    const bool ok = fin.path == PathTag::Fast && fin.time - prop.time <= 2 * dmax;
    st.within += ok;
    if (!ok && st.first_miss.empty()) {
      st.first_miss = fmt("seed %llu round %llu: %s in %.1fms vs 2 x %.1fms", (unsigned long long)h.seed,
                          (unsigned long long)prop.round, to_string(fin.path), to_ms(fin.time - prop.time), to_ms(dmax));
    }
  }
}

Verdict fast_termination() {
  Verdict v;
  const auto sc = load("crash-n4");
  Stopwatch sw;
  FastStats st;
  const std::size_t seeds = std::min<std::size_t>(sc.seeds.size(), 100);
  for (std::size_t i = 0; i < seeds; ++i) fast_rounds(run_scenario(sc, sc.seeds[i]).result.trace, st);
  const double secs = sw.seconds();
  v.pass = st.rounds > 0 && st.within == st.rounds && secs < 5.0;
  v.detail = fmt("crash-n4, %zu seeds: %zu/%zu honest-leader rounds fast-finalized within one round trip (%zu fast) in %.2fs",
                 seeds, st.within, st.rounds, st.fast, secs);
  if (!st.first_miss.empty()) v.detail += "; first miss: " + st.first_miss;
  return v;
}

// 3 and 4 --------------------------------------------------------------------

const std::vector<std::string> kAdversarial = {"equivocate-n4", "promiscuous-n4", "withhold-n4", "crash-n4",
                                               "crash-mid-n4",  "async-n4",       "equivocate-n7", "promiscuous-n7"};
const std::vector<std::string> kLiveness = {"mute-n4", "mute-all-n4"};

std::map<std::string, SweepResult> g_sweeps;

const SweepResult& sweep_of(const std::string& name) {
  auto it = g_sweeps.find(name);
  if (it == g_sweeps.end()) {
    const auto sc = load(name);
    it = g_sweeps.emplace(name, sweep(sc, SweepOptions{sc.seeds, g_parallel, false})).first;
  }
  return it->second;
}

Verdict adversarial_safety() {
  Verdict v;
  Stopwatch sw;
  std::size_t total = 0;
  std::size_t bad = 0;
  std::string first;
  for (const auto& name : kAdversarial) {
    const auto sc = load(name);
    const bool within_f = sc.fault_count() <= sc.cfg.f;
    const auto& res = sweep_of(name);
    std::size_t violations = 0;
    for (const auto& run : res.runs) {
      for (const char* prop : {"safety", "lemma_sp", "lemma_fp"}) {
        const auto* r = find_report(run.reports, prop);
        if (r == nullptr || !r->pass) {
          ++violations;
          if (first.empty()) first = fmt("%s seed %llu: %s", name.c_str(), (unsigned long long)run.seed, r ? r->detail.c_str() : prop);
        }
      }
    }
    v.pass &= within_f && violations == 0 && res.runs.size() >= 1000;
    total += res.runs.size();
    bad += violations;
    v.detail += fmt("%s %zu/%zu; ", name.c_str(), res.runs.size() - std::min(violations, res.runs.size()), res.runs.size());
  }
  const double secs = sw.seconds();
  v.pass &= secs < 600;
  v.detail += fmt("%zu runs, %zu violations, %.1fs", total, bad, secs);
  if (!first.empty()) v.detail += "; first: " + first;
  return v;
}

Verdict deadlock_freeness() {
  Verdict v;
  std::size_t total = 0;
  std::size_t bad = 0;
  std::string first;
  auto all = kAdversarial;
  all.insert(all.end(), kLiveness.begin(), kLiveness.end());
  for (const auto& name : all) {
    const auto& res = sweep_of(name);
    for (const auto& run : res.runs) {
      ++total;
      const auto* g = find_report(run.reports, "growth");
      if (g == nullptr || !g->pass || run.hit_time_cap) {
        ++bad;
        if (first.empty()) first = fmt("%s seed %llu: %s", name.c_str(), (unsigned long long)run.seed, g ? g->detail.c_str() : "no report");
      }
    }
  }
  v.pass = bad == 0 && total > 0;
  v.detail = fmt("%zu/%zu runs reached the horizon at every correct replica (incl. %s, %s)", total - bad, total,
                 kLiveness[0].c_str(), kLiveness[1].c_str());
  if (!first.empty()) v.detail += "; first: " + first;
  return v;
}

// 5 --------------------------------------------------------------------------

Verdict crash_parity() {
  Verdict v;
  const auto sc = load("crash-n19-us");
  const auto res = sweep(sc, SweepOptions{sc.seeds, g_parallel, true});
  double worst_tp = 0;
  double worst_bi = 0;
  for (std::size_t i = 0; i + 1 < res.runs.size(); i += 2) {
    const auto& b = res.runs[i].metrics;
    const auto& c = res.runs[i + 1].metrics;
    worst_tp = std::max(worst_tp, std::abs(b.throughput_bytes_per_s - c.throughput_bytes_per_s) / c.throughput_bytes_per_s);
    worst_bi = std::max(worst_bi, std::abs(b.block_interval_ms - c.block_interval_ms) / c.block_interval_ms);
  }
  v.pass = res.pass() && !res.runs.empty() && worst_tp <= 0.01 && worst_bi <= 0.01;
  v.detail = fmt("crash-n19-us, %zu seeds: max throughput gap %.3f%%, max block-interval gap %.3f%%", res.runs.size() / 2,
                 100 * worst_tp, 100 * worst_bi);
  return v;
}

// 6 --------------------------------------------------------------------------

std::vector<std::uint32_t> subsets_of_size(std::uint32_t n, std::uint32_t k) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t m = 0; m < (1u << n); ++m) {
    if (static_cast<std::uint32_t>(std::popcount(m)) == k) out.push_back(m);
  }
  return out;
}

Verdict quorum_oracle() {
  Verdict v;
  Stopwatch sw;
  std::size_t configs = 0;
  std::uint64_t pairs = 0;
  std::uint64_t vote_cases = 0;
  std::string first;
  for (std::uint32_t n = 1; n <= 12; ++n) {
    for (std::uint32_t f = 0; 3 * f + 1 <= n; ++f) {
      bool any_p = false;
      for (std::uint32_t p = 0; p <= f; ++p) {
        ProtocolConfig cfg;
        cfg.n = n, cfg.f = f, cfg.p = p;
        if (!validate_config(cfg).ok) continue;
        any_p = true;
        ++configs;

        // Fast-vote counting: t Byzantine voters may vote for everything,
        // honest voters cast at most one fast vote.
        for (std::uint32_t t = 0; t <= f; ++t) {
          for (std::uint32_t a = 0; a <= n - t; ++a) {
            for (std::uint32_t c = 0; a + c <= n - t; ++c) {
              ++vote_cases;
              if (a + t >= n - p && c + t > f + p && first.empty()) {
                first = fmt("n=%u f=%u p=%u: %u+%u fast votes for b and %u+%u for siblings", n, f, p, a, t, c, t);
              }
            }
          }
        }

        // The same through the unlock rule, replica by replica (small n):
        // with b fast-finalized, no sibling can satisfy either condition.
        if (n <= 8) {
          const auto th = default_thresholds(cfg);
          for (std::uint32_t t = 0; t <= f; ++t) {
            const std::uint32_t honest = n - t;
            std::uint32_t combos = 1;
            for (std::uint32_t i = 0; i < honest; ++i) combos *= 3;
            for (std::uint32_t code = 0; code < combos; ++code) {
              BlockSupport b{Digest{}, 0, {}};
              b.hash.bytes[0] = 1;
              BlockSupport sib{Digest{}, 0, {}};
              sib.hash.bytes[0] = 2;
              BlockSupport low{Digest{}, 1, {}};
              low.hash.bytes[0] = 3;
              std::uint32_t x = code;
              for (std::uint32_t r = 0; r < honest; ++r, x /= 3) {
                if (x % 3 == 1) b.supporters.push_back(replica(r));
                if (x % 3 == 2) (r % 2 ? sib : low).supporters.push_back(replica(r));
              }
              for (std::uint32_t r = honest; r < n; ++r) {
                b.supporters.push_back(replica(r));
                sib.supporters.push_back(replica(r));
                low.supporters.push_back(replica(r));
              }
              if (b.supporters.size() < n - p) continue;
              ++vote_cases;
              const std::vector<BlockSupport> blocks{b, sib, low};
              const auto e = evaluate_unlock(blocks, n, th.unlock);
              const bool sibling_unlocked = e.round_wide || std::any_of(e.unlocked.begin(), e.unlocked.end(),
                                                                        [&](const Digest& d) { return d != b.hash; });
              if (sibling_unlocked && first.empty()) {
                first = fmt("n=%u f=%u p=%u: unlock rule admits a sibling of a fast-finalized block", n, f, p);
              }
            }
          }
        }
      }
      if (!any_p) continue;

      // Notarization quorums intersect in f+1 replicas.
      ProtocolConfig cfg;
      cfg.n = n, cfg.f = f;
      const auto q = notarization_quorum(cfg);
      const auto sets = subsets_of_size(n, q);
      std::uint32_t min_overlap = n;
      for (auto a : sets) {
        for (auto b : sets) {
          ++pairs;
          min_overlap = std::min(min_overlap, static_cast<std::uint32_t>(std::popcount(a & b)));
        }
      }
      if (min_overlap < f + 1 && first.empty()) {
        first = fmt("n=%u f=%u: two %u-quorums overlap in %u", n, f, q, min_overlap);
      }
    }
  }
  const double secs = sw.seconds();
  v.pass = first.empty() && secs < 60;
  v.detail = fmt("%zu valid configs n<=12: %llu quorum pairs, %llu fast-vote cases, %.2fs", configs,
                 (unsigned long long)pairs, (unsigned long long)vote_cases, secs);
  if (!first.empty()) v.detail += "; counterexample: " + first;
  return v;
}

// 7 --------------------------------------------------------------------------

Verdict mutation_sensitivity() {
  Verdict v;
  for (const char* name : {"mutation-quorum-n7", "mutation-unlock-n4", "mutation-double-fast-n4"}) {
    const auto sc = load(name);
    std::vector<std::uint64_t> seeds = sc.seeds;
    if (seeds.size() > 200) seeds.resize(200);
    const auto res = sweep(sc, SweepOptions{seeds, g_parallel, false});
    std::map<std::string, std::size_t> by_checker;
    std::size_t failing = 0;
    for (const auto& run : res.runs) {
      bool any = false;
      for (const auto& r : run.reports) {
        if (!r.pass) {
          ++by_checker[r.property];
          any = true;
        }
      }
      failing += any;
    }
    v.pass &= failing > 0;
    v.detail += fmt("%s (%s) %zu/%zu seeds caught", name, to_string(sc.mutation), failing, res.runs.size());
    for (const auto& [prop, count] : by_checker) v.detail += fmt(" %s:%zu", prop.c_str(), count);
    v.detail += "; ";
  }
  v.detail.resize(v.detail.size() - 2);
  return v;
}

// 8 --------------------------------------------------------------------------

Verdict determinism() {
  Verdict v;
  std::size_t runs = 0;
  for (const char* name : {"good-case-n4", "equivocate-n4", "async-n4", "wan-n19-global"}) {
    const auto sc = load(name);
    const auto a = run_scenario(sc, 42);
    const auto b = run_scenario(sc, 42);
    ++runs;
    if (a.digest != b.digest) {
      v.pass = false;
      v.detail += fmt("%s rerun digest differs; ", name);
    }
  }
  const auto sc = load("jitter-n4");
  std::vector<std::uint64_t> seeds(sc.seeds.begin(), sc.seeds.end());
  const auto one = sweep(sc, SweepOptions{seeds, 1, true});
  const auto eight = sweep(sc, SweepOptions{seeds, 8, true});
  bool same_runs = one.runs.size() == eight.runs.size();
  for (std::size_t i = 0; same_runs && i < one.runs.size(); ++i) same_runs = one.runs[i].digest == eight.runs[i].digest;
  v.pass &= same_runs && one.summary_digest == eight.summary_digest;
  v.detail += fmt("%zu scenarios rerun with equal digests; jitter-n4 sweep parallel 1 vs 8: summary %s %s %s",
                  runs, one.summary_digest.short_hex().c_str(), one.summary_digest == eight.summary_digest ? "==" : "!=",
                  eight.summary_digest.short_hex().c_str());
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_dir = argv[1];
  const std::vector<std::pair<const char*, Verdict (*)()>> criteria = {
      {"fast-path latency ratio", latency_ratio},
      {"fast termination with p unresponsive", fast_termination},
      {"safety under adversarial sweeps", adversarial_safety},
      {"deadlock freeness", deadlock_freeness},
      {"crash-fault parity with icc", crash_parity},
      {"quorum intersection oracle", quorum_oracle},
      {"mutation sensitivity", mutation_sensitivity},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("criterion %zu %s: %s (%s)\n", i + 1, v.pass ? "PASS" : "FAIL", criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
