#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "banyan/harness.hpp"

namespace fs = std::filesystem;
using namespace banyan;

namespace {

constexpr int kPass = 0;
constexpr int kViolation = 1;
constexpr int kError = 2;

void print_reports(const std::vector<CheckReport>& reports) {
  for (const auto& r : reports) {
    std::cout << (r.pass ? "  pass      " : "  VIOLATED  ") << r.property << ": " << r.detail << '\n';
  }
}

Scenario load(const std::string& file, const std::string& mode) {
  Scenario sc = load_scenario(file);
  if (mode == "icc") sc.cfg.mode = Mode::Icc;
  if (mode == "banyan") sc.cfg.mode = Mode::Banyan;
  for (const auto& w : sc.warnings) std::cerr << "warning: " << w << '\n';
  return sc;
}

fs::path out_dir(const Scenario& sc, const std::string& flag, const std::string& leaf) {
  if (!flag.empty()) return flag;
  if (!sc.output_dir.empty()) return fs::path(sc.output_dir) / leaf;
  return fs::path("out") / sc.name / leaf;
}

int cmd_run(const std::string& file, std::optional<std::uint64_t> seed, const std::string& out, const std::string& mode) {
  const Scenario sc = load(file, mode);
  const std::uint64_t s = seed.value_or(sc.seeds.front());
  const RunOutcome o = run_scenario(sc, s);
  const fs::path dir = out_dir(sc, out, std::string(to_string(sc.cfg.mode)) + "-seed" + std::to_string(s));
  write_run_outputs(o, dir);

  const auto& m = o.metrics;
  std::cout << sc.name << " (" << to_string(sc.cfg.mode) << ", seed " << s << ")\n";
  std::cout << "  trace digest " << o.digest.hex() << '\n';
  print_reports(o.reports);
  std::cout << "  latency mean " << m.mean_latency_ms << " ms, p99 " << m.p99_latency_ms << " ms, fast-path hit rate "
            << m.fast_hit_rate << ", throughput " << m.throughput_bytes_per_s << " B/s, block interval "
            << m.block_interval_ms << " ms\n";
  std::cout << "  outputs in " << dir.string() << '\n';
  return o.pass() ? kPass : kViolation;
}

int cmd_sweep(const std::string& file, const std::string& seeds, unsigned parallel, bool compare,
              const std::string& out, const std::string& mode) {
  const Scenario sc = load(file, mode);
  SweepOptions opts;
  opts.seeds = seeds.empty() ? sc.seeds : parse_seed_range(seeds);
  opts.parallel = parallel;
  opts.compare_modes = compare;
  const SweepResult r = sweep(sc, opts);
  const fs::path dir = out_dir(sc, out, "sweep");
  write_sweep_outputs(r, dir);

  std::cout << sc.name << ": " << r.runs.size() << " runs over " << opts.seeds.size() << " seeds\n";
  for (const auto& [mode_name, m] : r.summary["modes"].items()) {
    std::cout << "  " << mode_name << ":";
    for (const auto& [prop, n] : m["passes"].items()) std::cout << ' ' << prop << ' ' << n.get<std::size_t>() << '/' << m["runs"].get<std::size_t>();
    std::cout << '\n';
    for (const auto& v : m["violations"]) {
      std::cout << "    seed " << v["seed"].get<std::uint64_t>() << " " << v["property"].get<std::string>() << ": "
                << v["detail"].get<std::string>() << '\n';
    }
  }
  if (r.summary.contains("paired")) {
    const auto& p = r.summary["paired"];
    std::cout << "  paired rounds " << p["rounds"].get<std::size_t>() << ", banyan strictly faster in "
              << p["banyan_strictly_faster"].get<std::size_t>() << ", not slower in "
              << p["banyan_not_slower"].get<std::size_t>() << '\n';
  }
  std::cout << "  summary digest " << r.summary_digest.hex() << "\n  outputs in " << dir.string() << '\n';
  return r.pass() ? kPass : kViolation;
}

int cmd_replay(const std::string& file, std::string digest) {
  std::ifstream in(file);
  if (!in) {
    std::cerr << "error: cannot open " << file << '\n';
    return kError;
  }
  const Trace trace = read_trace_jsonl(in);
  if (digest.empty()) {
    std::ifstream d(file + ".digest");
    d >> digest;
  }
  const Digest actual = trace_digest(trace);
  bool corrupt = false;
  if (!digest.empty() && actual.hex() != digest) {
    corrupt = true;
    std::cout << "CORRUPT: trace digest " << actual.hex() << " does not match recorded " << digest << '\n';
  } else {
    std::cout << "trace digest " << actual.hex() << (digest.empty() ? " (no recorded digest)" : " verified") << '\n';
  }
  const auto reports = check_all(trace);
  print_reports(reports);
  if (corrupt) return kError;
  return all_pass(reports) ? kPass : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Banyan / ICC consensus simulator"};
  app.require_subcommand(1);

  std::string scenario, out, mode, seeds, trace, digest;
  std::optional<std::uint64_t> seed;
  unsigned parallel = 1;
  bool compare = false;

  auto* run = app.add_subcommand("run", "Run one scenario seed and check the trace");
  run->add_option("--scenario", scenario, "Scenario JSON file")->required();
  run->add_option("--seed", seed, "Seed (default: first scenario seed)");
  run->add_option("--out", out, "Output directory");
  run->add_option("--mode", mode, "Override protocol mode")->check(CLI::IsMember({"banyan", "icc"}));

  auto* sw = app.add_subcommand("sweep", "Run a scenario over a seed range");
  sw->add_option("--scenario", scenario, "Scenario JSON file")->required();
  sw->add_option("--seeds", seeds, "Seed range A..B (default: scenario seeds)");
  sw->add_option("--parallel", parallel, "Worker threads")->check(CLI::Range(1u, 1024u));
  sw->add_flag("--compare", compare, "Run banyan and icc on identical seeds");
  sw->add_option("--out", out, "Output directory");
  sw->add_option("--mode", mode, "Override protocol mode")->check(CLI::IsMember({"banyan", "icc"}));

  auto* rp = app.add_subcommand("replay", "Re-check a stored trace");
  rp->add_option("--trace", trace, "trace.jsonl file")->required();
  rp->add_option("--digest", digest, "Expected digest (default: <trace>.digest)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kError;
  }

  try {
    if (*run) return cmd_run(scenario, seed, out, mode);
    if (*sw) return cmd_sweep(scenario, seeds, parallel, compare, out, mode);
    return cmd_replay(trace, digest);
  } catch (const ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return kError;
}
