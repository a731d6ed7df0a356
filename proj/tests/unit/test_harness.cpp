#include "banyan/harness.hpp"
#include "doctest.h"

using namespace banyan;
using nlohmann::json;

namespace {

json minimal() {
  return json::parse(R"({
    "schema_version": 1,
    "name": "unit",
    "protocol": {"n": 4, "f": 1, "p": 1, "delta_ms": 100},
    "delays": {"uniform_ms": 40, "jitter_ms": {"lo": 0, "hi": 20}},
    "rounds": 8,
    "seeds": {"from": 1, "to": 6}
  })");
}

std::string error_of(const json& j) {
  try {
    parse_scenario(j);
  } catch (const ScenarioError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal scenario parses with defaults") {
  const auto sc = parse_scenario(minimal());
  CHECK(sc.cfg.mode == Mode::Banyan);
  CHECK(sc.seeds.size() == 6);
  CHECK(sc.faults.size() == 4);
  CHECK(sc.fault_count() == 0);
  CHECK(sc.mutation == Mutation::None);
}

TEST_CASE("errors name the offending field") {
  auto j = minimal();
  j["protocol"]["n"] = 6;
  j["protocol"]["f"] = 2;
  CHECK(error_of(j).rfind("protocol: n >= 3f+1 violated", 0) == 0);

  j = minimal();
  j["protocol"]["speed"] = 1;
  CHECK(error_of(j) == "protocol.speed: unknown field");

  j = minimal();
  j["color"] = "red";
  CHECK(error_of(j) == "color: unknown field");

  j = minimal();
  j["faults"] = json::parse(R"([{"replica": 1, "behavior": "crash", "kinds": ["fast"]}])");
  CHECK(error_of(j).rfind("faults[0].kinds", 0) == 0);

  j = minimal();
  j["faults"] = json::parse(R"([{"replica": 9, "behavior": "crash"}])");
  CHECK(error_of(j).rfind("faults[0].replica", 0) == 0);

  j = minimal();
  j["faults"] = json::parse(R"([{"replica": 1, "behavior": "crash"}, {"replica": 2, "behavior": "mute_leader"}])");
  CHECK(error_of(j).rfind("faults:", 0) == 0);
  j["allow_excess_faults"] = true;
  CHECK(error_of(j).empty());

  j = minimal();
  j["schema_version"] = 2;
  CHECK(error_of(j).rfind("schema_version", 0) == 0);

  j = minimal();
  j["delays"]["uniform_ms"] = 150;
  CHECK_FALSE(error_of(j).empty());

  j = minimal();
  j["engine_mutation"] = "typo";
  CHECK(error_of(j).rfind("engine_mutation", 0) == 0);

  j = minimal();
  j["rounds"] = -1;
  CHECK(error_of(j).rfind("rounds", 0) == 0);
}

TEST_CASE("seed ranges") {
  CHECK(parse_seed_range("3..5") == std::vector<std::uint64_t>{3, 4, 5});
  CHECK(parse_seed_range("7") == std::vector<std::uint64_t>{7});
  CHECK_THROWS(parse_seed_range("5..3"));
  CHECK_THROWS(parse_seed_range("a..b"));
  CHECK_THROWS(parse_seed_range(""));
}

TEST_CASE("sweep digests do not depend on parallelism") {
  const auto sc = parse_scenario(minimal());
  SweepOptions one{sc.seeds, 1, true};
  SweepOptions many{sc.seeds, 4, true};
  const auto a = sweep(sc, one);
  const auto b = sweep(sc, many);
  CHECK(a.pass());
  CHECK(a.summary_digest == b.summary_digest);
  REQUIRE(a.runs.size() == 12);
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    CHECK(a.runs[i].seed == b.runs[i].seed);
    CHECK(a.runs[i].digest == b.runs[i].digest);
  }
  CHECK(a.runs[0].mode == Mode::Banyan);
  CHECK(a.runs[1].mode == Mode::Icc);
  CHECK(paired_rounds(a).size() == 6 * 8);
}

TEST_CASE("run outcome matches a direct simulation") {
  const auto sc = parse_scenario(minimal());
  const auto o = run_scenario(sc, 2);
  CHECK(o.digest == trace_digest(run(run_params(sc, 2)).trace));
  CHECK(o.pass());
  const auto report = run_report_json(o);
  CHECK(report.contains("checks"));
}
