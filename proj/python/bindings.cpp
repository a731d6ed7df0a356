#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>

#include "banyan/harness.hpp"

namespace py = pybind11;
using namespace banyan;
using nlohmann::json;

namespace {

py::object to_py(const json& j) {
  switch (j.type()) {
    case json::value_t::null: return py::none();
    case json::value_t::boolean: return py::bool_(j.get<bool>());
    case json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
    case json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
    case json::value_t::number_float: return py::float_(j.get<double>());
    case json::value_t::string: return py::str(j.get<std::string>());
    case json::value_t::array: {
      py::list l;
      for (const auto& e : j) l.append(to_py(e));
      return l;
    }
    case json::value_t::object: {
      py::dict d;
      for (const auto& [k, v] : j.items()) d[py::str(k)] = to_py(v);
      return d;
    }
    default: return py::none();
  }
}

Scenario parse_text(const std::string& text, const std::optional<std::string>& mode) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ScenarioError("scenario: not valid JSON");
  Scenario sc = parse_scenario(j);
  if (mode) {
    if (*mode != "banyan" && *mode != "icc") throw ScenarioError("mode: expected banyan or icc");
    sc.cfg.mode = *mode == "icc" ? Mode::Icc : Mode::Banyan;
  }
  return sc;
}

py::dict run_text(const std::string& text, std::optional<std::uint64_t> seed, const std::optional<std::string>& mode,
                  const std::optional<std::string>& out) {
  const Scenario sc = parse_text(text, mode);
  RunOutcome o;
  {
    py::gil_scoped_release release;
    o = run_scenario(sc, seed.value_or(sc.seeds.front()));
  }
  if (out) write_run_outputs(o, *out);
  py::dict d = to_py(run_report_json(o));
  py::list samples;
  for (const auto& s : o.metrics.samples) {
    py::dict e;
    e["round"] = s.round;
    e["proposer"] = s.proposer;
    e["propose_ms"] = to_ms(s.propose_time);
    e["finalize_ms"] = to_ms(s.finalize_time);
    e["path"] = to_string(s.path);
    e["bytes"] = s.bytes;
    samples.append(e);
  }
  d["samples"] = samples;
  return d;
}

py::dict sweep_text(const std::string& text, const std::optional<std::string>& seeds, unsigned parallel, bool compare,
                    const std::optional<std::string>& mode) {
  const Scenario sc = parse_text(text, mode);
  SweepOptions opts{seeds ? parse_seed_range(*seeds) : sc.seeds, std::max(1u, parallel), compare};
  SweepResult r;
  {
    py::gil_scoped_release release;
    r = sweep(sc, opts);
  }
  py::dict d = to_py(r.summary);
  d["summary_digest"] = r.summary_digest.hex();
  d["pass"] = r.pass();
  py::list runs;
  for (const auto& s : r.runs) {
    py::dict e;
    e["seed"] = s.seed;
    e["mode"] = to_string(s.mode);
    e["digest"] = s.digest.hex();
    e["pass"] = all_pass(s.reports);
    runs.append(e);
  }
  d["runs"] = runs;
  return d;
}

py::dict replay(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  const Trace t = read_trace_jsonl(in);
  py::dict d;
  d["digest"] = trace_digest(t).hex();
  py::list checks;
  for (const auto& r : check_all(t)) checks.append(to_py(to_json(r)));
  d["checks"] = checks;
  d["metrics"] = to_py(to_json(compute_metrics(t)));
  return d;
}

py::dict config_info(std::uint32_t n, std::uint32_t f, std::uint32_t p) {
  ProtocolConfig cfg;
  cfg.n = n, cfg.f = f, cfg.p = p;
  const auto check = validate_config(cfg);
  py::dict d;
  d["ok"] = check.ok;
  d["reason"] = check.reason;
  d["warnings"] = check.warnings;
  d["notarization_quorum"] = notarization_quorum(cfg);
  d["fast_quorum"] = n >= p ? fast_quorum(cfg) : 0;
  d["unlock_threshold"] = f + p;
  return d;
}

}  // namespace

PYBIND11_MODULE(_banyan, m) {
  m.doc() = "Banyan / ICC simulator bindings";
  py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_ValueError);
  m.def("run_text", &run_text, py::arg("scenario"), py::arg("seed") = py::none(), py::arg("mode") = py::none(),
        py::arg("out") = py::none());
  m.def("sweep_text", &sweep_text, py::arg("scenario"), py::arg("seeds") = py::none(), py::arg("parallel") = 1,
        py::arg("compare") = false, py::arg("mode") = py::none());
  m.def("replay", &replay, py::arg("trace"));
  m.def("config_info", &config_info, py::arg("n"), py::arg("f"), py::arg("p"));
}
