// Copyright 2026 The hlosim Authors.
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end orchestration: workload text -> graph -> slices -> estimates ->
// trace -> schedule -> report rows. Also the multi-target sweep.

#pragma once

#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "hlosim/estimators.hpp"
#include "hlosim/graph.hpp"
#include "hlosim/hardware.hpp"
#include "hlosim/log.hpp"
#include "hlosim/metrics.hpp"
#include "hlosim/network.hpp"
#include "hlosim/parser.hpp"
#include "hlosim/report.hpp"
#include "hlosim/slicer.hpp"
#include "hlosim/system.hpp"
#include "hlosim/trace.hpp"

namespace hlosim {

// Failure inside one pipeline stage. what() is "<stage>: <detail>".
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& msg)
      : std::runtime_error(stage + ": " + msg), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

inline std::string_view split_name(SplitAlgorithm a) {
  return a == SplitAlgorithm::kLinear ? "linear" : "dependency";
}

struct RunSpec {
  std::string workload_path;
  std::string system;    // preset name or JSON path
  std::string hardware;  // preset name or JSON path; empty means the system preset's device
  EstimatorSelection estimator;
  SplitAlgorithm split = SplitAlgorithm::kLinear;
  std::string trace_out;
  std::string csv_out;
  std::string svg_out;
  std::string reference_path;
  std::string graph_out;
  int threads = 1;
  bool reproducible = false;  // report sim_wall_ms as 0 so outputs are byte-stable
};

struct Target {
  SystemConfig system;
  HardwareConfig hardware;
};

namespace detail {

inline bool looks_like_path(const std::string& s) {
  return s.find('/') != std::string::npos || s.ends_with(".json");
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline std::string read_text_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(std::string("cannot open ") + what + " '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline HardwareConfig resolve_hardware(const std::string& name) {
  if (auto h = find_hardware_preset(name)) return *h;
  if (looks_like_path(name) || std::filesystem::exists(name)) return hardware_from_json(read_json_file(name));
  throw ConfigError("unknown hardware '" + name + "'");
}

}  // namespace detail

// A system may be a preset name or a JSON file; hardware may be a preset
// name, a JSON file, or omitted when the system preset names its device.
inline Target resolve_target(const std::string& system, const std::string& hardware) {
  Target t;
  std::optional<std::string> preset_hw;
  if (system.empty()) throw ConfigError("no system given");
  if (auto p = find_system_preset(system)) {
    t.system = p->system;
    preset_hw = p->hardware;
  } else if (detail::looks_like_path(system) || std::filesystem::exists(system)) {
    const nlohmann::json j = detail::read_json_file(system);
    t.system = system_from_json(j);
    if (j.contains("hardware") && j.at("hardware").is_string()) preset_hw = j.at("hardware").get<std::string>();
  } else {
    throw ConfigError("unknown system '" + system + "'");
  }
  if (!hardware.empty()) {
    t.hardware = detail::resolve_hardware(hardware);
  } else if (preset_hw) {
    t.hardware = detail::resolve_hardware(*preset_hw);
  } else {
    throw ConfigError("system '" + t.system.name + "' has no device parameters; pass --hardware");
  }
  return t;
}

inline void validate_estimator(const EstimatorSelection& sel) {
  if (sel.kind == EstimatorKind::kTable && sel.table_path.empty()) {
    throw ConfigError("the table estimator needs --table");
  }
  if (sel.kind == EstimatorKind::kRoofline && !sel.table_path.empty()) {
    throw ConfigError("--table given but the estimator is roofline");
  }
  if (sel.kind == EstimatorKind::kRoofline && sel.roofline_fallback) {
    throw ConfigError("--fallback only applies to the table estimator");
  }
  if (sel.runs && *sel.runs < 1) throw ConfigError("--runs must be >= 1");
}

// Estimates every region. The first occurrence of each distinct key is
// computed in parallel; the remaining requests then run in order, so cache
// counters do not depend on the thread count.
inline std::vector<EstimatorResult> estimate_regions(const SlicedWorkload& s, const HardwareConfig& hw,
                                                     const EstimatorSelection& sel, ComputeApi& api,
                                                     int threads) {
  const std::size_t n = s.regions.size();
  std::vector<std::optional<EstimatorResult>> out(n);
  std::vector<std::size_t> firsts;
  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < n; ++i) {
    if (seen.emplace(s.regions[i].canonical_key, i).second) firsts.push_back(i);
  }
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)),
                                                    std::max<std::size_t>(firsts.size(), 1));
  std::vector<std::exception_ptr> errors(firsts.size());
  auto work = [&](std::size_t w) {
    for (std::size_t f = w; f < firsts.size(); f += workers) {
      try {
        out[firsts[f]] = api.get_run_time_estimate(s.regions[firsts[f]], hw, sel);
      } catch (...) {
        errors[f] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<EstimatorResult> results;
  results.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!out[i]) out[i] = api.get_run_time_estimate(s.regions[i], hw, sel);
    results.push_back(*out[i]);
  }
  return results;
}

struct RunOutcome {
  RunRow row;
  Trace trace;
  SimulationResult sim;
  SlicedWorkload sliced;
  WorkloadGraph graph;
  double cache_hit_ratio = 0.0;
};

inline std::string workload_label(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

// Parses and slices a workload, naming the failing stage.
inline std::pair<WorkloadGraph, SlicedWorkload> load_workload(const std::string& path, SplitAlgorithm split) {
  std::string text;
  try {
    text = detail::read_text_file(path, "workload file");
  } catch (const std::exception& e) {
    throw StageError("load", e.what());
  }
  HloModule m;
  try {
    m = parse_module(text);
  } catch (const ParseError& e) {
    throw StageError("parse", path + ":" + e.what());
  }
  WorkloadGraph g;
  try {
    g = build_graph(m);
  } catch (const std::exception& e) {
    throw StageError("graph", path + ": " + e.what());
  }
  SlicedWorkload s;
  try {
    s = hlosim::split(g, split);
  } catch (const std::exception& e) {
    throw StageError("slice", path + ": " + e.what());
  }
  return {std::move(g), std::move(s)};
}

// Runs the pipeline for one target against a shared estimator cache. Writes
// no files.
inline RunOutcome execute_run(const RunSpec& spec, const Target& target, ComputeApi& api) {
  const auto t0 = std::chrono::steady_clock::now();
  RunOutcome o;
  std::tie(o.graph, o.sliced) = load_workload(spec.workload_path, spec.split);
  const CacheStats before = api.cache_stats();
  std::vector<EstimatorResult> results;
  try {
    results = estimate_regions(o.sliced, target.hardware, spec.estimator, api, spec.threads);
  } catch (const std::exception& e) {
    throw StageError("estimate", e.what());
  }
  const CacheStats after = api.cache_stats();
  try {
    o.trace = build_trace(o.sliced, results, target.system);
  } catch (const std::exception& e) {
    throw StageError("trace", e.what());
  }
  try {
    o.sim = simulate(o.trace, target.system);
  } catch (const std::exception& e) {
    throw StageError("simulate", e.what());
  }
  const double wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  RunRow& r = o.row;
  r.workload = workload_label(spec.workload_path);
  r.system = target.system.name;
  r.hardware = target.hardware.name;
  r.estimator = std::string(estimator_name(spec.estimator.kind));
  r.split = std::string(split_name(spec.split));
  r.step_time_s = o.sim.total_time;
  r.step_time_ns = seconds_to_ns(o.sim.total_time);
  r.comp_time_ns = seconds_to_ns(o.sim.comp_time_total);
  r.comm_time_ns = seconds_to_ns(o.sim.comm_time_total);
  r.cache_hits = after.hits - before.hits;
  r.cache_misses = after.misses - before.misses;
  r.sim_wall_ms = spec.reproducible ? 0.0 : wall_ms;
  const auto requests = r.cache_hits + r.cache_misses;
  o.cache_hit_ratio = requests ? static_cast<double>(r.cache_hits) / static_cast<double>(requests) : 0.0;
  return o;
}

namespace detail {

// Reference labels tried in order for a row.
inline std::optional<double> find_reference(const std::map<std::string, double>& refs, const RunRow& r) {
  for (const std::string& label : {r.workload + "/" + r.system, r.workload + "/" + r.hardware, r.system,
                                   r.hardware, r.workload}) {
    auto it = refs.find(label);
    if (it != refs.end()) return it->second;
  }
  return std::nullopt;
}

inline void attach_reference(RunRow& r, const std::map<std::string, double>& refs) {
  const auto ref = find_reference(refs, r);
  if (!ref) return;
  r.reference_ns = seconds_to_ns(*ref);
  const ComparisonRecord rec{r.workload, r.step_time_s, *ref};
  r.mape_pct = mape(std::span<const ComparisonRecord>(&rec, 1));
}

inline std::string summary_line(const RunOutcome& o) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "workload=%s system=%s hardware=%s estimator=%s split=%s step_time_ns=%lld "
                "sim_wall_ms=%.3f cache_hit_ratio=%.3f",
                o.row.workload.c_str(), o.row.system.c_str(), o.row.hardware.c_str(), o.row.estimator.c_str(),
                o.row.split.c_str(), static_cast<long long>(o.row.step_time_ns), o.row.sim_wall_ms,
                o.cache_hit_ratio);
  return buf;
}

// "dir/name.trace.json" + "a100x4" -> "dir/name.a100x4.trace.json"
inline std::string tagged_path(const std::string& path, const std::string& tag) {
  const std::filesystem::path p(path);
  const std::string file = p.filename().string();
  const auto dot = file.find('.', 1);
  const std::string tagged =
      dot == std::string::npos ? file + "." + tag : file.substr(0, dot) + "." + tag + file.substr(dot);
  return (p.parent_path() / tagged).string();
}

inline void write_output(const std::string& path, const std::string& content) {
  try {
    write_file_atomic(path, content);
  } catch (const std::exception& e) {
    throw StageError("report", e.what());
  }
}

inline ComputeApi& prepare_api(ComputeApi& api, const EstimatorSelection& sel) {
  validate_estimator(sel);
  if (sel.kind == EstimatorKind::kTable) api.set_table(LatencyTable::load(sel.table_path));
  return api;
}

}  // namespace detail

struct RunReport {
  RunOutcome outcome;
  std::string summary;
};

// Full single run: executes and writes every requested artifact.
inline RunReport run_simulation(const RunSpec& spec) {
  Target target;
  ComputeApi api;
  try {
    detail::prepare_api(api, spec.estimator);
    target = resolve_target(spec.system, spec.hardware);
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("config", e.what());
  }
  RunReport rep;
  rep.outcome = execute_run(spec, target, api);
  RunOutcome& o = rep.outcome;
  if (!spec.reference_path.empty()) {
    try {
      detail::attach_reference(o.row, load_reference_csv(spec.reference_path));
    } catch (const std::exception& e) {
      throw StageError("reference", e.what());
    }
  }
  if (!spec.graph_out.empty()) detail::write_output(spec.graph_out, dump_edge_list(o.graph));
  if (!spec.trace_out.empty()) detail::write_output(spec.trace_out, serialize_trace(o.trace));
  if (!spec.csv_out.empty()) detail::write_output(spec.csv_out, format_csv({o.row}));
  if (!spec.svg_out.empty()) {
    detail::write_output(spec.svg_out, emit_svg_bar_chart({o.row}, ChartGrouping::kByWorkload));
  }
  rep.summary = detail::summary_line(o);
  if (o.row.mape_pct) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), " mape_pct=%.4f", *o.row.mape_pct);
    rep.summary += buf;
  }
  return rep;
}

// ---- Sweep ------------------------------------------------------------------

struct Transition {
  std::string from;
  std::string to;
  double speedup = 0.0;
  std::optional<double> reference_speedup;
  std::optional<double> speedup_error_pct;
};

struct RunFailure {
  std::string target;
  std::string message;
};

struct SweepResult {
  std::vector<RunRow> rows;
  std::vector<Transition> transitions;
  std::vector<RunFailure> failures;
  std::map<std::string, double> mape_by_workload;
  std::map<std::string, double> mape_by_hardware;
  std::optional<double> mean_abs_speedup_error;
  CacheStats cache;
  std::vector<std::string> summaries;
};

namespace detail {

// A sweep entry is a system preset that names its device, or hardware paired
// with the template's system.
inline Target resolve_sweep_target(const std::string& item, const RunSpec& tmpl) {
  if (auto p = find_system_preset(item)) {
    if (!tmpl.hardware.empty()) return resolve_target(item, tmpl.hardware);
    return resolve_target(item, "");
  }
  if (tmpl.system.empty()) throw ConfigError("'" + item + "' is not a system preset and no --system was given");
  return resolve_target(tmpl.system, item);
}

}  // namespace detail

inline std::string format_transitions_csv(const SweepResult& r) {
  bool with_ref = false;
  for (const Transition& t : r.transitions) with_ref = with_ref || t.speedup_error_pct.has_value();
  std::string out = with_ref ? "from,to,speedup,reference_speedup,speedup_error_pct\n" : "from,to,speedup\n";
  for (const Transition& t : r.transitions) {
    out += detail::csv_field(t.from) + "," + detail::csv_field(t.to) + "," + detail::fixed(t.speedup, 4);
    if (with_ref) {
      out += ",";
      if (t.reference_speedup) out += detail::fixed(*t.reference_speedup, 4);
      out += ",";
      if (t.speedup_error_pct) out += detail::fixed(*t.speedup_error_pct, 4);
    }
    out += "\n";
  }
  if (r.mean_abs_speedup_error) out += "mean_absolute,,," + std::string(with_ref ? "," : "") +
                                       detail::fixed(*r.mean_abs_speedup_error, 4) + "\n";
  return out;
}

// One run per target over the same workload with a shared cache. Runs are
// sequential so per-row cache counters are well defined; failures are
// recorded and the sweep continues.
inline SweepResult sweep(const RunSpec& tmpl, const std::vector<std::string>& targets,
                         const std::string& transitions_out = "") {
  SweepResult res;
  ComputeApi api;
  try {
    detail::prepare_api(api, tmpl.estimator);
  } catch (const std::exception& e) {
    throw StageError("config", e.what());
  }
  std::map<std::string, double> refs;
  if (!tmpl.reference_path.empty()) {
    try {
      refs = load_reference_csv(tmpl.reference_path);
    } catch (const std::exception& e) {
      throw StageError("reference", e.what());
    }
  }
  std::vector<RunOutcome> outcomes;
  for (const std::string& item : targets) {
    try {
      Target target;
      try {
        target = detail::resolve_sweep_target(item, tmpl);
      } catch (const std::exception& e) {
        throw StageError("config", e.what());
      }
      RunOutcome o = execute_run(tmpl, target, api);
      if (!refs.empty()) detail::attach_reference(o.row, refs);
      res.summaries.push_back(detail::summary_line(o));
      if (!tmpl.trace_out.empty()) {
        detail::write_output(detail::tagged_path(tmpl.trace_out, item), serialize_trace(o.trace));
      }
      res.rows.push_back(o.row);
      outcomes.push_back(std::move(o));
    } catch (const std::exception& e) {
      res.failures.push_back({item, e.what()});
      log_message(LogLevel::kError, item + ": " + e.what());
    }
  }

  std::vector<double> abs_errors;
  for (std::size_t i = 1; i < res.rows.size(); ++i) {
    const RunRow& a = res.rows[i - 1];
    const RunRow& b = res.rows[i];
    Transition t;
    t.from = a.system;
    t.to = b.system;
    if (a.step_time_s > 0.0 && b.step_time_s > 0.0) t.speedup = speedup(a.step_time_s, b.step_time_s);
    const auto ra = detail::find_reference(refs, a);
    const auto rb = detail::find_reference(refs, b);
    if (ra && rb && t.speedup > 0.0) {
      t.reference_speedup = speedup(*ra, *rb);
      t.speedup_error_pct = speedup_error(*t.reference_speedup, t.speedup);
      abs_errors.push_back(*t.speedup_error_pct);
    }
    res.transitions.push_back(t);
  }
  if (!abs_errors.empty()) res.mean_abs_speedup_error = mean_absolute(abs_errors);

  std::map<std::string, std::vector<ComparisonRecord>> by_w, by_h;
  for (const RunRow& r : res.rows) {
    if (!r.reference_ns) continue;
    const double ref = *detail::find_reference(refs, r);
    by_w[r.workload].push_back({r.workload, r.step_time_s, ref});
    by_h[r.hardware].push_back({r.hardware, r.step_time_s, ref});
  }
  for (const auto& [k, v] : by_w) res.mape_by_workload[k] = mape(v);
  for (const auto& [k, v] : by_h) res.mape_by_hardware[k] = mape(v);
  res.cache = api.cache_stats();

  if (!res.rows.empty()) {
    if (!tmpl.csv_out.empty()) detail::write_output(tmpl.csv_out, format_csv(res.rows));
    if (!tmpl.svg_out.empty()) {
      detail::write_output(tmpl.svg_out, emit_svg_bar_chart(res.rows, ChartGrouping::kByWorkload));
    }
  }
  if (!transitions_out.empty()) detail::write_output(transitions_out, format_transitions_csv(res));
  return res;
}

// Latency-table template for a workload: every distinct region key with its
// roofline estimate in ns as a placeholder for measured values.
inline nlohmann::ordered_json latency_table_template(const std::string& workload_path, SplitAlgorithm split,
                                                     const HardwareConfig& hw) {
  const auto [g, s] = load_workload(workload_path, split);
  LatencyTable t;
  for (const ComputeRegion& r : s.regions) t.entries[r.canonical_key] = roofline_estimate(r, hw).latency;
  return t.to_json();
}

}  // namespace hlosim
