// Copyright 2026 The hlosim Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Command-line driver: simulate, sweep, gen, keys.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hlosim/hlosim.hpp"

namespace {

struct CommonOpts {
  std::string workload;
  std::string system;
  std::string hardware;
  std::string estimator = "roofline";
  std::string table;
  std::string fallback;
  std::string split = "linear";
  std::string trace_out;
  std::string csv_out;
  std::string svg_out;
  std::string reference;
  std::string graph_out;
  int runs = 0;
  int threads = 1;
  bool reproducible = false;
};

void add_common(CLI::App* app, CommonOpts& o, bool hardware_list) {
  app->add_option("--workload", o.workload, "StableHLO text file")->required();
  app->add_option("--system", o.system, "system preset name or JSON file");
  if (!hardware_list) app->add_option("--hardware", o.hardware, "hardware preset name or JSON file");
  app->add_option("--estimator", o.estimator)->check(CLI::IsMember({"roofline", "table"}));
  app->add_option("--table", o.table, "latency table JSON for the table estimator");
  app->add_option("--fallback", o.fallback, "estimator for regions missing from the table")
      ->check(CLI::IsMember({"roofline"}));
  app->add_option("--split", o.split)->check(CLI::IsMember({"linear", "dependency"}));
  app->add_option("--trace-out", o.trace_out);
  app->add_option("--csv-out", o.csv_out);
  app->add_option("--svg-out", o.svg_out);
  app->add_option("--reference", o.reference, "CSV of label,reference_seconds");
  app->add_option("--runs", o.runs, "profiling runs per measurement (execution argument)");
  app->add_option("--threads", o.threads, "parallel region estimation")->check(CLI::PositiveNumber);
  app->add_flag("--reproducible", o.reproducible, "report sim_wall_ms as 0 for byte-stable outputs");
}

hlosim::RunSpec to_spec(const CommonOpts& o) {
  hlosim::RunSpec s;
  s.workload_path = o.workload;
  s.system = o.system;
  s.hardware = o.hardware;
  s.estimator.kind = o.estimator == "table" ? hlosim::EstimatorKind::kTable : hlosim::EstimatorKind::kRoofline;
  s.estimator.table_path = o.table;
  s.estimator.roofline_fallback = o.fallback == "roofline";
  if (o.runs > 0) s.estimator.runs = o.runs;
  s.split = o.split == "dependency" ? hlosim::SplitAlgorithm::kDependency : hlosim::SplitAlgorithm::kLinear;
  s.trace_out = o.trace_out;
  s.csv_out = o.csv_out;
  s.svg_out = o.svg_out;
  s.reference_path = o.reference;
  s.graph_out = o.graph_out;
  s.threads = o.threads;
  s.reproducible = o.reproducible;
  return s;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

hlosim::ElementType parse_dtype(const std::string& s) {
  const auto e = hlosim::element_type_from_name(s);
  if (!e) throw std::invalid_argument("unknown dtype '" + s + "'");
  return *e;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace-driven distributed training step simulator for StableHLO workloads"};
  app.set_version_flag("--version", std::string("hlosim ") + HLOSIM_VERSION);
  app.require_subcommand(1);

  CommonOpts sim_opts;
  CLI::App* sim = app.add_subcommand("simulate", "simulate one workload on one system");
  add_common(sim, sim_opts, false);
  sim->add_option("--dump-graph", sim_opts.graph_out, "write the dependency edge list");

  CommonOpts sweep_opts;
  std::string sweep_targets;
  std::string transitions_out;
  CLI::App* sw = app.add_subcommand("sweep", "run one workload across several targets");
  add_common(sw, sweep_opts, true);
  sw->add_option("--hardware", sweep_targets,
                 "comma-separated system presets (or hardware paired with --system)")
      ->required();
  sw->add_option("--transitions-out", transitions_out, "CSV of consecutive-target speedups");

  hlosim::GemmWorkload gemm;
  hlosim::BlocksWorkload blocks;
  std::string kind = "gemm";
  std::string dtype = "bf16";
  std::string gen_out;
  int devices = 4;
  CLI::App* gen = app.add_subcommand("gen", "emit a parameterized StableHLO fixture");
  gen->add_option("--kind", kind)->check(CLI::IsMember({"gemm", "blocks"}));
  gen->add_option("--m", gemm.m);
  gen->add_option("--n", gemm.n);
  gen->add_option("--k", gemm.k);
  gen->add_option("--dtype", dtype);
  gen->add_option("--collective", gemm.collective);
  gen->add_option("--layers", blocks.layers);
  gen->add_option("--batch", blocks.batch);
  gen->add_option("--hidden", blocks.hidden);
  gen->add_option("--devices", devices);
  gen->add_option("-o,--out", gen_out, "output file (default stdout)");

  std::string keys_workload;
  std::string keys_hardware = "A100";
  std::string keys_split = "linear";
  std::string keys_out;
  CLI::App* keys = app.add_subcommand("keys", "emit a latency-table template for a workload");
  keys->add_option("--workload", keys_workload)->required();
  keys->add_option("--hardware", keys_hardware, "hardware used for placeholder values");
  keys->add_option("--split", keys_split)->check(CLI::IsMember({"linear", "dependency"}));
  keys->add_option("-o,--out", keys_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      const hlosim::RunReport rep = hlosim::run_simulation(to_spec(sim_opts));
      std::cout << rep.summary << '\n';
      return 0;
    }
    if (sw->parsed()) {
      const hlosim::SweepResult res =
          hlosim::sweep(to_spec(sweep_opts), split_list(sweep_targets), transitions_out);
      for (const std::string& line : res.summaries) std::cout << line << '\n';
      std::cout << hlosim::format_transitions_csv(res);
      for (const auto& [w, v] : res.mape_by_workload) std::printf("mape workload=%s %.4f\n", w.c_str(), v);
      for (const auto& [h, v] : res.mape_by_hardware) std::printf("mape hardware=%s %.4f\n", h.c_str(), v);
      std::printf("cache hits=%llu misses=%llu unique_keys=%llu\n",
                  static_cast<unsigned long long>(res.cache.hits),
                  static_cast<unsigned long long>(res.cache.misses),
                  static_cast<unsigned long long>(res.cache.unique_keys));
      for (const hlosim::RunFailure& f : res.failures) {
        std::cerr << "error: " << f.target << ": " << f.message << '\n';
      }
      return res.failures.empty() ? 0 : 1;
    }
    if (gen->parsed()) {
      std::string text;
      if (kind == "gemm") {
        gemm.dtype = parse_dtype(dtype);
        gemm.devices = devices;
        text = hlosim::generate_gemm(gemm);
      } else {
        blocks.dtype = parse_dtype(dtype);
        blocks.devices = devices;
        text = hlosim::generate_blocks(blocks);
      }
      if (gen_out.empty()) {
        std::cout << text;
      } else {
        hlosim::write_file_atomic(gen_out, text);
      }
      return 0;
    }
    if (keys->parsed()) {
      const auto split =
          keys_split == "dependency" ? hlosim::SplitAlgorithm::kDependency : hlosim::SplitAlgorithm::kLinear;
      const auto hw = hlosim::detail::resolve_hardware(keys_hardware);
      const std::string text = hlosim::latency_table_template(keys_workload, split, hw).dump(2) + "\n";
      if (keys_out.empty()) {
        std::cout << text;
      } else {
        hlosim::write_file_atomic(keys_out, text);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
