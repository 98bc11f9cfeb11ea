// Copyright 2026 The hlosim Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstring>
#include <thread>

#include "support/testgen.hpp"

namespace hlosim {
namespace {

HardwareConfig hw(const char* name) { return *find_hardware_preset(name); }

ComputeRegion only_region(const std::string& src) {
  const SlicedWorkload s = linear_split(build_graph(parse_module(src)));
  EXPECT_EQ(s.regions.size(), 1u);
  return s.regions.at(0);
}

HloOperation op_of(const std::string& body_line, const std::string& args) {
  const HloModule m = parse_module("func.func @main(" + args + ") {\n" + body_line + "\n func.return }");
  return m.main().body.at(0);
}

TEST(Presets, HardwareValues) {
  EXPECT_DOUBLE_EQ(hw("A100").peak_compute, 312e12);
  EXPECT_DOUBLE_EQ(hw("A100").memory_bandwidth, 1.94e12);
  EXPECT_DOUBLE_EQ(hw("H100").peak_compute, 1979e12);
  EXPECT_DOUBLE_EQ(hw("H100").memory_bandwidth, 3.35e12);
  EXPECT_DOUBLE_EQ(hw("H200").peak_compute, 1979e12);
  EXPECT_DOUBLE_EQ(hw("H200").memory_bandwidth, 4.80e12);
  EXPECT_DOUBLE_EQ(hw("B200").peak_compute, 4500e12);
  EXPECT_DOUBLE_EQ(hw("B200").memory_bandwidth, 7.70e12);
  EXPECT_DOUBLE_EQ(hw("tpuv3").peak_compute, 63.3e12);
  EXPECT_DOUBLE_EQ(hw("TPUv3").memory_bandwidth, 429.2e9);
  EXPECT_FALSE(find_hardware_preset("Z9000"));
}

TEST(Presets, HardwareJsonRoundTrip) {
  const HardwareConfig h = hardware_from_json(nlohmann::json::parse(
      R"({"name": "X", "peak_compute_tflops": 100, "memory_bandwidth_gbs": 2000, "toolchain_tag": "hlo-opt"})"));
  EXPECT_DOUBLE_EQ(h.peak_compute, 100e12);
  EXPECT_DOUBLE_EQ(h.memory_bandwidth, 2e12);
  EXPECT_EQ(h.toolchain_tag, "hlo-opt");
  EXPECT_EQ(hardware_from_json(nlohmann::json::parse(hardware_to_json(h).dump())), h);
  EXPECT_THROW(hardware_from_json(nlohmann::json::parse(R"({"name": "X", "peak_compute_tflops": 0, "memory_bandwidth_gbs": 1})")),
               ConfigError);
  EXPECT_THROW(hardware_from_json(nlohmann::json::parse(R"({"name": "X"})")), ConfigError);
}

TEST(OpFlops, FragmentDotGeneral) {
  const HloModule m = parse_module(testing::fixture_text("workloads/dot_transpose_allreduce.mlir"));
  EXPECT_DOUBLE_EQ(op_flops(m.main().body[0]), 144.0);
  EXPECT_DOUBLE_EQ(op_flops(m.main().body[1]), 18.0);
  EXPECT_DOUBLE_EQ(op_flops(m.main().body[2]), 0.0);
}

TEST(OpFlops, Rules) {
  EXPECT_DOUBLE_EQ(op_flops(op_of("%0 = stablehlo.add %x, %x : tensor<3x6xf32>", "%x: tensor<3x6xf32>")), 18.0);
  EXPECT_DOUBLE_EQ(
      op_flops(op_of("%0 = \"stablehlo.dot_general\"(%a, %b) {dot_dimension_numbers = #stablehlo.dot<lhs_contracting_dimensions = [1], rhs_contracting_dimensions = [0]>}"
                     " : (tensor<5x0xf32>, tensor<0x7xf32>) -> tensor<5x7xf32>",
                     "%a: tensor<5x0xf32>, %b: tensor<0x7xf32>")),
      0.0);
  // Batched matmul: B=2, M=3, K=4, N=5.
  EXPECT_DOUBLE_EQ(
      op_flops(op_of("%0 = \"stablehlo.dot_general\"(%a, %b) {dot_dimension_numbers = #stablehlo.dot<lhs_batching_dimensions = [0], "
                     "rhs_batching_dimensions = [0], lhs_contracting_dimensions = [2], rhs_contracting_dimensions = [1]>}"
                     " : (tensor<2x3x4xf32>, tensor<2x4x5xf32>) -> tensor<2x3x5xf32>",
                     "%a: tensor<2x3x4xf32>, %b: tensor<2x4x5xf32>")),
      2.0 * 2 * 3 * 5 * 4);
  // NHWC conv: output 1x8x8x16, kernel 3x3x4x16, groups 1 -> 2 * 1024 * 9 * 4.
  EXPECT_DOUBLE_EQ(
      op_flops(op_of("%0 = \"stablehlo.convolution\"(%i, %k) {dimension_numbers = #stablehlo.conv<[b, 0, 1, f]x[0, 1, i, o]->[b, 0, 1, f]>,"
                     " feature_group_count = 1 : i64} : (tensor<1x8x8x4xf32>, tensor<3x3x4x16xf32>) -> tensor<1x8x8x16xf32>",
                     "%i: tensor<1x8x8x4xf32>, %k: tensor<3x3x4x16xf32>")),
      2.0 * 1024 * 9 * 4);
  // Grouped conv divides by the group count.
  EXPECT_DOUBLE_EQ(
      op_flops(op_of("%0 = \"stablehlo.convolution\"(%i, %k) {dimension_numbers = #stablehlo.conv<[b, 0, 1, f]x[0, 1, i, o]->[b, 0, 1, f]>,"
                     " feature_group_count = 2 : i64} : (tensor<1x8x8x4xf32>, tensor<3x3x2x16xf32>) -> tensor<1x8x8x16xf32>",
                     "%i: tensor<1x8x8x4xf32>, %k: tensor<3x3x2x16xf32>")),
      2.0 * 1024 * 9 * 4 / 2);
  // Reduce charges input elements, not init values.
  EXPECT_DOUBLE_EQ(
      op_flops(op_of("%0 = \"stablehlo.reduce\"(%x, %z) ({\n ^bb0(%p: tensor<f32>, %q: tensor<f32>):\n"
                     " %s = stablehlo.add %p, %q : tensor<f32>\n stablehlo.return %s : tensor<f32>\n"
                     " }) {dimensions = array<i64: 1>} : (tensor<4x8xf32>, tensor<f32>) -> tensor<4xf32>",
                     "%x: tensor<4x8xf32>, %z: tensor<f32>")),
      32.0);
  EXPECT_DOUBLE_EQ(op_flops(op_of("%0 = \"stablehlo.custom_call\"(%x) {call_target_name = \"f\"} : (tensor<64xf32>) -> tensor<64xf32>",
                                  "%x: tensor<64xf32>")),
                   0.0);
  EXPECT_DOUBLE_EQ(op_flops(op_of("%0 = \"stablehlo.mystery\"(%x) : (tensor<64xf32>) -> tensor<64xf32>", "%x: tensor<64xf32>")), 0.0);
  EXPECT_DOUBLE_EQ(op_flops(op_of("%0 = \"stablehlo.broadcast_in_dim\"(%x) {broadcast_dimensions = array<i64: 0>} : (tensor<4xf32>) -> tensor<4x5xf32>",
                                  "%x: tensor<4xf32>")),
                   20.0);
}

TEST(OpFlops, MissingDimensionNumbersIsAnError) {
  EXPECT_THROW(op_flops(op_of("%0 = \"stablehlo.dot_general\"(%a, %b) : (tensor<2x2xf32>, tensor<2x2xf32>) -> tensor<2x2xf32>",
                              "%a: tensor<2x2xf32>, %b: tensor<2x2xf32>")),
               CostRuleError);
  EXPECT_THROW(op_flops(op_of("%0 = \"stablehlo.convolution\"(%a, %b) : (tensor<2x2xf32>, tensor<2x2xf32>) -> tensor<2x2xf32>",
                              "%a: tensor<2x2xf32>, %b: tensor<2x2xf32>")),
               CostRuleError);
}

TEST(OpFlops, FusionSumsInnerOps) {
  const HloOperation f = op_of(
      "%0 = \"test.fusion\"(%x) ({\n ^bb0(%a: tensor<8xf32>):\n"
      "  %m = stablehlo.multiply %a, %a : tensor<8xf32>\n  %t = stablehlo.tanh %m : tensor<8xf32>\n"
      "  stablehlo.return %t : tensor<8xf32>\n }) : (tensor<8xf32>) -> tensor<8xf32>",
      "%x: tensor<8xf32>");
  EXPECT_DOUBLE_EQ(op_flops(f), 16.0);
}

TEST(Roofline, FragmentRegionOnA100) {
  const ComputeRegion r = only_region(testing::fixture_text("workloads/dot_transpose_allreduce.mlir"));
  const EstimatorResult e = roofline_estimate(r, hw("A100"));
  EXPECT_DOUBLE_EQ(e.flops, 162.0);
  EXPECT_DOUBLE_EQ(e.bytes_moved, 216.0);
  EXPECT_DOUBLE_EQ(e.latency, 216.0 / 1.94e12);
  EXPECT_NEAR(e.latency, 1.113e-10, 1e-13);
  EXPECT_EQ(e.bound, Bound::kMemoryBound);
}

TEST(Roofline, MemoryOnlyRegion) {
  const ComputeRegion r = only_region(
      "func.func @main(%x: tensor<1xf32>) -> tensor<1xf16> {\n %0 = stablehlo.convert %x : (tensor<1xf32>) -> tensor<1xf16>\n"
      " func.return %0 : tensor<1xf16>\n}");
  const EstimatorResult e = roofline_estimate(r, hw("A100"));
  EXPECT_DOUBLE_EQ(e.bytes_moved, 6.0);
  EXPECT_DOUBLE_EQ(e.latency, 6.0 / 1.94e12);
  EXPECT_EQ(e.bound, Bound::kMemoryBound);
}

TEST(Roofline, GemmOnA100AndH100) {
  GemmWorkload w;
  w.collective = "none";
  const ComputeRegion r = only_region(generate_gemm(w));
  const double flops = 2.0 * 4096.0 * 4096.0 * 4096.0;
  const EstimatorResult a = roofline_estimate(r, hw("A100"));
  EXPECT_DOUBLE_EQ(a.flops, flops);
  EXPECT_DOUBLE_EQ(a.bytes_moved, 3.0 * 4096 * 4096 * 2);
  EXPECT_EQ(a.bound, Bound::kComputeBound);
  EXPECT_NEAR(a.latency, 4.405e-4, 4.405e-4 * 1e-3);
  const EstimatorResult h = roofline_estimate(r, hw("H100"));
  EXPECT_NEAR(h.latency, 6.945e-5, 6.945e-5 * 1e-3);
  EXPECT_NEAR(a.latency / h.latency, 1979.0 / 312.0, 1e-12);
}

TEST(Roofline, BoundDominanceAndMonotonicity) {
  testing::Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const double flops = std::uniform_real_distribution<double>(0, 1e12)(rng);
    const double bytes = std::uniform_real_distribution<double>(0, 1e10)(rng);
    HardwareConfig h;
    h.name = "x";
    h.peak_compute = std::uniform_real_distribution<double>(1e12, 1e15)(rng);
    h.memory_bandwidth = std::uniform_real_distribution<double>(1e11, 1e13)(rng);
    const EstimatorResult r = roofline_from_counts(flops, bytes, h);
    EXPECT_GE(r.latency, flops / h.peak_compute);
    EXPECT_GE(r.latency, bytes / h.memory_bandwidth);
    EXPECT_TRUE(r.latency == flops / h.peak_compute || r.latency == bytes / h.memory_bandwidth);
    HardwareConfig faster = h;
    faster.peak_compute *= 2;
    faster.memory_bandwidth *= 1.5;
    EXPECT_LE(roofline_from_counts(flops, bytes, faster).latency, r.latency);
    EXPECT_GE(roofline_from_counts(flops * 2, bytes + 1, h).latency, r.latency);
  }
}

TEST(Roofline, FusedElementwiseChainIsNoSlowerThanParts) {
  const std::string src =
      "func.func @main(%x: tensor<1024xf32>) -> tensor<1024xf32> {\n"
      "  %a = stablehlo.tanh %x : tensor<1024xf32>\n"
      "  %b = stablehlo.exponential %a : tensor<1024xf32>\n"
      "  %c = stablehlo.negate %b : tensor<1024xf32>\n"
      "  func.return %c : tensor<1024xf32>\n}\n";
  const WorkloadGraph g = build_graph(parse_module(src));
  const double fused = roofline_estimate(linear_split(g).regions.at(0), hw("H100")).latency;
  double parts = 0.0;
  for (const ComputeRegion& r : dependency_aware_split(g).regions) parts += roofline_estimate(r, hw("H100")).latency;
  EXPECT_LE(fused, parts);
  EXPECT_DOUBLE_EQ(fused, 8192.0 / 3.35e12);
}

TEST(Table, LookupFallbackAndMiss) {
  const ComputeRegion r = only_region(testing::fixture_text("workloads/dot_transpose_allreduce.mlir"));
  LatencyTable t = LatencyTable::from_json(
      nlohmann::json::parse("{\"version\": 1, \"entries\": {\"" + r.canonical_key + "\": 5000}}"), "unit");
  const EstimatorResult e = table_lookup_estimate(r, t, hw("A100"), false);
  EXPECT_DOUBLE_EQ(e.latency, 5.0e-6);
  EXPECT_EQ(e.provenance, "table");
  EXPECT_DOUBLE_EQ(e.flops, 162.0);

  const LatencyTable empty = LatencyTable::from_json(nlohmann::json::parse(R"({"version": 1, "entries": {}})"), "unit");
  const EstimatorResult fb = table_lookup_estimate(r, empty, hw("A100"), true);
  EXPECT_EQ(fb.provenance, "fallback");
  EXPECT_DOUBLE_EQ(fb.latency, roofline_estimate(r, hw("A100")).latency);
  try {
    table_lookup_estimate(r, empty, hw("A100"), false);
    FAIL();
  } catch (const MissingLatencyError& err) {
    EXPECT_NE(std::string(err.what()).find(r.canonical_key), std::string::npos);
  }
  EXPECT_THROW(LatencyTable::from_json(nlohmann::json::parse(R"({"version": 1, "entries": {"k": -1}})"), ""), ConfigError);
  EXPECT_THROW(LatencyTable::from_json(nlohmann::json::parse(R"({"version": 2, "entries": {}})"), ""), ConfigError);
}

TEST(ComputeApiArgs, CompileAndExecArgs) {
  EstimatorSelection roof;
  EXPECT_EQ(get_compile_args(roof), (ArgMap{{"toolchain", "raw"}}));
  EXPECT_EQ(get_exec_args(roof), (ArgMap{{"runs", "1"}}));
  EstimatorSelection table;
  table.kind = EstimatorKind::kTable;
  table.table_path = "t.json";
  EXPECT_EQ(get_compile_args(table), (ArgMap{{"toolchain", "profiled"}, {"source", "t.json"}}));
  EXPECT_EQ(get_exec_args(table), (ArgMap{{"runs", "5"}}));
  table.runs = 3;
  EXPECT_EQ(get_exec_args(table), (ArgMap{{"runs", "3"}}));
}

TEST(ComputeApiCache, HitsMissesAndTransparency) {
  BlocksWorkload w;
  w.layers = 3;
  w.batch = 8;
  w.hidden = 16;
  const SlicedWorkload s = dependency_aware_split(build_graph(parse_module(generate_blocks(w))));
  ComputeApi api;
  EXPECT_EQ(api.cache_stats().hits, 0u);
  EXPECT_EQ(api.cache_stats().misses, 0u);
  EXPECT_EQ(api.cache_stats().unique_keys, 0u);
  ComputeApi uncached(false);
  std::set<std::string> keys;
  for (const ComputeRegion& r : s.regions) {
    keys.insert(r.canonical_key);
    const EstimatorResult a = api.get_run_time_estimate(r, hw("A100"), {});
    const EstimatorResult b = uncached.get_run_time_estimate(r, hw("A100"), {});
    EXPECT_EQ(std::memcmp(&a.latency, &b.latency, sizeof(double)), 0);
  }
  const CacheStats st = api.cache_stats();
  EXPECT_EQ(st.misses, keys.size());
  EXPECT_EQ(st.hits, s.regions.size() - keys.size());
  EXPECT_EQ(st.unique_keys, keys.size());
  EXPECT_EQ(api.estimator_invocations(), keys.size());
  EXPECT_EQ(uncached.estimator_invocations(), s.regions.size());

  // Distinct hardware never shares entries.
  api.get_run_time_estimate(s.regions[0], hw("H100"), {});
  EXPECT_EQ(api.cache_stats().unique_keys, keys.size() + 1);
  // Toolchain is part of the key.
  HardwareConfig tagged = hw("A100");
  tagged.toolchain_tag = "hlo-opt";
  api.get_run_time_estimate(s.regions[0], tagged, {});
  EXPECT_EQ(api.cache_stats().unique_keys, keys.size() + 2);
}

TEST(ComputeApiCache, TwoIdenticalOneDistinct) {
  const SlicedWorkload s = dependency_aware_split(build_graph(parse_module(
      "func.func @main(%x: tensor<4xf32>) {\n %a = stablehlo.tanh %x : tensor<4xf32>\n"
      " %b = stablehlo.tanh %x : tensor<4xf32>\n %c = stablehlo.abs %x : tensor<4xf32>\n func.return }")));
  ComputeApi api;
  for (const ComputeRegion& r : s.regions) api.get_run_time_estimate(r, hw("A100"), {});
  EXPECT_EQ(api.cache_stats().hits, 1u);
  EXPECT_EQ(api.cache_stats().misses, 2u);
}

TEST(ComputeApiCache, ConcurrentRequestsAgree) {
  BlocksWorkload w;
  w.layers = 8;
  w.batch = 8;
  w.hidden = 16;
  const SlicedWorkload s = dependency_aware_split(build_graph(parse_module(generate_blocks(w))));
  ComputeApi api;
  std::vector<std::thread> pool;
  std::vector<std::vector<double>> seen(4);
  for (int t = 0; t < 4; ++t) {
    pool.emplace_back([&, t] {
      for (const ComputeRegion& r : s.regions) seen[static_cast<std::size_t>(t)].push_back(api.get_run_time_estimate(r, hw("B200"), {}).latency);
    });
  }
  for (auto& th : pool) th.join();
  for (int t = 1; t < 4; ++t) EXPECT_EQ(seen[static_cast<std::size_t>(t)], seen[0]);
  const CacheStats st = api.cache_stats();
  EXPECT_EQ(st.hits + st.misses, 4 * s.regions.size());
}

TEST(ComputeApiCache, TableEstimatorNeedsTable) {
  const ComputeRegion r = only_region(testing::fixture_text("workloads/dot_transpose_allreduce.mlir"));
  ComputeApi api;
  EstimatorSelection sel;
  sel.kind = EstimatorKind::kTable;
  EXPECT_THROW(api.get_run_time_estimate(r, hw("A100"), sel), ConfigError);
}

}  // namespace
}  // namespace hlosim
