// Copyright 2026 The hlosim Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "support/testgen.hpp"

namespace hlosim {
namespace {

TraceNode comp(int id, std::int64_t ns, std::vector<int> deps = {}) {
  TraceNode n;
  n.id = id;
  n.type = TraceNodeType::kComp;
  n.name = "c" + std::to_string(id);
  n.latency_ns = ns;
  n.deps = std::move(deps);
  return n;
}

TraceNode comm(int id, CollectiveKind k, std::int64_t bytes, int group, std::vector<int> deps = {}) {
  TraceNode n;
  n.id = id;
  n.type = TraceNodeType::kComm;
  n.name = "m" + std::to_string(id);
  n.comm_kind = k;
  n.comm_bytes = bytes;
  n.group_size = group;
  n.deps = std::move(deps);
  return n;
}

Trace trace_of(std::vector<TraceNode> nodes) {
  Trace t;
  t.system_name = "test-flat";
  t.nodes = std::move(nodes);
  return t;
}

// Per-node durations in ns, the scheduler's time base.
std::vector<double> durations(const Trace& t, const SystemConfig& sys) {
  std::vector<double> d;
  for (const TraceNode& n : t.nodes) d.push_back(node_duration_ns(n, sys));
  return d;
}

TEST(Collectives, ClosedForms) {
  const SystemConfig sys = testing::flat_system(4, 100.0);
  EXPECT_DOUBLE_EQ(collective_latency(CollectiveKind::kAllReduce, 72, 4, sys), 1.08e-9);
  EXPECT_DOUBLE_EQ(collective_latency(CollectiveKind::kAllGather, 4e6, 4, sys), 3e-5);
  EXPECT_DOUBLE_EQ(collective_latency(CollectiveKind::kCollectivePermute, 1e6, 2, sys), 1e-5);
  for (CollectiveKind k : {CollectiveKind::kAllReduce, CollectiveKind::kAllGather, CollectiveKind::kReduceScatter,
                           CollectiveKind::kAllToAll, CollectiveKind::kCollectivePermute}) {
    EXPECT_EQ(collective_latency(k, 1e9, 1, sys), 0.0);
    EXPECT_EQ(collective_latency(k, 0, 4, sys), 0.0);
  }
  EXPECT_THROW(collective_latency(CollectiveKind::kAllReduce, 72, 5, sys), SimulationError);
  EXPECT_THROW(collective_latency(CollectiveKind::kAllReduce, 72, 0, sys), SimulationError);
}

TEST(Collectives, AllReduceIsAllGatherPlusReduceScatter) {
  testing::Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    const int p = testing::uniform(rng, 1, 64);
    const SystemConfig sys = testing::flat_system(64, std::uniform_real_distribution<double>(1, 1000)(rng),
                                                  std::uniform_real_distribution<double>(0, 1e-5)(rng));
    const double n = std::uniform_real_distribution<double>(0, 1e10)(rng);
    const double ar = collective_latency(CollectiveKind::kAllReduce, n, p, sys);
    const double ag = collective_latency(CollectiveKind::kAllGather, n, p, sys);
    const double rs = collective_latency(CollectiveKind::kReduceScatter, n, p, sys);
    EXPECT_NEAR(ar, ag + rs, 4 * std::numeric_limits<double>::epsilon() * ar);
  }
}

TEST(Collectives, Monotonicity) {
  for (double bytes : {1e3, 1e6, 1e9}) {
    double prev_p = 0.0;
    for (int p = 1; p <= 16; ++p) {
      const double t = collective_latency(CollectiveKind::kAllReduce, bytes, p, testing::flat_system(16, 100, 1e-6));
      EXPECT_GE(t, prev_p);
      prev_p = t;
    }
    double prev_bw = std::numeric_limits<double>::infinity();
    for (double gbs : {1.0, 10.0, 100.0, 1000.0}) {
      const double t = collective_latency(CollectiveKind::kAllGather, bytes, 8, testing::flat_system(8, gbs, 1e-6));
      EXPECT_LE(t, prev_bw);
      prev_bw = t;
    }
  }
  double prev_n = 0.0;
  for (double n = 0; n < 1e8; n = n * 10 + 1) {
    const double t = collective_latency(CollectiveKind::kAllToAll, n, 4, testing::flat_system());
    EXPECT_GE(t, prev_n);
    prev_n = t;
  }
}

TEST(Collectives, EffectiveBandwidthHierarchy) {
  SystemConfig sys = find_system_preset("gh200-16")->system;
  EXPECT_DOUBLE_EQ(effective_bandwidth(4, sys), 150e9);
  EXPECT_THROW(effective_bandwidth(8, sys), ConfigError);
  sys.internode_bandwidth = 25e9;
  EXPECT_DOUBLE_EQ(effective_bandwidth(8, sys), 25e9);
  EXPECT_DOUBLE_EQ(effective_bandwidth(2, testing::flat_system(4, 100)), 100e9);
}

TEST(Simulate, SerialChain) {
  // 20 KB all-reduce over 4 devices at 15 GB/s: 2 * 3/4 * 20000 / 15e9 = 2 us.
  const SystemConfig sys = testing::flat_system(4, 15.0);
  const Trace t = trace_of({comp(0, 10000), comm(1, CollectiveKind::kAllReduce, 20000, 4, {0}), comp(2, 3000, {1})});
  const SimulationResult r = simulate(t, sys);
  EXPECT_NEAR(r.total_time, 15e-6, 1e-18);
  EXPECT_EQ(r.critical_path, (std::vector<int>{0, 1, 2}));
  EXPECT_NEAR(r.exposed_comm_time, 2e-6, 1e-18);
}

TEST(Simulate, OverlapFixture) {
  // COMP A 10 us, COMM B 4 us (permute of 40 KB at 10 GB/s), both feed COMP C 1 us.
  const SystemConfig sys = testing::flat_system(4, 10.0);
  const Trace t = trace_of({comp(0, 10000), comm(1, CollectiveKind::kCollectivePermute, 40000, 2), comp(2, 1000, {0, 1})});
  const SimulationResult r = simulate(t, sys);
  EXPECT_DOUBLE_EQ(r.total_time, 11e-6);
  EXPECT_DOUBLE_EQ(r.start[1], 0.0);
  EXPECT_EQ(r.critical_path, (std::vector<int>{0, 2}));
  EXPECT_DOUBLE_EQ(r.comp_time_total, 11e-6);
  EXPECT_DOUBLE_EQ(r.comm_time_total, 4e-6);
  EXPECT_DOUBLE_EQ(r.exposed_comm_time, 0.0);
  EXPECT_EQ(testing::oracle_makespan(t, durations(t, sys)), 11000.0);
  EXPECT_EQ(r.total_time, 11e-6);
}

TEST(Simulate, SingleNodeAndEmpty) {
  const SimulationResult r = simulate(trace_of({comp(0, 5000)}), testing::flat_system());
  EXPECT_DOUBLE_EQ(r.total_time, 5e-6);
  EXPECT_EQ(r.critical_path, std::vector<int>{0});
  const SimulationResult e = simulate(trace_of({}), testing::flat_system());
  EXPECT_EQ(e.total_time, 0.0);
  EXPECT_TRUE(e.critical_path.empty());
}

TEST(Simulate, ComputeResourceSerializes) {
  const SimulationResult r = simulate(trace_of({comp(0, 2000), comp(1, 3000)}), testing::flat_system());
  EXPECT_DOUBLE_EQ(r.total_time, 5e-6);
  EXPECT_DOUBLE_EQ(r.start[1], 2e-6);
  EXPECT_EQ(r.critical_path, (std::vector<int>{0, 1}));
}

TEST(CriticalPath, DiamondWithLongArm) {
  // 0 -> {1 (long COMM), 2 (short COMP)} -> 3.
  const SystemConfig sys = testing::flat_system(4, 10.0);
  const Trace t = trace_of({comp(0, 1000), comm(1, CollectiveKind::kCollectivePermute, 90000, 2, {0}), comp(2, 1000, {0}),
                            comp(3, 1000, {1, 2})});
  const SimulationResult r = simulate(t, sys);
  EXPECT_DOUBLE_EQ(r.total_time, 1e-6 + 9e-6 + 1e-6);
  // The oracle: the longest dependency path by duration.
  const std::vector<double> d = durations(t, sys);
  std::vector<int> best;
  double best_len = -1;
  for (const auto& p : testing::all_paths(t)) {
    double len = 0;
    for (int v : p) len += d[static_cast<std::size_t>(v)];
    if (len > best_len) {
      best_len = len;
      best = p;
    }
  }
  EXPECT_EQ(r.critical_path, best);
  EXPECT_EQ(r.critical_path, (std::vector<int>{0, 1, 3}));
}

TEST(CriticalPath, ContiguousFromZeroToMakespan) {
  testing::Rng rng(23);
  const SystemConfig sys = testing::flat_system(8, 50.0, 1e-6);
  for (int i = 0; i < 200; ++i) {
    const Trace t = testing::random_trace(rng, testing::uniform(rng, 1, 10), sys);
    const SimulationResult r = simulate(t, sys);
    ASSERT_FALSE(r.critical_path.empty());
    // Path is contiguous in time and ends at the makespan.
    EXPECT_DOUBLE_EQ(r.start[static_cast<std::size_t>(r.critical_path.front())], 0.0);
    EXPECT_DOUBLE_EQ(r.end[static_cast<std::size_t>(r.critical_path.back())], r.total_time);
    for (std::size_t k = 1; k < r.critical_path.size(); ++k) {
      EXPECT_EQ(r.end[static_cast<std::size_t>(r.critical_path[k - 1])], r.start[static_cast<std::size_t>(r.critical_path[k])]);
    }
  }
}

TEST(Simulate, MakespanBoundsAndOracle) {
  testing::Rng rng(29);
  const SystemConfig sys = testing::flat_system(8, 50.0, 1e-6);
  for (int i = 0; i < 300; ++i) {
    const Trace t = testing::random_trace(rng, testing::uniform(rng, 0, 12), sys);
    const std::vector<double> d = durations(t, sys);
    const SimulationResult r = simulate(t, sys);
    EXPECT_EQ(r.total_time, testing::oracle_makespan(t, d) / 1e9);
    double comp_sum = 0, comm_sum = 0, total = 0;
    for (std::size_t k = 0; k < d.size(); ++k) {
      (t.nodes[k].type == TraceNodeType::kComp ? comp_sum : comm_sum) += d[k];
      total += d[k];
      for (int dep : t.nodes[k].deps) EXPECT_GE(r.start[k], r.end[static_cast<std::size_t>(dep)]);
    }
    const double lower = std::max({testing::longest_path(t, d), comp_sum, comm_sum}) / 1e9;
    EXPECT_GE(r.total_time, lower * (1 - 1e-12));
    EXPECT_LE(r.total_time, total / 1e9 * (1 + 1e-12));
    // Deterministic.
    EXPECT_EQ(simulate(t, sys).end, r.end);
  }
}

TEST(Simulate, RejectsOversizedGroup) {
  const Trace t = trace_of({comm(0, CollectiveKind::kAllReduce, 100, 16)});
  EXPECT_THROW(simulate(t, testing::flat_system(4)), SimulationError);
}

}  // namespace
}  // namespace hlosim
