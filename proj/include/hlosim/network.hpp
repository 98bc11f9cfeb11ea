// Copyright 2026 The hlosim Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Analytical collective costs and a two-resource list scheduler over a trace.
//
// Collectives use ring algorithms with per-link bandwidth `beta` and per-hop
// latency `alpha`; for a group of p devices and n payload bytes:
//
//   all-gather / reduce-scatter / all-to-all : (p-1)/p * n/beta + (p-1)*alpha
//   all-reduce                               : twice the above
//   collective-permute                       : n/beta + alpha

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hlosim/system.hpp"
#include "hlosim/trace.hpp"

namespace hlosim {

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double effective_bandwidth(int group_size, const SystemConfig& sys) {
  if (sys.topology == Topology::kTwoLevelHierarchy && group_size > sys.devices_per_node) {
    if (!sys.internode_bandwidth) {
      throw ConfigError("system '" + sys.name + "': a group of " + std::to_string(group_size) +
                        " spans nodes but internode_bandwidth_gbs is not set");
    }
    return *sys.internode_bandwidth;
  }
  return sys.intranode_bandwidth;
}

inline double collective_latency(CollectiveKind kind, double bytes, int group_size,
                                 const SystemConfig& sys) {
  if (group_size < 1) throw SimulationError("collective group size must be >= 1");
  if (group_size > sys.device_count) {
    throw SimulationError("collective group of " + std::to_string(group_size) + " exceeds " +
                          std::to_string(sys.device_count) + " devices");
  }
  if (bytes < 0.0) throw SimulationError("negative collective payload");
  if (group_size == 1) return 0.0;
  const double beta = effective_bandwidth(group_size, sys);
  const double alpha = sys.link_latency;
  const double p = static_cast<double>(group_size);
  const double ring_bw = (p - 1.0) / p * bytes / beta;
  const double ring_lat = (p - 1.0) * alpha;
  switch (kind) {
    case CollectiveKind::kAllReduce:
      return 2.0 * (ring_bw + ring_lat);
    case CollectiveKind::kAllGather:
    case CollectiveKind::kReduceScatter:
    case CollectiveKind::kAllToAll:
      return ring_bw + ring_lat;
    case CollectiveKind::kCollectivePermute:
      return bytes / beta + alpha;
  }
  return 0.0;
}

// Node duration in nanoseconds. The scheduler clock runs in ns so integral
// COMP latencies add exactly.
inline double node_duration_ns(const TraceNode& n, const SystemConfig& sys) {
  if (n.type == TraceNodeType::kComp) return static_cast<double>(n.latency_ns.value_or(0));
  return collective_latency(*n.comm_kind, static_cast<double>(n.comm_bytes.value_or(0)),
                            n.group_size.value_or(1), sys) *
         1e9;
}

inline double node_duration(const TraceNode& n, const SystemConfig& sys) {
  return node_duration_ns(n, sys) / 1e9;
}

struct SimulationResult {
  std::vector<double> start;  // seconds
  std::vector<double> end;
  // Node that ran on the same resource immediately before, or -1.
  std::vector<int> resource_predecessor;
  double total_time = 0.0;
  double comp_time_total = 0.0;
  double comm_time_total = 0.0;
  // Makespan minus compute busy time: communication not hidden behind compute.
  double exposed_comm_time = 0.0;
  std::vector<int> critical_path;
};

inline std::vector<int> critical_path(const SimulationResult& result, const Trace& trace);

// Greedy non-preemptive list scheduling with one compute and one network
// resource. At every instant the lowest-id ready node whose resource is idle
// starts next; zero-length nodes finish immediately and may release further
// nodes at the same instant.
inline SimulationResult simulate(const Trace& t, const SystemConfig& sys) {
  const std::size_t n = t.nodes.size();
  SimulationResult r;
  r.start.assign(n, 0.0);
  r.end.assign(n, 0.0);
  r.resource_predecessor.assign(n, -1);
  // Times below are in ns until the final conversion.
  std::vector<double> duration(n);
  double comp_ns = 0.0;
  double comm_ns = 0.0;
  std::vector<int> pending(n, 0);
  std::vector<std::vector<int>> succ(n);
  for (std::size_t i = 0; i < n; ++i) {
    const TraceNode& node = t.nodes[i];
    for (int d : node.deps) {
      if (d < 0 || static_cast<std::size_t>(d) >= i) {
        throw SimulationError("trace node " + std::to_string(i) + " has a non-preceding dependency");
      }
      succ[static_cast<std::size_t>(d)].push_back(static_cast<int>(i));
    }
    pending[i] = static_cast<int>(node.deps.size());
    duration[i] = node_duration_ns(node, sys);
    (node.type == TraceNodeType::kComp ? comp_ns : comm_ns) += duration[i];
  }

  auto resource_of = [&](std::size_t i) { return t.nodes[i].type == TraceNodeType::kComp ? 0 : 1; };
  std::set<int> ready[2];
  std::optional<int> running[2];
  int last_started[2] = {-1, -1};
  std::size_t done = 0;

  auto release = [&](int v) {
    ++done;
    for (int s : succ[static_cast<std::size_t>(v)]) {
      if (--pending[static_cast<std::size_t>(s)] == 0) ready[resource_of(static_cast<std::size_t>(s))].insert(s);
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (pending[i] == 0) ready[resource_of(i)].insert(static_cast<int>(i));
  }

  double now = 0.0;
  while (done < n) {
    while (true) {
      int pick = -1;
      for (int res = 0; res < 2; ++res) {
        if (running[res] || ready[res].empty()) continue;
        const int head = *ready[res].begin();
        if (pick < 0 || head < pick) pick = head;
      }
      if (pick < 0) break;
      const auto pi = static_cast<std::size_t>(pick);
      const int res = resource_of(pi);
      ready[res].erase(ready[res].begin());
      r.start[pi] = now;
      r.end[pi] = now + duration[pi];
      r.resource_predecessor[pi] = last_started[res];
      last_started[res] = pick;
      if (duration[pi] == 0.0) {
        release(pick);
      } else {
        running[res] = pick;
      }
    }
    if (!running[0] && !running[1]) {
      if (done < n) throw SimulationError("trace deadlocked; dependencies are not acyclic");
      break;
    }
    double next = 0.0;
    bool first = true;
    for (int res = 0; res < 2; ++res) {
      if (!running[res]) continue;
      const double e = r.end[static_cast<std::size_t>(*running[res])];
      if (first || e < next) next = e;
      first = false;
    }
    now = next;
    std::vector<int> finishing;
    for (int res = 0; res < 2; ++res) {
      if (running[res] && r.end[static_cast<std::size_t>(*running[res])] == now) {
        finishing.push_back(*running[res]);
        running[res].reset();
      }
    }
    std::sort(finishing.begin(), finishing.end());
    for (int v : finishing) release(v);
  }

  for (std::size_t i = 0; i < n; ++i) {
    r.total_time = std::max(r.total_time, r.end[i]);
    r.start[i] /= 1e9;
    r.end[i] /= 1e9;
  }
  r.total_time /= 1e9;
  r.comp_time_total = comp_ns / 1e9;
  r.comm_time_total = comm_ns / 1e9;
  r.exposed_comm_time = std::max(0.0, r.total_time - r.comp_time_total);
  r.critical_path = critical_path(r, t);
  return r;
}

// Walks back from the node that defines the makespan, each step taking the
// dependency or resource predecessor whose end equals the current start.
inline std::vector<int> critical_path(const SimulationResult& result, const Trace& trace) {
  const std::size_t n = trace.nodes.size();
  if (n == 0) return {};
  int cur = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (result.end[i] > result.end[static_cast<std::size_t>(cur)]) cur = static_cast<int>(i);
  }
  std::vector<int> path{cur};
  while (true) {
    const auto ci = static_cast<std::size_t>(cur);
    int best = -1;
    auto consider = [&](int p) {
      if (p < 0) return;
      if (result.end[static_cast<std::size_t>(p)] == result.start[ci] && (best < 0 || p < best)) best = p;
    };
    for (int d : trace.nodes[ci].deps) consider(d);
    consider(result.resource_predecessor[ci]);
    if (best < 0) break;
    path.push_back(best);
    cur = best;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace hlosim
