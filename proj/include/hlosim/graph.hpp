// Copyright 2026 The hlosim Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Dependency DAG over the top-level operations of @main.

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "hlosim/ir.hpp"
#include "hlosim/system.hpp"

namespace hlosim {

enum class OpClass { kCompute, kCommunication, kMeta };

inline std::string_view op_class_name(OpClass c) {
  switch (c) {
    case OpClass::kCompute: return "compute";
    case OpClass::kCommunication: return "communication";
    case OpClass::kMeta: return "meta";
  }
  return "?";
}

enum class CollectiveKind { kAllReduce, kAllGather, kReduceScatter, kAllToAll, kCollectivePermute };

inline std::string_view collective_kind_name(CollectiveKind k) {
  switch (k) {
    case CollectiveKind::kAllReduce: return "AllReduce";
    case CollectiveKind::kAllGather: return "AllGather";
    case CollectiveKind::kReduceScatter: return "ReduceScatter";
    case CollectiveKind::kAllToAll: return "AllToAll";
    case CollectiveKind::kCollectivePermute: return "CollectivePermute";
  }
  return "?";
}

inline std::optional<CollectiveKind> collective_kind_from_name(std::string_view s) {
  for (CollectiveKind k : {CollectiveKind::kAllReduce, CollectiveKind::kAllGather,
                           CollectiveKind::kReduceScatter, CollectiveKind::kAllToAll,
                           CollectiveKind::kCollectivePermute}) {
    if (collective_kind_name(k) == s) return k;
  }
  return std::nullopt;
}

// Collective semantics of an operation, if it communicates. Ops outside the
// five-collective vocabulary whose names still mark them as collectives (for
// example "collective_broadcast") are costed as point-to-point transfers.
inline std::optional<CollectiveKind> collective_kind(const HloOperation& op) {
  const std::string_view n = op.short_name();
  if (n == "all_reduce") return CollectiveKind::kAllReduce;
  if (n == "all_gather") return CollectiveKind::kAllGather;
  if (n == "reduce_scatter") return CollectiveKind::kReduceScatter;
  if (n == "all_to_all") return CollectiveKind::kAllToAll;
  if (n == "collective_permute") return CollectiveKind::kCollectivePermute;
  if (n.starts_with("all_reduce")) return CollectiveKind::kAllReduce;
  if (n.starts_with("all_gather")) return CollectiveKind::kAllGather;
  if (n.starts_with("all_to_all")) return CollectiveKind::kAllToAll;
  if (n.find("reduce_scatter") != std::string_view::npos) return CollectiveKind::kReduceScatter;
  if (n.starts_with("all_") || n.find("collective") != std::string_view::npos) {
    return CollectiveKind::kCollectivePermute;
  }
  return std::nullopt;
}

inline OpClass classify(const HloOperation& op) {
  const std::string_view n = op.short_name();
  if (n == "constant" || n == "iota" || n == "return") return OpClass::kMeta;
  if (collective_kind(op)) return OpClass::kCommunication;
  return OpClass::kCompute;
}

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Producer of an SSA value: node index and result index, or node == -1 for a
// function argument (result = argument index).
struct ValueRef {
  int node = -1;
  int result = 0;
  auto operator<=>(const ValueRef&) const = default;
};

struct GraphEdge {
  int from = 0;
  int to = 0;
  bool operator==(const GraphEdge&) const = default;
};

struct GraphNode {
  HloOperation op;
  OpClass cls = OpClass::kCompute;
};

struct WorkloadGraph {
  std::vector<GraphNode> nodes;
  // One edge per operand reference (including references made from inside
  // nested regions) that resolves to a definition in the body.
  std::vector<GraphEdge> edges;
  std::vector<FunctionArgument> arguments;
  std::vector<std::string> return_names;
  std::unordered_map<std::string, ValueRef> values;
  // Per node, the distinct values it reads from outside itself, in operand order.
  std::vector<std::vector<ValueRef>> inputs;
  // Nodes consuming each value; returned values are flagged separately.
  std::map<ValueRef, std::vector<int>> consumers;
  std::set<ValueRef> returned;

  std::size_t size() const { return nodes.size(); }

  const TensorType& value_type(ValueRef v) const {
    if (v.node < 0) return arguments.at(static_cast<std::size_t>(v.result)).type;
    return nodes.at(static_cast<std::size_t>(v.node)).op.result_types.at(static_cast<std::size_t>(v.result));
  }

  std::vector<int> predecessors(int n) const {
    std::set<int> s;
    for (const GraphEdge& e : edges) {
      if (e.to == n) s.insert(e.from);
    }
    return {s.begin(), s.end()};
  }
};

namespace detail {

// Names read by `op` (and its nested region) that are not defined inside it.
inline void collect_external_uses(const HloOperation& op, std::vector<std::string>& out) {
  for (const std::string& n : op.operand_names) out.push_back(n);
  if (!op.has_region) return;
  std::unordered_set<std::string> local;
  for (const BlockArgument& a : op.region_args) local.insert(a.name);
  for (const HloOperation& inner : op.region_ops) {
    std::vector<std::string> uses;
    collect_external_uses(inner, uses);
    for (std::string& u : uses) {
      if (!local.contains(u)) out.push_back(std::move(u));
    }
    for (const std::string& r : inner.result_names) local.insert(r);
  }
}

}  // namespace detail

inline WorkloadGraph build_graph(const HloModule& m) {
  const HloFunction& fn = m.main();
  WorkloadGraph g;
  g.arguments = fn.arguments;
  g.return_names = fn.return_names;
  for (std::size_t i = 0; i < fn.arguments.size(); ++i) {
    g.values[fn.arguments[i].name] = ValueRef{-1, static_cast<int>(i)};
  }
  g.inputs.resize(fn.body.size());
  for (std::size_t i = 0; i < fn.body.size(); ++i) {
    const HloOperation& op = fn.body[i];
    const int node = static_cast<int>(i);
    std::vector<std::string> uses;
    detail::collect_external_uses(op, uses);
    std::set<ValueRef> seen;
    for (const std::string& u : uses) {
      auto it = g.values.find(u);
      if (it == g.values.end()) {
        throw GraphError("operation " + op.op_name + " reads undefined value " + u);
      }
      const ValueRef v = it->second;
      if (v.node >= 0) g.edges.push_back({v.node, node});
      if (seen.insert(v).second) {
        g.inputs[i].push_back(v);
        g.consumers[v].push_back(node);
      }
    }
    for (std::size_t r = 0; r < op.result_names.size(); ++r) {
      g.values[op.result_names[r]] = ValueRef{node, static_cast<int>(r)};
    }
    g.nodes.push_back({op, classify(op)});
  }
  for (const std::string& r : fn.return_names) {
    auto it = g.values.find(r);
    if (it == g.values.end()) throw GraphError("return of undefined value " + r);
    g.returned.insert(it->second);
  }
  return g;
}

// Kahn's algorithm with the smallest ready node index taken first.
inline std::vector<int> topological_order(const WorkloadGraph& g) {
  const std::size_t n = g.size();
  std::vector<int> indegree(n, 0);
  std::vector<std::vector<int>> succ(n);
  for (const GraphEdge& e : g.edges) {
    ++indegree[static_cast<std::size_t>(e.to)];
    succ[static_cast<std::size_t>(e.from)].push_back(e.to);
  }
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push(static_cast<int>(i));
  }
  std::vector<int> order;
  order.reserve(n);
  while (!ready.empty()) {
    const int v = ready.top();
    ready.pop();
    order.push_back(v);
    for (int s : succ[static_cast<std::size_t>(v)]) {
      if (--indegree[static_cast<std::size_t>(s)] == 0) ready.push(s);
    }
  }
  if (order.size() != n) throw GraphError("cycle detected in workload graph");
  return order;
}

inline int replica_group_size(const HloOperation& op, const SystemConfig& sys) {
  const Attribute* a = op.find_attribute("replica_groups");
  int size = sys.device_count;
  if (a) {
    if (const auto* groups = std::get_if<IntListList>(&a->value)) {
      if (!groups->empty()) {
        size = static_cast<int>(groups->front().size());
        for (const IntList& grp : *groups) {
          if (static_cast<int>(grp.size()) != size) {
            throw GraphError(op.op_name + ": ragged replica_groups");
          }
        }
      }
    } else if (const auto* flat = std::get_if<IntList>(&a->value)) {
      if (!flat->empty()) size = static_cast<int>(flat->size());
    }
  }
  if (size < 1) throw GraphError(op.op_name + ": empty replica group");
  if (size > sys.device_count) {
    throw GraphError(op.op_name + ": replica group of " + std::to_string(size) +
                     " exceeds the system's " + std::to_string(sys.device_count) + " devices");
  }
  return size;
}

// Text edge list for debugging.
inline std::string dump_edge_list(const WorkloadGraph& g) {
  std::string out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    out += "node " + std::to_string(i) + " " + g.nodes[i].op.op_name + " " +
           std::string(op_class_name(g.nodes[i].cls)) + "\n";
  }
  for (const GraphEdge& e : g.edges) {
    out += std::to_string(e.from) + " -> " + std::to_string(e.to) + "\n";
  }
  return out;
}

}  // namespace hlosim
