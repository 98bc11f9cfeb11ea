// Copyright 2026 The hlosim Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Partitioning of a workload graph into compute regions and communication
// nodes. Two strategies are provided:
//
//  * linear_split walks the topological order and closes the current region
//    at every collective, so regions and collectives alternate.
//  * dependency_aware_split makes every compute operation its own region and
//    keeps exactly the data dependencies between slices, which leaves the
//    scheduler free to overlap independent work.

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "hlosim/graph.hpp"
#include "hlosim/printer.hpp"

namespace hlosim {

struct ComputeRegion {
  int region_id = 0;
  std::vector<int> member_ops;  // graph node indices, ascending
  std::vector<HloOperation> ops;
  std::vector<TensorType> boundary_inputs;
  std::vector<TensorType> boundary_outputs;
  std::string canonical_text;
  std::string canonical_key;  // 16 lowercase hex digits
};

enum class SliceKind { kRegion, kComm };

struct SliceRef {
  SliceKind kind = SliceKind::kRegion;
  int index = 0;  // into regions or comm_nodes
  auto operator<=>(const SliceRef&) const = default;
};

struct SliceEdge {
  SliceRef from;
  SliceRef to;
  auto operator<=>(const SliceEdge&) const = default;
};

struct SlicedWorkload {
  std::vector<ComputeRegion> regions;
  std::vector<int> comm_nodes;
  std::vector<HloOperation> comm_ops;  // parallel to comm_nodes
  std::vector<SliceEdge> deps;         // sorted, unique
};

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex_digest(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

struct CanonicalWriter {
  const WorkloadGraph& g;
  const std::map<int, int>& member_pos;
  const std::map<ValueRef, int>& input_pos;

  std::string ref_for_outer(const std::string& name) const {
    const ValueRef v = g.values.at(name);
    if (v.node >= 0) {
      auto it = member_pos.find(v.node);
      if (it != member_pos.end()) return "L" + std::to_string(it->second) + "." + std::to_string(v.result);
    }
    return "E" + std::to_string(input_pos.at(v));
  }

  // `locals` maps names defined inside enclosing regions to positional tags.
  void write_op(std::string& out, const HloOperation& op,
                std::vector<std::unordered_map<std::string, std::string>>& locals) const {
    out += op.op_name;
    out += '(';
    for (std::size_t i = 0; i < op.operand_names.size(); ++i) {
      if (i) out += ',';
      out += resolve(op.operand_names[i], locals);
    }
    out += ')';
    out += print_attr_dict(op.attributes);
    out += ':';
    for (const TensorType& t : op.operand_types) out += to_string(t);
    out += "->";
    for (const TensorType& t : op.result_types) out += to_string(t);
    if (op.has_region) {
      locals.emplace_back();
      const std::string depth = std::to_string(locals.size());
      out += "{^";
      for (std::size_t i = 0; i < op.region_args.size(); ++i) {
        locals.back()[op.region_args[i].name] = "A" + depth + "." + std::to_string(i);
        out += to_string(op.region_args[i].type);
      }
      out += ':';
      for (std::size_t j = 0; j < op.region_ops.size(); ++j) {
        write_op(out, op.region_ops[j], locals);
        for (std::size_t r = 0; r < op.region_ops[j].result_names.size(); ++r) {
          locals.back()[op.region_ops[j].result_names[r]] =
              "I" + depth + "." + std::to_string(j) + "." + std::to_string(r);
        }
        out += ';';
      }
      out += '}';
      locals.pop_back();
    }
  }

  std::string resolve(const std::string& name,
                      const std::vector<std::unordered_map<std::string, std::string>>& locals) const {
    for (auto it = locals.rbegin(); it != locals.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return f->second;
    }
    return ref_for_outer(name);
  }
};

}  // namespace detail

// Builds a region from graph nodes. Boundary inputs are values read from
// outside the member set (arguments, other slices, Meta producers); boundary
// outputs are member results read outside the set or returned.
inline ComputeRegion make_region(const WorkloadGraph& g, std::vector<int> members, int region_id) {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  ComputeRegion r;
  r.region_id = region_id;
  r.member_ops = members;
  std::map<int, int> member_pos;
  for (std::size_t i = 0; i < members.size(); ++i) member_pos[members[i]] = static_cast<int>(i);

  std::set<ValueRef> inputs;
  for (int m : members) {
    for (const ValueRef& v : g.inputs.at(static_cast<std::size_t>(m))) {
      if (v.node < 0 || !member_pos.contains(v.node)) inputs.insert(v);
    }
  }
  std::map<ValueRef, int> input_pos;
  for (const ValueRef& v : inputs) {
    input_pos[v] = static_cast<int>(r.boundary_inputs.size());
    r.boundary_inputs.push_back(g.value_type(v));
  }

  const detail::CanonicalWriter writer{g, member_pos, input_pos};
  std::string text;
  for (int m : members) {
    const HloOperation& op = g.nodes.at(static_cast<std::size_t>(m)).op;
    r.ops.push_back(op);
    std::vector<std::unordered_map<std::string, std::string>> locals;
    writer.write_op(text, op, locals);
    text += " out[";
    for (std::size_t res = 0; res < op.result_names.size(); ++res) {
      const ValueRef v{m, static_cast<int>(res)};
      bool escapes = g.returned.contains(v);
      if (auto it = g.consumers.find(v); it != g.consumers.end()) {
        for (int c : it->second) escapes = escapes || !member_pos.contains(c);
      }
      if (escapes) {
        r.boundary_outputs.push_back(op.result_types[res]);
        text += std::to_string(res) + ",";
      }
    }
    text += "]\n";
  }
  r.canonical_text = std::move(text);
  r.canonical_key = hex_digest(fnv1a64(r.canonical_text));
  return r;
}

namespace detail {

// Non-meta predecessors of node `v`, looking through Meta nodes.
inline std::set<int> projected_preds(const WorkloadGraph& g,
                                     const std::vector<std::vector<int>>& preds, int v) {
  std::set<int> out;
  std::vector<int> stack(preds[static_cast<std::size_t>(v)]);
  std::set<int> seen;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    if (!seen.insert(u).second) continue;
    if (g.nodes[static_cast<std::size_t>(u)].cls == OpClass::kMeta) {
      for (int p : preds[static_cast<std::size_t>(u)]) stack.push_back(p);
    } else {
      out.insert(u);
    }
  }
  return out;
}

inline std::vector<std::vector<int>> pred_lists(const WorkloadGraph& g) {
  std::vector<std::vector<int>> preds(g.size());
  for (const GraphEdge& e : g.edges) preds[static_cast<std::size_t>(e.to)].push_back(e.from);
  return preds;
}

inline void finish_slicing(const WorkloadGraph& g, SlicedWorkload& s) {
  std::unordered_map<int, SliceRef> owner;
  for (std::size_t i = 0; i < s.regions.size(); ++i) {
    for (int m : s.regions[i].member_ops) owner[m] = {SliceKind::kRegion, static_cast<int>(i)};
  }
  for (std::size_t i = 0; i < s.comm_nodes.size(); ++i) {
    owner[s.comm_nodes[i]] = {SliceKind::kComm, static_cast<int>(i)};
    s.comm_ops.push_back(g.nodes[static_cast<std::size_t>(s.comm_nodes[i])].op);
  }
  const auto preds = pred_lists(g);
  std::set<SliceEdge> deps;
  for (std::size_t v = 0; v < g.size(); ++v) {
    auto to = owner.find(static_cast<int>(v));
    if (to == owner.end()) continue;
    for (int u : projected_preds(g, preds, static_cast<int>(v))) {
      const SliceRef from = owner.at(u);
      if (from != to->second) deps.insert({from, to->second});
    }
  }
  s.deps.assign(deps.begin(), deps.end());
}

}  // namespace detail

inline SlicedWorkload linear_split(const WorkloadGraph& g) {
  SlicedWorkload s;
  std::vector<int> current;
  auto flush = [&] {
    if (current.empty()) return;
    s.regions.push_back(make_region(g, current, static_cast<int>(s.regions.size())));
    current.clear();
  };
  for (int v : topological_order(g)) {
    switch (g.nodes[static_cast<std::size_t>(v)].cls) {
      case OpClass::kCompute:
        current.push_back(v);
        break;
      case OpClass::kCommunication:
        flush();
        s.comm_nodes.push_back(v);
        break;
      case OpClass::kMeta:
        break;
    }
  }
  flush();
  detail::finish_slicing(g, s);
  return s;
}

inline SlicedWorkload dependency_aware_split(const WorkloadGraph& g) {
  SlicedWorkload s;
  for (int v : topological_order(g)) {
    switch (g.nodes[static_cast<std::size_t>(v)].cls) {
      case OpClass::kCompute:
        s.regions.push_back(make_region(g, {v}, static_cast<int>(s.regions.size())));
        break;
      case OpClass::kCommunication:
        s.comm_nodes.push_back(v);
        break;
      case OpClass::kMeta:
        break;
    }
  }
  detail::finish_slicing(g, s);
  return s;
}

enum class SplitAlgorithm { kLinear, kDependency };

inline SlicedWorkload split(const WorkloadGraph& g, SplitAlgorithm a) {
  return a == SplitAlgorithm::kLinear ? linear_split(g) : dependency_aware_split(g);
}

// Slice order used for trace ids: topological over slice deps, ties broken by
// the smallest member node index.
inline std::vector<SliceRef> slice_order(const SlicedWorkload& s) {
  std::map<SliceRef, int> anchor;
  for (std::size_t i = 0; i < s.regions.size(); ++i) {
    const auto& m = s.regions[i].member_ops;
    anchor[{SliceKind::kRegion, static_cast<int>(i)}] = m.empty() ? -1 : m.front();
  }
  for (std::size_t i = 0; i < s.comm_nodes.size(); ++i) {
    anchor[{SliceKind::kComm, static_cast<int>(i)}] = s.comm_nodes[i];
  }
  std::map<SliceRef, int> indegree;
  std::map<SliceRef, std::vector<SliceRef>> succ;
  for (const auto& [ref, a] : anchor) indegree[ref] = 0;
  for (const SliceEdge& e : s.deps) {
    ++indegree[e.to];
    succ[e.from].push_back(e.to);
  }
  using Item = std::pair<int, SliceRef>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> ready;
  for (const auto& [ref, d] : indegree) {
    if (d == 0) ready.push({anchor[ref], ref});
  }
  std::vector<SliceRef> order;
  while (!ready.empty()) {
    const SliceRef r = ready.top().second;
    ready.pop();
    order.push_back(r);
    for (const SliceRef& t : succ[r]) {
      if (--indegree[t] == 0) ready.push({anchor[t], t});
    }
  }
  if (order.size() != anchor.size()) throw GraphError("cyclic slice dependencies");
  return order;
}

// True when, ordered by position, no two compute regions are adjacent.
inline bool is_alternating(const SlicedWorkload& s) {
  std::vector<std::pair<int, SliceKind>> seq;
  for (const ComputeRegion& r : s.regions) {
    if (!r.member_ops.empty()) seq.push_back({r.member_ops.front(), SliceKind::kRegion});
  }
  for (int c : s.comm_nodes) seq.push_back({c, SliceKind::kComm});
  std::sort(seq.begin(), seq.end());
  for (std::size_t i = 1; i < seq.size(); ++i) {
    if (seq[i].second == SliceKind::kRegion && seq[i - 1].second == SliceKind::kRegion) return false;
  }
  return true;
}

// Returns the first violation found, or nullopt when the slicing is a valid,
// dependency-preserving partition of `g`.
inline std::optional<std::string> validate_slicing(const SlicedWorkload& s, const WorkloadGraph& g) {
  const int n = static_cast<int>(g.size());
  std::map<int, SliceRef> owner;
  auto claim = [&](int node, SliceRef ref) -> std::optional<std::string> {
    if (node < 0 || node >= n) return "unknown node " + std::to_string(node);
    if (!owner.emplace(node, ref).second) {
      return "duplicate membership: node " + std::to_string(node);
    }
    return std::nullopt;
  };
  for (std::size_t i = 0; i < s.regions.size(); ++i) {
    const ComputeRegion& r = s.regions[i];
    if (r.member_ops.empty()) return "empty region " + std::to_string(i);
    for (int m : r.member_ops) {
      if (auto err = claim(m, {SliceKind::kRegion, static_cast<int>(i)})) return err;
      if (g.nodes[static_cast<std::size_t>(m)].cls != OpClass::kCompute) {
        return "class impurity: node " + std::to_string(m) + " in region " + std::to_string(i) +
               " is not a compute operation";
      }
    }
  }
  for (std::size_t i = 0; i < s.comm_nodes.size(); ++i) {
    const int c = s.comm_nodes[i];
    if (auto err = claim(c, {SliceKind::kComm, static_cast<int>(i)})) return err;
    if (g.nodes[static_cast<std::size_t>(c)].cls != OpClass::kCommunication) {
      return "class impurity: comm node " + std::to_string(c) + " is not a collective";
    }
  }
  for (int v = 0; v < n; ++v) {
    const OpClass cls = g.nodes[static_cast<std::size_t>(v)].cls;
    if (cls != OpClass::kMeta && !owner.contains(v)) {
      return "missing membership: node " + std::to_string(v);
    }
  }
  const std::set<SliceEdge> deps(s.deps.begin(), s.deps.end());
  for (const SliceEdge& e : deps) {
    for (const SliceRef& ref : {e.from, e.to}) {
      const std::size_t bound = ref.kind == SliceKind::kRegion ? s.regions.size() : s.comm_nodes.size();
      if (ref.index < 0 || static_cast<std::size_t>(ref.index) >= bound) return "dangling slice edge";
    }
  }
  try {
    slice_order(s);
  } catch (const GraphError&) {
    return "cyclic slice dependencies";
  }
  const auto preds = detail::pred_lists(g);
  for (int v = 0; v < n; ++v) {
    auto to = owner.find(v);
    if (to == owner.end()) continue;
    for (int u : detail::projected_preds(g, preds, v)) {
      const SliceRef from = owner.at(u);
      if (from != to->second && !deps.contains({from, to->second})) {
        return "dependency lost: node " + std::to_string(u) + " -> node " + std::to_string(v);
      }
    }
  }
  return std::nullopt;
}

}  // namespace hlosim
