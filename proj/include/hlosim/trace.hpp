// Copyright 2026 The hlosim Authors.
// SPDX-License-Identifier: Apache-2.0
//
// COMP/COMM execution trace: construction from a sliced workload and the
// versioned JSON interchange format.
//
// Schema v1:
//   {"version": 1, "system": str,
//    "nodes": [{"id": int, "type": "COMP"|"COMM", "name": str,
//               "latency_ns": int,                      // COMP only
//               "comm_kind": str, "comm_bytes": int,     // COMM only
//               "group_size": int,                       // COMM only
//               "deps": [int]}]}

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hlosim/estimators.hpp"
#include "hlosim/graph.hpp"
#include "hlosim/slicer.hpp"
#include "hlosim/system.hpp"

namespace hlosim {

enum class TraceNodeType { kComp, kComm };

struct TraceNode {
  int id = 0;
  TraceNodeType type = TraceNodeType::kComp;
  std::string name;
  std::optional<std::int64_t> latency_ns;
  std::optional<CollectiveKind> comm_kind;
  std::optional<std::int64_t> comm_bytes;
  std::optional<int> group_size;
  std::vector<int> deps;

  bool operator==(const TraceNode&) const = default;
};

struct Trace {
  int version = 1;
  std::string system_name;
  std::vector<TraceNode> nodes;

  bool operator==(const Trace&) const = default;
};

class TraceFormatError : public std::runtime_error {
 public:
  TraceFormatError(std::string path, const std::string& msg)
      : std::runtime_error(path + ": " + msg), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class TraceBuildError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Payload of a collective as seen by one device.
inline std::int64_t comm_bytes(const HloOperation& op) {
  const auto kind = collective_kind(op);
  if (!kind) throw TraceBuildError(op.op_name + " is not a collective");
  const auto& types = *kind == CollectiveKind::kAllGather ? op.result_types : op.operand_types;
  std::int64_t total = 0;
  for (const TensorType& t : types) {
    const std::int64_t b = tensor_bytes(t);
    if (total > std::numeric_limits<std::int64_t>::max() - b) {
      throw OverflowError(op.op_name + ": payload overflows 64 bits");
    }
    total += b;
  }
  return total;
}

// Seconds to integer nanoseconds, rounding half up.
inline std::int64_t seconds_to_ns(double seconds) {
  const double ns = std::floor(seconds * 1e9 + 0.5);
  if (!(ns >= 0.0) || ns >= 9.2e18) {
    throw OverflowError("latency of " + std::to_string(seconds) + " s does not fit the trace");
  }
  return static_cast<std::int64_t>(ns);
}

// `results[i]` is the estimate for `s.regions[i]`.
inline Trace build_trace(const SlicedWorkload& s, const std::vector<EstimatorResult>& results,
                         const SystemConfig& sys) {
  if (results.size() != s.regions.size()) {
    throw TraceBuildError("missing estimate: " + std::to_string(s.regions.size()) + " regions but " +
                          std::to_string(results.size()) + " results");
  }
  Trace t;
  t.system_name = sys.name;
  const std::vector<SliceRef> order = slice_order(s);
  std::map<SliceRef, int> id_of;
  for (std::size_t i = 0; i < order.size(); ++i) id_of[order[i]] = static_cast<int>(i);
  std::map<SliceRef, std::set<int>> deps;
  for (const SliceEdge& e : s.deps) deps[e.to].insert(id_of.at(e.from));

  for (std::size_t i = 0; i < order.size(); ++i) {
    const SliceRef ref = order[i];
    TraceNode n;
    n.id = static_cast<int>(i);
    const auto& d = deps[ref];
    n.deps.assign(d.begin(), d.end());
    if (ref.kind == SliceKind::kRegion) {
      const ComputeRegion& r = s.regions[static_cast<std::size_t>(ref.index)];
      n.type = TraceNodeType::kComp;
      n.name = "region" + std::to_string(r.region_id) + "." + r.canonical_key.substr(0, 8);
      n.latency_ns = seconds_to_ns(results[static_cast<std::size_t>(ref.index)].latency);
    } else {
      const HloOperation& op = s.comm_ops[static_cast<std::size_t>(ref.index)];
      n.type = TraceNodeType::kComm;
      n.name = "comm" + std::to_string(ref.index) + "." + std::string(op.short_name());
      n.comm_kind = collective_kind(op);
      n.comm_bytes = comm_bytes(op);
      n.group_size = replica_group_size(op, sys);
    }
    t.nodes.push_back(std::move(n));
  }
  return t;
}

inline std::string serialize_trace(const Trace& t) {
  nlohmann::ordered_json j;
  j["version"] = t.version;
  j["system"] = t.system_name;
  nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
  for (const TraceNode& n : t.nodes) {
    nlohmann::ordered_json o;
    o["id"] = n.id;
    o["type"] = n.type == TraceNodeType::kComp ? "COMP" : "COMM";
    o["name"] = n.name;
    if (n.latency_ns) o["latency_ns"] = *n.latency_ns;
    if (n.comm_kind) o["comm_kind"] = std::string(collective_kind_name(*n.comm_kind));
    if (n.comm_bytes) o["comm_bytes"] = *n.comm_bytes;
    if (n.group_size) o["group_size"] = *n.group_size;
    o["deps"] = n.deps;
    nodes.push_back(std::move(o));
  }
  j["nodes"] = std::move(nodes);
  return j.dump(2) + "\n";
}

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& obj, const std::string& key,
                                     const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw TraceFormatError(path + "/" + key, "missing required field '" + key + "'");
  return *it;
}

inline std::int64_t require_int(const nlohmann::json& obj, const std::string& key,
                                const std::string& path, std::int64_t min_value) {
  const nlohmann::json& v = require(obj, key, path);
  if (!v.is_number_integer()) throw TraceFormatError(path + "/" + key, "expected an integer");
  const std::int64_t x = v.get<std::int64_t>();
  if (x < min_value) {
    throw TraceFormatError(path + "/" + key, "must be >= " + std::to_string(min_value));
  }
  return x;
}

inline void forbid(const nlohmann::json& obj, const std::string& key, const std::string& path,
                   const char* node_type) {
  if (obj.contains(key)) {
    throw TraceFormatError(path + "/" + key, std::string("field not allowed on ") + node_type + " nodes");
  }
}

}  // namespace detail

inline Trace parse_trace(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw TraceFormatError("", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw TraceFormatError("", "top level must be an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "version" && key != "system" && key != "nodes") {
      throw TraceFormatError("/" + key, "unknown field");
    }
  }
  Trace t;
  t.version = static_cast<int>(detail::require_int(j, "version", "", 0));
  if (t.version != 1) throw TraceFormatError("/version", "unsupported trace version");
  const nlohmann::json& sys = detail::require(j, "system", "");
  if (!sys.is_string()) throw TraceFormatError("/system", "expected a string");
  t.system_name = sys.get<std::string>();
  const nlohmann::json& nodes = detail::require(j, "nodes", "");
  if (!nodes.is_array()) throw TraceFormatError("/nodes", "expected an array");

  static const std::set<std::string> kKnown = {"id", "type", "name", "latency_ns", "comm_kind",
                                               "comm_bytes", "group_size", "deps"};
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string path = "/nodes/" + std::to_string(i);
    const nlohmann::json& o = nodes[i];
    if (!o.is_object()) throw TraceFormatError(path, "expected an object");
    for (const auto& [key, _] : o.items()) {
      if (!kKnown.contains(key)) throw TraceFormatError(path + "/" + key, "unknown field");
    }
    TraceNode n;
    n.id = static_cast<int>(detail::require_int(o, "id", path, 0));
    if (n.id != static_cast<int>(i)) {
      throw TraceFormatError(path + "/id", "node ids must be dense and ordered from 0");
    }
    const nlohmann::json& type = detail::require(o, "type", path);
    if (!type.is_string()) throw TraceFormatError(path + "/type", "expected a string");
    const nlohmann::json& name = detail::require(o, "name", path);
    if (!name.is_string()) throw TraceFormatError(path + "/name", "expected a string");
    n.name = name.get<std::string>();
    if (type == "COMP") {
      n.type = TraceNodeType::kComp;
      n.latency_ns = detail::require_int(o, "latency_ns", path, 0);
      for (const char* k : {"comm_kind", "comm_bytes", "group_size"}) detail::forbid(o, k, path, "COMP");
    } else if (type == "COMM") {
      n.type = TraceNodeType::kComm;
      detail::forbid(o, "latency_ns", path, "COMM");
      const nlohmann::json& kind = detail::require(o, "comm_kind", path);
      if (!kind.is_string()) throw TraceFormatError(path + "/comm_kind", "expected a string");
      n.comm_kind = collective_kind_from_name(kind.get<std::string>());
      if (!n.comm_kind) {
        throw TraceFormatError(path + "/comm_kind", "unknown comm_kind '" + kind.get<std::string>() + "'");
      }
      n.comm_bytes = detail::require_int(o, "comm_bytes", path, 0);
      n.group_size = static_cast<int>(detail::require_int(o, "group_size", path, 1));
    } else {
      throw TraceFormatError(path + "/type", "expected \"COMP\" or \"COMM\"");
    }
    const nlohmann::json& deps = detail::require(o, "deps", path);
    if (!deps.is_array()) throw TraceFormatError(path + "/deps", "expected an array");
    std::set<int> seen;
    for (std::size_t d = 0; d < deps.size(); ++d) {
      const std::string dpath = path + "/deps/" + std::to_string(d);
      if (!deps[d].is_number_integer()) throw TraceFormatError(dpath, "expected an integer");
      const auto dep = deps[d].get<std::int64_t>();
      if (dep < 0 || dep >= n.id) {
        throw TraceFormatError(dpath, "dependency on node " + std::to_string(dep) +
                                          " does not precede node " + std::to_string(n.id) +
                                          " (cyclic or forward reference)");
      }
      if (!seen.insert(static_cast<int>(dep)).second) {
        throw TraceFormatError(dpath, "duplicate dependency");
      }
      n.deps.push_back(static_cast<int>(dep));
    }
    t.nodes.push_back(std::move(n));
  }
  return t;
}

}  // namespace hlosim
