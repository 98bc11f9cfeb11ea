// Copyright 2026 The hlosim Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Compute-region latency estimation behind a common interface, with results
// memoized per (hardware, toolchain, region) key.

#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "hlosim/hardware.hpp"
#include "hlosim/log.hpp"
#include "hlosim/parser.hpp"
#include "hlosim/slicer.hpp"

namespace hlosim {

class CostRuleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingLatencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Bound { kComputeBound, kMemoryBound };

inline std::string_view bound_name(Bound b) {
  return b == Bound::kComputeBound ? "compute" : "memory";
}

struct EstimatorResult {
  double latency = 0.0;  // seconds
  double flops = 0.0;
  double bytes_moved = 0.0;
  Bound bound = Bound::kMemoryBound;
  std::string provenance;  // "roofline", "table" or "fallback"

  bool operator==(const EstimatorResult&) const = default;
};

// ---- FLOP rules -------------------------------------------------------------

namespace detail {

inline double elements(const std::vector<TensorType>& ts) {
  double n = 0.0;
  for (const TensorType& t : ts) n += static_cast<double>(t.element_count());
  return n;
}

// Finds an integer list either as a top-level attribute or inside an opaque
// attribute such as `#stablehlo.dot<lhs_contracting_dimensions = [0], ...>`.
inline std::optional<IntList> find_int_list(const HloOperation& op, std::string_view key) {
  if (const Attribute* a = op.find_attribute(key)) {
    if (const auto* l = std::get_if<IntList>(&a->value)) return *l;
    if (const auto* i = std::get_if<std::int64_t>(&a->value)) return IntList{*i};
  }
  for (const Attribute& a : op.attributes) {
    const auto* o = std::get_if<OpaqueAttr>(&a.value);
    if (!o) continue;
    const std::string& t = o->text;
    std::size_t at = 0;
    while ((at = t.find(key, at)) != std::string::npos) {
      const bool boundary_ok = at == 0 || !(std::isalnum(static_cast<unsigned char>(t[at - 1])) || t[at - 1] == '_');
      std::size_t p = at + key.size();
      at = p;
      if (!boundary_ok) continue;
      while (p < t.size() && t[p] == ' ') ++p;
      if (p >= t.size() || t[p] != '=') continue;
      ++p;
      while (p < t.size() && t[p] == ' ') ++p;
      if (p >= t.size() || t[p] != '[') continue;
      const std::size_t close = t.find(']', p);
      if (close == std::string::npos) continue;
      AttributeValue v = AttrValueReader(t.substr(p, close - p + 1)).read();
      if (auto* l = std::get_if<IntList>(&v)) return *l;
    }
  }
  return std::nullopt;
}

inline std::optional<std::int64_t> find_int(const HloOperation& op, std::string_view key) {
  if (const Attribute* a = op.find_attribute(key)) {
    if (const auto* i = std::get_if<std::int64_t>(&a->value)) return *i;
  }
  return std::nullopt;
}

inline double product(const std::vector<std::int64_t>& shape, const IntList& dims) {
  double p = 1.0;
  for (std::int64_t d : dims) {
    if (d < 0 || static_cast<std::size_t>(d) >= shape.size()) {
      throw CostRuleError("dimension index " + std::to_string(d) + " out of range");
    }
    p *= static_cast<double>(shape[static_cast<std::size_t>(d)]);
  }
  return p;
}

inline double dot_general_flops(const HloOperation& op) {
  if (op.operand_types.size() < 2 || op.result_types.empty()) {
    throw CostRuleError(op.op_name + ": dot_general needs two operands and a result");
  }
  auto lhs_contract = find_int_list(op, "lhs_contracting_dimensions");
  auto rhs_contract = find_int_list(op, "rhs_contracting_dimensions");
  if (!lhs_contract || !rhs_contract) {
    throw CostRuleError(op.op_name + ": missing contracting dimension numbers");
  }
  const IntList lhs_batch = find_int_list(op, "lhs_batching_dimensions").value_or(IntList{});
  const auto& lhs = op.operand_types[0].shape;
  const auto& rhs = op.operand_types[1].shape;
  const IntList rhs_batch = find_int_list(op, "rhs_batching_dimensions").value_or(IntList{});
  const double batch = product(lhs, lhs_batch);
  const double k = product(lhs, *lhs_contract);
  product(rhs, *rhs_contract);  // range check
  product(rhs, rhs_batch);
  double m = 1.0;
  for (std::size_t d = 0; d < lhs.size(); ++d) {
    const auto di = static_cast<std::int64_t>(d);
    if (std::find(lhs_contract->begin(), lhs_contract->end(), di) == lhs_contract->end() &&
        std::find(lhs_batch.begin(), lhs_batch.end(), di) == lhs_batch.end()) {
      m *= static_cast<double>(lhs[d]);
    }
  }
  double n = 1.0;
  for (std::size_t d = 0; d < rhs.size(); ++d) {
    const auto di = static_cast<std::int64_t>(d);
    if (std::find(rhs_contract->begin(), rhs_contract->end(), di) == rhs_contract->end() &&
        std::find(rhs_batch.begin(), rhs_batch.end(), di) == rhs_batch.end()) {
      n *= static_cast<double>(rhs[d]);
    }
  }
  return 2.0 * batch * m * n * k;
}

struct ConvLayout {
  std::int64_t input_feature = -1;
  IntList kernel_spatial;
};

// Reads `[b, 0, 1, f]x[0, 1, i, o]->[b, 0, 1, f]` style dimension numbers.
inline std::optional<ConvLayout> parse_compact_conv(std::string_view t) {
  const auto open = t.find('[');
  if (open == std::string_view::npos) return std::nullopt;
  const auto x = t.find("]x[", open);
  if (x == std::string_view::npos) return std::nullopt;
  const auto kernel_close = t.find(']', x + 3);
  if (kernel_close == std::string_view::npos) return std::nullopt;
  auto tokens = [](std::string_view body) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : body) {
      if (c == ',') {
        out.push_back(cur);
        cur.clear();
      } else if (c != ' ') {
        cur += c;
      }
    }
    out.push_back(cur);
    return out;
  };
  const auto input = tokens(t.substr(open + 1, x - open - 1));
  const auto kernel = tokens(t.substr(x + 3, kernel_close - x - 3));
  ConvLayout layout;
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (input[i] == "f") layout.input_feature = static_cast<std::int64_t>(i);
  }
  for (std::size_t i = 0; i < kernel.size(); ++i) {
    if (!kernel[i].empty() && std::isdigit(static_cast<unsigned char>(kernel[i][0]))) {
      layout.kernel_spatial.push_back(static_cast<std::int64_t>(i));
    }
  }
  if (layout.input_feature < 0) return std::nullopt;
  return layout;
}

inline double convolution_flops(const HloOperation& op) {
  if (op.operand_types.size() < 2 || op.result_types.empty()) {
    throw CostRuleError(op.op_name + ": convolution needs input, kernel and result");
  }
  std::optional<ConvLayout> layout;
  if (auto f = find_int(op, "input_feature_dimension")) {
    auto spatial = find_int_list(op, "kernel_spatial_dimensions");
    if (spatial) layout = ConvLayout{*f, *spatial};
  }
  if (!layout) {
    for (const Attribute& a : op.attributes) {
      if (const auto* o = std::get_if<OpaqueAttr>(&a.value)) {
        if (o->text.starts_with("#stablehlo.conv<") || o->text.starts_with("#mhlo.conv<")) {
          layout = parse_compact_conv(o->text);
          if (layout) break;
        }
      }
    }
  }
  if (!layout) throw CostRuleError(op.op_name + ": missing convolution dimension numbers");
  const auto& input = op.operand_types[0].shape;
  const auto& kernel = op.operand_types[1].shape;
  const double in_channels = product(input, {layout->input_feature});
  const double spatial = product(kernel, layout->kernel_spatial);
  const double groups = static_cast<double>(find_int(op, "feature_group_count").value_or(1));
  if (!(groups >= 1.0)) throw CostRuleError(op.op_name + ": feature_group_count must be >= 1");
  return 2.0 * elements(op.result_types) * (spatial * in_channels / groups);
}

inline bool is_elementwise(std::string_view n) {
  static constexpr std::string_view kNames[] = {
      "add", "subtract", "multiply", "divide", "maximum", "minimum", "exponential",
      "tanh", "negate", "rsqrt", "sqrt", "power", "abs", "logistic", "convert",
      "compare", "select"};
  return std::find(std::begin(kNames), std::end(kNames), n) != std::end(kNames);
}

inline bool is_data_movement(std::string_view n) {
  return n == "transpose" || n == "reshape" || n == "broadcast_in_dim" || n == "slice" ||
         n == "concatenate";
}

inline bool is_fusion(const HloOperation& op) {
  return op.has_region && op.short_name().find("fusion") != std::string_view::npos;
}

}  // namespace detail

// FLOPs charged to one operation. Unknown compute ops cost nothing here and
// are charged only for their boundary bytes.
inline double op_flops(const HloOperation& op) {
  const std::string_view n = op.short_name();
  if (classify(op) != OpClass::kCompute) return 0.0;
  if (n == "dot_general") return detail::dot_general_flops(op);
  if (n == "convolution") return detail::convolution_flops(op);
  if (n == "reduce") {
    const std::size_t inputs = op.operand_types.size() / 2;
    return detail::elements({op.operand_types.begin(),
                             op.operand_types.begin() + static_cast<std::ptrdiff_t>(inputs)});
  }
  if (detail::is_elementwise(n) || detail::is_data_movement(n)) {
    return detail::elements(op.result_types);
  }
  if (n == "custom_call") return 0.0;
  if (detail::is_fusion(op)) {
    double total = 0.0;
    for (const HloOperation& inner : op.region_ops) total += op_flops(inner);
    return total;
  }
  static std::mutex warned_mu;
  static std::set<std::string> warned;
  {
    std::lock_guard lock(warned_mu);
    if (!warned.insert(op.op_name).second) return 0.0;
  }
  log_warn("no FLOP rule for " + op.op_name + "; charging boundary bytes only");
  return 0.0;
}

inline EstimatorResult roofline_from_counts(double flops, double bytes, const HardwareConfig& hw) {
  EstimatorResult r;
  r.flops = flops;
  r.bytes_moved = bytes;
  const double compute_time = flops / hw.peak_compute;
  const double memory_time = bytes / hw.memory_bandwidth;
  r.latency = std::max(compute_time, memory_time);
  r.bound = compute_time >= memory_time && flops > 0.0 ? Bound::kComputeBound : Bound::kMemoryBound;
  r.provenance = "roofline";
  return r;
}

inline double region_flops(const ComputeRegion& region) {
  double flops = 0.0;
  for (const HloOperation& op : region.ops) flops += op_flops(op);
  return flops;
}

inline double region_boundary_bytes(const ComputeRegion& region) {
  double bytes = 0.0;
  for (const TensorType& t : region.boundary_inputs) bytes += static_cast<double>(tensor_bytes(t));
  for (const TensorType& t : region.boundary_outputs) bytes += static_cast<double>(tensor_bytes(t));
  return bytes;
}

inline EstimatorResult roofline_estimate(const ComputeRegion& region, const HardwareConfig& hw) {
  return roofline_from_counts(region_flops(region), region_boundary_bytes(region), hw);
}

// ---- Table lookup -----------------------------------------------------------

struct LatencyTable {
  std::map<std::string, double> entries;  // canonical key -> seconds
  std::string provenance;

  static LatencyTable from_json(const nlohmann::json& j, std::string provenance) {
    LatencyTable t;
    t.provenance = std::move(provenance);
    try {
      if (j.at("version").get<int>() != 1) throw ConfigError("latency table: unsupported version");
      for (const auto& [key, value] : j.at("entries").items()) {
        const double ns = value.get<double>();
        if (!(ns >= 0.0)) throw ConfigError("latency table: negative latency for " + key);
        t.entries[key] = ns * 1e-9;
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("latency table: ") + e.what());
    }
    return t;
  }

  static LatencyTable load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open latency table " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path + ": " + e.what());
    }
    return from_json(j, path);
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["version"] = 1;
    nlohmann::ordered_json e = nlohmann::ordered_json::object();
    for (const auto& [k, v] : entries) e[k] = v * 1e9;
    j["entries"] = e;
    return j;
  }
};

inline EstimatorResult table_lookup_estimate(const ComputeRegion& region, const LatencyTable& table,
                                             const HardwareConfig& hw, bool roofline_fallback) {
  auto it = table.entries.find(region.canonical_key);
  if (it == table.entries.end()) {
    if (!roofline_fallback) {
      throw MissingLatencyError("no measured latency for region " + std::to_string(region.region_id) +
                                " (key " + region.canonical_key + ")");
    }
    EstimatorResult r = roofline_estimate(region, hw);
    r.provenance = "fallback";
    return r;
  }
  EstimatorResult r;
  r.flops = region_flops(region);
  r.bytes_moved = region_boundary_bytes(region);
  r.latency = it->second;
  r.bound = r.flops / hw.peak_compute >= r.bytes_moved / hw.memory_bandwidth && r.flops > 0.0
                ? Bound::kComputeBound
                : Bound::kMemoryBound;
  r.provenance = "table";
  return r;
}

// ---- Compute API ------------------------------------------------------------

enum class EstimatorKind { kRoofline, kTable };

struct EstimatorSelection {
  EstimatorKind kind = EstimatorKind::kRoofline;
  std::string table_path;
  bool roofline_fallback = false;
  std::optional<int> runs;  // exec-arg override
};

inline std::string_view estimator_name(EstimatorKind k) {
  return k == EstimatorKind::kRoofline ? "roofline" : "table";
}

using ArgMap = std::map<std::string, std::string>;

// Compiler-side settings recorded into run metadata. The toolchain entry is
// the C component of the cache key.
inline ArgMap get_compile_args(const EstimatorSelection& sel, const HardwareConfig* hw = nullptr) {
  if (sel.kind == EstimatorKind::kTable) {
    return {{"toolchain", "profiled"}, {"source", sel.table_path}};
  }
  return {{"toolchain", hw ? hw->toolchain_tag : std::string("raw")}};
}

inline ArgMap get_exec_args(const EstimatorSelection& sel) {
  const int runs = sel.runs.value_or(sel.kind == EstimatorKind::kTable ? 5 : 1);
  return {{"runs", std::to_string(runs)}};
}

struct CacheKey {
  std::string hardware;
  std::string toolchain;
  std::string region;
  auto operator<=>(const CacheKey&) const = default;
};

struct CacheStats {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t unique_keys = 0;
  bool operator==(const CacheStats&) const = default;
};

// Dispatches region estimates to the selected estimator and memoizes them.
// Safe for concurrent callers: lookups take a shared lock, inserts an
// exclusive one. Two racing misses on one key both compute, and purity makes
// the values identical.
class ComputeApi {
 public:
  explicit ComputeApi(bool caching = true) : caching_(caching) {}

  ComputeApi(const ComputeApi&) = delete;
  ComputeApi& operator=(const ComputeApi&) = delete;

  void set_table(LatencyTable table) { table_ = std::move(table); }

  EstimatorResult get_run_time_estimate(const ComputeRegion& region, const HardwareConfig& hw,
                                        const EstimatorSelection& sel) {
    CacheKey key{hw.name, get_compile_args(sel, &hw).at("toolchain"), region.canonical_key};
    if (caching_) {
      std::shared_lock lock(mu_);
      auto it = cache_.find(key);
      if (it != cache_.end()) {
        hits_.fetch_add(1, std::memory_order_relaxed);
        return it->second;
      }
    }
    misses_.fetch_add(1, std::memory_order_relaxed);
    EstimatorResult r = invoke(region, hw, sel);
    if (caching_) {
      std::unique_lock lock(mu_);
      cache_.emplace(std::move(key), r);
    }
    return r;
  }

  CacheStats cache_stats() const {
    std::shared_lock lock(mu_);
    return {hits_.load(), misses_.load(), static_cast<std::uint64_t>(cache_.size())};
  }

  // Number of times an underlying estimator actually ran.
  std::uint64_t estimator_invocations() const { return invocations_.load(); }

 private:
  EstimatorResult invoke(const ComputeRegion& region, const HardwareConfig& hw,
                         const EstimatorSelection& sel) {
    invocations_.fetch_add(1, std::memory_order_relaxed);
    if (sel.kind == EstimatorKind::kTable) {
      if (!table_) throw ConfigError("table estimator selected but no latency table loaded");
      return table_lookup_estimate(region, *table_, hw, sel.roofline_fallback);
    }
    return roofline_estimate(region, hw);
  }

  bool caching_;
  std::optional<LatencyTable> table_;
  mutable std::shared_mutex mu_;
  std::map<CacheKey, EstimatorResult> cache_;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> misses_{0};
  std::atomic<std::uint64_t> invocations_{0};
};

}  // namespace hlosim
