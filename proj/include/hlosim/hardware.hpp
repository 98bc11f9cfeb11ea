// Copyright 2026 The hlosim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace hlosim {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Per-device roofline parameters.
struct HardwareConfig {
  std::string name;
  double peak_compute = 0.0;      // FLOP/s
  double memory_bandwidth = 0.0;  // bytes/s
  std::string toolchain_tag = "raw";
  std::string notes;

  void validate() const {
    if (name.empty()) throw ConfigError("hardware config needs a name");
    if (!(peak_compute > 0.0)) throw ConfigError("hardware '" + name + "': peak_compute must be > 0");
    if (!(memory_bandwidth > 0.0)) {
      throw ConfigError("hardware '" + name + "': memory_bandwidth must be > 0");
    }
  }

  bool operator==(const HardwareConfig&) const = default;
};

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline constexpr const char* kTableNote =
    "peak compute listed without a datatype context; recorded verbatim";

}  // namespace detail

inline const std::vector<HardwareConfig>& hardware_presets() {
  static const std::vector<HardwareConfig> presets = {
      {"A100", 312e12, 1.94e12, "raw", detail::kTableNote},
      {"H100", 1979e12, 3.35e12, "raw", detail::kTableNote},
      {"H200", 1979e12, 4.80e12, "raw", detail::kTableNote},
      {"B200", 4500e12, 7.70e12, "raw", detail::kTableNote},
      {"TPUv3", 63.3e12, 429.2e9, "raw", "per-core peak compute and memory bandwidth"},
  };
  return presets;
}

inline std::optional<HardwareConfig> find_hardware_preset(std::string_view name) {
  const std::string key = detail::lower(name);
  for (const HardwareConfig& h : hardware_presets()) {
    if (detail::lower(h.name) == key) return h;
  }
  return std::nullopt;
}

inline HardwareConfig hardware_from_json(const nlohmann::json& j) {
  try {
    HardwareConfig h;
    h.name = j.at("name").get<std::string>();
    h.peak_compute = j.at("peak_compute_tflops").get<double>() * 1e12;
    h.memory_bandwidth = j.at("memory_bandwidth_gbs").get<double>() * 1e9;
    h.toolchain_tag = j.value("toolchain_tag", std::string("raw"));
    h.notes = j.value("notes", std::string());
    h.validate();
    return h;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("hardware config: ") + e.what());
  }
}

inline nlohmann::ordered_json hardware_to_json(const HardwareConfig& h) {
  nlohmann::ordered_json j;
  j["name"] = h.name;
  j["peak_compute_tflops"] = h.peak_compute / 1e12;
  j["memory_bandwidth_gbs"] = h.memory_bandwidth / 1e9;
  j["toolchain_tag"] = h.toolchain_tag;
  if (!h.notes.empty()) j["notes"] = h.notes;
  return j;
}

}  // namespace hlosim
