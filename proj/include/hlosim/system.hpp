// Copyright 2026 The hlosim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hlosim/hardware.hpp"

namespace hlosim {

enum class Topology { kAllToAllFlat, kTwoLevelHierarchy, kMesh2D };

inline std::string_view topology_name(Topology t) {
  switch (t) {
    case Topology::kAllToAllFlat: return "flat";
    case Topology::kTwoLevelHierarchy: return "hierarchy";
    case Topology::kMesh2D: return "mesh";
  }
  return "flat";
}

struct SystemConfig {
  std::string name;
  int device_count = 1;
  int devices_per_node = 1;
  double intranode_bandwidth = 0.0;                // bytes/s per link
  std::optional<double> internode_bandwidth;       // bytes/s per link
  double link_latency = 0.0;                       // seconds per hop
  Topology topology = Topology::kAllToAllFlat;
  std::vector<int> mesh_dims;

  void validate() const {
    const std::string who = "system '" + name + "': ";
    if (device_count < 1) throw ConfigError(who + "device_count must be >= 1");
    if (devices_per_node < 1) throw ConfigError(who + "devices_per_node must be >= 1");
    if (!(intranode_bandwidth > 0.0)) throw ConfigError(who + "intranode bandwidth must be > 0");
    if (internode_bandwidth && !(*internode_bandwidth > 0.0)) {
      throw ConfigError(who + "internode bandwidth must be > 0");
    }
    if (link_latency < 0.0) throw ConfigError(who + "link latency must be >= 0");
    if (topology == Topology::kTwoLevelHierarchy && device_count % devices_per_node != 0) {
      throw ConfigError(who + "device_count must be a multiple of devices_per_node");
    }
    if (topology == Topology::kMesh2D) {
      if (mesh_dims.size() != 2) throw ConfigError(who + "mesh topology needs two mesh_dims");
      if (mesh_dims[0] * mesh_dims[1] != device_count) {
        throw ConfigError(who + "mesh_dims must multiply to device_count");
      }
    }
  }

  bool operator==(const SystemConfig&) const = default;
};

inline SystemConfig system_from_json(const nlohmann::json& j) {
  try {
    SystemConfig s;
    s.name = j.at("name").get<std::string>();
    s.device_count = j.at("device_count").get<int>();
    s.devices_per_node = j.value("devices_per_node", s.device_count);
    s.intranode_bandwidth = j.at("intranode_bandwidth_gbs").get<double>() * 1e9;
    if (j.contains("internode_bandwidth_gbs") && !j.at("internode_bandwidth_gbs").is_null()) {
      s.internode_bandwidth = j.at("internode_bandwidth_gbs").get<double>() * 1e9;
    }
    s.link_latency = j.value("link_latency_us", 0.0) * 1e-6;
    const std::string topo = j.value("topology", std::string("flat"));
    if (topo == "flat") {
      s.topology = Topology::kAllToAllFlat;
    } else if (topo == "hierarchy") {
      s.topology = Topology::kTwoLevelHierarchy;
    } else if (topo == "mesh") {
      s.topology = Topology::kMesh2D;
    } else {
      throw ConfigError("system config: unknown topology '" + topo + "'");
    }
    if (j.contains("mesh_dims")) s.mesh_dims = j.at("mesh_dims").get<std::vector<int>>();
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("system config: ") + e.what());
  }
}

inline nlohmann::ordered_json system_to_json(const SystemConfig& s) {
  nlohmann::ordered_json j;
  j["name"] = s.name;
  j["device_count"] = s.device_count;
  j["devices_per_node"] = s.devices_per_node;
  j["intranode_bandwidth_gbs"] = s.intranode_bandwidth / 1e9;
  if (s.internode_bandwidth) {
    j["internode_bandwidth_gbs"] = *s.internode_bandwidth / 1e9;
  } else {
    j["internode_bandwidth_gbs"] = nullptr;
  }
  j["link_latency_us"] = s.link_latency * 1e6;
  j["topology"] = std::string(topology_name(s.topology));
  if (!s.mesh_dims.empty()) j["mesh_dims"] = s.mesh_dims;
  return j;
}

// A named system preset together with the device it ships with. The GH200
// scale-out presets carry no device parameters.
struct Preset {
  std::string name;
  std::optional<std::string> hardware;
  SystemConfig system;
};

inline const std::vector<Preset>& system_presets() {
  auto flat4 = [](const char* name, double nvlink_gbs) {
    SystemConfig s;
    s.name = name;
    s.device_count = 4;
    s.devices_per_node = 4;
    s.intranode_bandwidth = nvlink_gbs * 1e9;
    s.topology = Topology::kAllToAllFlat;
    return s;
  };
  auto gh200 = [](const char* name, int devices) {
    SystemConfig s;
    s.name = name;
    s.device_count = devices;
    s.devices_per_node = 4;
    s.intranode_bandwidth = 150e9;
    s.topology = Topology::kTwoLevelHierarchy;
    return s;
  };
  SystemConfig tpu;
  tpu.name = "tpuv3-8";
  tpu.device_count = 8;
  tpu.devices_per_node = 8;
  tpu.intranode_bandwidth = 656e9 / 8.0;
  tpu.topology = Topology::kMesh2D;
  tpu.mesh_dims = {4, 2};

  static const std::vector<Preset> presets = {
      {"a100x4", "A100", flat4("a100x4", 100)},
      {"h100x4", "H100", flat4("h100x4", 150)},
      {"h200x4", "H200", flat4("h200x4", 150)},
      {"b200x4", "B200", flat4("b200x4", 300)},
      {"tpuv3-8", "TPUv3", tpu},
      {"gh200-16", std::nullopt, gh200("gh200-16", 16)},
      {"gh200-128", std::nullopt, gh200("gh200-128", 128)},
  };
  return presets;
}

inline std::optional<Preset> find_system_preset(std::string_view name) {
  const std::string key = detail::lower(name);
  for (const Preset& p : system_presets()) {
    if (p.name == key) return p;
  }
  return std::nullopt;
}

}  // namespace hlosim
