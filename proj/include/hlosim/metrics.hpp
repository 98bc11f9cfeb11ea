// Copyright 2026 The hlosim Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hlosim {

class MetricError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ComparisonRecord {
  std::string label;
  double predicted = 0.0;  // seconds
  double reference = 0.0;  // seconds
};

// Mean absolute percentage error, in percent.
inline double mape(std::span<const ComparisonRecord> records) {
  if (records.empty()) throw MetricError("mape of an empty record list");
  double sum = 0.0;
  for (const ComparisonRecord& r : records) {
    if (!(r.reference > 0.0)) throw MetricError("non-positive reference time for '" + r.label + "'");
    sum += std::abs(r.predicted - r.reference) / r.reference;
  }
  return sum / static_cast<double>(records.size()) * 100.0;
}

// S = T_prev / T_next.
inline double speedup(double t_prev, double t_next) {
  if (!(t_prev > 0.0) || !(t_next > 0.0)) throw MetricError("speedup needs positive times");
  return t_prev / t_next;
}

// Signed relative speedup error in percent; positive when the simulated
// speedup falls short of the reference.
inline double speedup_error(double s_ref, double s_sim) {
  if (!(s_ref > 0.0)) throw MetricError("reference speedup must be positive");
  return (s_ref - s_sim) / s_ref * 100.0;
}

inline double mean_absolute(std::span<const double> values) {
  if (values.empty()) throw MetricError("mean of an empty list");
  double sum = 0.0;
  for (double v : values) sum += std::abs(v);
  return sum / static_cast<double>(values.size());
}

// Reads `label,reference_seconds` rows. A header row is skipped if present.
inline std::map<std::string, double> load_reference_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MetricError("cannot open reference file " + path);
  std::map<std::string, double> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw MetricError(path + ":" + std::to_string(line_no) + ": expected label,reference_seconds");
    }
    const std::string label = line.substr(0, comma);
    const std::string value = line.substr(comma + 1);
    if (line_no == 1 && label == "label") continue;
    double seconds = 0.0;
    try {
      std::size_t used = 0;
      seconds = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw MetricError(path + ":" + std::to_string(line_no) + ": bad reference time '" + value + "'");
    }
    if (!(seconds > 0.0)) {
      throw MetricError(path + ":" + std::to_string(line_no) + ": reference time must be positive");
    }
    out[label] = seconds;
  }
  return out;
}

}  // namespace hlosim
