// Copyright 2026 The hlosim Authors.
// SPDX-License-Identifier: Apache-2.0
//
// CSV result tables and grouped SVG bar charts.

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hlosim {

struct RunRow {
  std::string workload;
  std::string system;
  std::string hardware;
  std::string estimator;
  std::string split;
  std::int64_t step_time_ns = 0;
  std::int64_t comp_time_ns = 0;
  std::int64_t comm_time_ns = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_misses = 0;
  double sim_wall_ms = 0.0;
  std::optional<std::int64_t> reference_ns;
  std::optional<double> mape_pct;
  double step_time_s = 0.0;  // unrounded makespan, not emitted
};

inline std::string csv_header(bool with_reference) {
  std::string h =
      "workload,system,hardware,estimator,split,step_time_ns,comp_time_ns,comm_time_ns,"
      "cache_hits,cache_misses,sim_wall_ms";
  if (with_reference) h += ",reference_ns,mape_pct";
  return h;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace detail

inline std::string format_csv(const std::vector<RunRow>& rows) {
  bool with_reference = false;
  for (const RunRow& r : rows) with_reference = with_reference || r.reference_ns.has_value();
  std::string out = csv_header(with_reference) + "\n";
  for (const RunRow& r : rows) {
    out += detail::csv_field(r.workload) + "," + detail::csv_field(r.system) + "," +
           detail::csv_field(r.hardware) + "," + r.estimator + "," + r.split + "," +
           std::to_string(r.step_time_ns) + "," + std::to_string(r.comp_time_ns) + "," +
           std::to_string(r.comm_time_ns) + "," + std::to_string(r.cache_hits) + "," +
           std::to_string(r.cache_misses) + "," + detail::fixed(r.sim_wall_ms, 3);
    if (with_reference) {
      out += ",";
      if (r.reference_ns) out += std::to_string(*r.reference_ns);
      out += ",";
      if (r.mape_pct) out += detail::fixed(*r.mape_pct, 4);
    }
    out += "\n";
  }
  return out;
}

enum class ChartGrouping { kByWorkload, kByHardware };

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string sig(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

inline std::vector<std::string> unique_in_order(const std::vector<std::string>& xs) {
  std::vector<std::string> out;
  for (const std::string& x : xs) {
    if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
  }
  return out;
}

}  // namespace detail

// Grouped bars of step time. Groups are workloads (or hardware); within a
// group there is one bar per combination of the remaining fields that vary
// across rows.
inline std::string emit_svg_bar_chart(const std::vector<RunRow>& rows, ChartGrouping grouping) {
  if (rows.empty()) throw std::invalid_argument("cannot chart an empty result set");

  auto group_of = [&](const RunRow& r) {
    return grouping == ChartGrouping::kByWorkload ? r.workload : r.hardware;
  };
  std::vector<std::string> f_other, f_est, f_split;
  for (const RunRow& r : rows) {
    f_other.push_back(grouping == ChartGrouping::kByWorkload ? r.hardware : r.workload);
    f_est.push_back(r.estimator);
    f_split.push_back(r.split);
  }
  const bool vary_other = detail::unique_in_order(f_other).size() > 1;
  const bool vary_est = detail::unique_in_order(f_est).size() > 1;
  const bool vary_split = detail::unique_in_order(f_split).size() > 1;
  auto series_of = [&](const RunRow& r) {
    std::string s;
    auto add = [&s](const std::string& part) {
      if (!s.empty()) s += " / ";
      s += part;
    };
    if (vary_other) add(grouping == ChartGrouping::kByWorkload ? r.hardware : r.workload);
    if (vary_est) add(r.estimator);
    if (vary_split) add(r.split);
    if (s.empty()) s = r.estimator;
    return s;
  };

  std::vector<std::string> groups_all, series_all;
  for (const RunRow& r : rows) {
    groups_all.push_back(group_of(r));
    series_all.push_back(series_of(r));
  }
  const auto groups = detail::unique_in_order(groups_all);
  const auto series = detail::unique_in_order(series_all);

  double max_ns = 0.0;
  for (const RunRow& r : rows) max_ns = std::max(max_ns, static_cast<double>(r.step_time_ns));
  const char* unit = "ns";
  double scale = 1.0;
  if (max_ns >= 1e9) {
    unit = "s";
    scale = 1e9;
  } else if (max_ns >= 1e6) {
    unit = "ms";
    scale = 1e6;
  } else if (max_ns >= 1e3) {
    unit = "us";
    scale = 1e3;
  }

  static constexpr const char* kPalette[] = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759",
                                             "#76b7b2", "#edc948", "#b07aa1", "#9c755f"};
  const double bar_w = 36.0;
  const double bar_gap = 4.0;
  const double group_gap = 28.0;
  const double left = 80.0;
  const double top = 40.0;
  const double plot_h = 260.0;
  const double group_w = static_cast<double>(series.size()) * (bar_w + bar_gap) - bar_gap;
  const double plot_w = static_cast<double>(groups.size()) * (group_w + group_gap) + group_gap;
  const double legend_h = 18.0 * static_cast<double>(series.size());
  const double width = left + plot_w + 20.0;
  const double height = top + plot_h + 60.0 + legend_h;
  auto f = [](double v) { return detail::fixed(v, 2); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + f(width) + "\" height=\"" + f(height) +
         "\" viewBox=\"0 0 " + f(width) + " " + f(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + f(width) + "\" height=\"" + f(height) + "\" fill=\"white\"/>\n";
  svg += "<text x=\"" + f(left + plot_w / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">Step time by " +
         std::string(grouping == ChartGrouping::kByWorkload ? "workload" : "hardware") + "</text>\n";
  // Axes and ticks.
  const double base_y = top + plot_h;
  svg += "<line x1=\"" + f(left) + "\" y1=\"" + f(top) + "\" x2=\"" + f(left) + "\" y2=\"" + f(base_y) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + f(left) + "\" y1=\"" + f(base_y) + "\" x2=\"" + f(left + plot_w) + "\" y2=\"" +
         f(base_y) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double frac = i / 4.0;
    const double y = base_y - frac * plot_h;
    svg += "<line x1=\"" + f(left - 4) + "\" y1=\"" + f(y) + "\" x2=\"" + f(left) + "\" y2=\"" + f(y) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + f(left - 6) + "\" y=\"" + f(y + 4) + "\" text-anchor=\"end\">" +
           detail::sig(max_ns * frac / scale) + "</text>\n";
  }
  svg += "<text x=\"16\" y=\"" + f(top + plot_h / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         f(top + plot_h / 2) + ")\">step time (" + unit + ")</text>\n";

  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const double gx = left + group_gap + static_cast<double>(gi) * (group_w + group_gap);
    for (const RunRow& r : rows) {
      if (group_of(r) != groups[gi]) continue;
      const auto si = static_cast<std::size_t>(
          std::find(series.begin(), series.end(), series_of(r)) - series.begin());
      const double v = static_cast<double>(r.step_time_ns);
      const double h = max_ns > 0.0 ? v / max_ns * plot_h : 0.0;
      const double x = gx + static_cast<double>(si) * (bar_w + bar_gap);
      svg += "<rect x=\"" + f(x) + "\" y=\"" + f(base_y - h) + "\" width=\"" + f(bar_w) + "\" height=\"" + f(h) +
             "\" fill=\"" + kPalette[si % 8] + "\"/>\n";
      svg += "<text x=\"" + f(x + bar_w / 2) + "\" y=\"" + f(base_y - h - 4) + "\" text-anchor=\"middle\">" +
             detail::sig(v / scale) + "</text>\n";
    }
    svg += "<text x=\"" + f(gx + group_w / 2) + "\" y=\"" + f(base_y + 16) + "\" text-anchor=\"middle\">" +
           detail::xml_escape(groups[gi]) + "</text>\n";
  }
  for (std::size_t si = 0; si < series.size(); ++si) {
    const double y = base_y + 36 + 18.0 * static_cast<double>(si);
    svg += "<rect x=\"" + f(left) + "\" y=\"" + f(y - 10) + "\" width=\"12\" height=\"12\" fill=\"" +
           kPalette[si % 8] + "\"/>\n";
    svg += "<text x=\"" + f(left + 18) + "\" y=\"" + f(y) + "\">" + detail::xml_escape(series[si]) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

// Writes through a temporary sibling and renames it into place.
inline void write_file_atomic(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace hlosim
