// Copyright 2026 The hlosim Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "support/testgen.hpp"

namespace hlosim {
namespace {

TEST(Metrics, Mape) {
  const std::vector<ComparisonRecord> r = {{"a", 110, 100}, {"b", 90, 100}};
  EXPECT_DOUBLE_EQ(mape(r), 10.0);
  const std::vector<ComparisonRecord> exact = {{"a", 3, 3}, {"b", 7, 7}};
  EXPECT_EQ(mape(exact), 0.0);
  EXPECT_THROW(mape(std::vector<ComparisonRecord>{}), MetricError);
  EXPECT_THROW(mape(std::vector<ComparisonRecord>{{"z", 1, 0}}), MetricError);
}

TEST(Metrics, MapeIsScaleInvariantAndNonNegative) {
  testing::Rng rng(31);
  std::uniform_real_distribution<double> u(1e-6, 1.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<ComparisonRecord> r;
    for (int k = 0; k < testing::uniform(rng, 1, 8); ++k) r.push_back({"x", u(rng), u(rng)});
    const double base = mape(r);
    EXPECT_GE(base, 0.0);
    const double c = std::uniform_real_distribution<double>(0.01, 100.0)(rng);
    for (auto& x : r) {
      x.predicted *= c;
      x.reference *= c;
    }
    EXPECT_NEAR(mape(r), base, 1e-9 * std::max(1.0, base));
  }
}

TEST(Metrics, Speedup) {
  EXPECT_DOUBLE_EQ(speedup(2, 1), 2.0);
  EXPECT_DOUBLE_EQ(speedup(3, 3), 1.0);
  EXPECT_NEAR(speedup(4.405e-4, 6.945e-5), 6.343, 1e-3);
  EXPECT_THROW(speedup(0, 1), MetricError);
  EXPECT_THROW(speedup(1, -1), MetricError);
}

TEST(Metrics, SpeedupErrorSign) {
  EXPECT_NEAR(speedup_error(2.0, 1.7), 15.0, 1e-12);
  EXPECT_EQ(speedup_error(1.3, 1.3), 0.0);
  EXPECT_LT(speedup_error(2.0, 2.5), 0.0);
  EXPECT_THROW(speedup_error(0.0, 1.0), MetricError);
}

TEST(Metrics, MeanAbsoluteOverTransitions) {
  const std::vector<double> profiling = {3, 7, -3};
  const std::vector<double> analytical = {15, -7, 14};
  EXPECT_NEAR(mean_absolute(profiling), 13.0 / 3.0, 1e-12);
  EXPECT_EQ(std::round(mean_absolute(profiling) * 10) / 10, 4.3);
  EXPECT_DOUBLE_EQ(mean_absolute(analytical), 12.0);
  EXPECT_THROW(mean_absolute(std::vector<double>{}), MetricError);
}

TEST(Metrics, ReferenceCsv) {
  const auto dir = std::filesystem::temp_directory_path() / "hlosim_metrics_test";
  std::filesystem::create_directories(dir);
  const std::string good = (dir / "ref.csv").string();
  std::ofstream(good) << "label,reference_seconds\r\ngemm/a100x4,4.5e-4\n\nblocks,0.001\n";
  const auto refs = load_reference_csv(good);
  EXPECT_EQ(refs.size(), 2u);
  EXPECT_DOUBLE_EQ(refs.at("gemm/a100x4"), 4.5e-4);
  EXPECT_DOUBLE_EQ(refs.at("blocks"), 1e-3);

  const std::string bad = (dir / "bad.csv").string();
  std::ofstream(bad) << "x,1\ny,abc\n";
  try {
    load_reference_csv(bad);
    FAIL();
  } catch (const MetricError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.csv:2"), std::string::npos);
  }
  std::ofstream(bad) << "x,-1\n";
  EXPECT_THROW(load_reference_csv(bad), MetricError);
  std::ofstream(bad) << "no comma here\n";
  EXPECT_THROW(load_reference_csv(bad), MetricError);
  EXPECT_THROW(load_reference_csv((dir / "missing.csv").string()), MetricError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace hlosim
