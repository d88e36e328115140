#include <gtest/gtest.h>

#include <set>

#include "justitia/metrics.hpp"
#include "justitia/scenarios.hpp"

using namespace justitia;

TEST(Scenarios, StarvationConstruction) {
  const auto alone = scenario_starvation(0, 1);
  ASSERT_EQ(alone.size(), 1u);
  EXPECT_EQ(alone[0].cls, AppClass::MRS);
  EXPECT_DOUBLE_EQ(alone[0].arrival_time, 0.0);

  const auto apps = scenario_starvation(60, 1);
  ASSERT_EQ(apps.size(), 61u);
  const std::set<AppClass> mice{AppClass::KBQAV, AppClass::CC, AppClass::ALFWI};
  for (std::size_t i = 1; i <= 60; ++i) {
    EXPECT_DOUBLE_EQ(apps[i].arrival_time, static_cast<double>(i));
    EXPECT_TRUE(mice.contains(apps[i].cls));
  }
  const auto narrow = scenario_starvation(0, 1, default_length_table(), kStarvationElephantFanOut);
  EXPECT_EQ(narrow[0].nodes.size(), static_cast<std::size_t>(kStarvationElephantFanOut + 1));
}

TEST(Scenarios, StarvationElephantSharedAcrossMouseCounts) {
  const auto a = scenario_starvation(0, 4);
  const auto b = scenario_starvation(30, 4);
  EXPECT_EQ(a[0], b[0]);
}

TEST(Scenarios, TwinApps) {
  const auto twins = scenario_twin_apps(3, 20, 5);
  ASSERT_EQ(twins.size(), 2u);
  EXPECT_EQ(twins[0].nodes, twins[1].nodes);
  EXPECT_EQ(twins[0].nodes.size(), 3u);
  EXPECT_THROW(scenario_twin_apps(0, 1, 1), std::invalid_argument);
}

TEST(Scenarios, SequentialBeatsFairSharingForTwins) {
  const auto twins = scenario_twin_apps(4, 20, 5);
  EngineConfig cfg;
  cfg.capacity = 100;
  cfg.tau = 1.0;
  OraclePredictor oracle;
  SimulationOptions opts;
  opts.engine = cfg;
  const auto seq = simulate(twins, oracle, opts);
  const auto fair = simulate_fair_sharing(twins, cfg);
  const auto s = compute_metrics(seq.records, {}, cfg.capacity, cfg.tau);
  const auto f = compute_metrics(fair.records, {}, cfg.capacity, cfg.tau);
  EXPECT_LT(s.avg_jct, f.avg_jct);
  EXPECT_LE(seq.records[1].completion, fair.records[1].completion);
}

TEST(Scenarios, FairSharingNeedsSimultaneousArrivals) {
  auto apps = scenario_twin_apps(1, 5, 5);
  apps[1].arrival_time = 1.0;
  EXPECT_THROW(simulate_fair_sharing(apps, EngineConfig{}), std::invalid_argument);
}

TEST(Scenarios, MixedConfigDensity) {
  EXPECT_DOUBLE_EQ(mixed_workload_config(1, 3.0).submission_window, 360.0);
  EXPECT_DOUBLE_EQ(mixed_workload_config(1, 1.0).submission_window, 1080.0);
  EXPECT_THROW(mixed_workload_config(1, 0.0), std::invalid_argument);
}

TEST(Scenarios, DecisionOverheadIsMeasured) {
  const auto o = measure_decision_overhead(100, 200, 1);
  EXPECT_EQ(o.queued_apps, 100u);
  EXPECT_GT(o.mean_seconds, 0.0);
  EXPECT_LT(o.mean_seconds, 1e-2);
}
