#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "justitia/workload.hpp"

using namespace justitia;

TEST(Workload, DegenerateMixIsAllSmall) {
  WorkloadConfig cfg;
  cfg.app_count = 100;
  cfg.size_mix = {1.0, 0.0, 0.0};
  cfg.rng_seed = 42;
  const auto apps = generate_workload(cfg);
  ASSERT_EQ(apps.size(), 100u);
  for (const auto& app : apps) EXPECT_EQ(app.size_class(), SizeClass::Small);
}

TEST(Workload, SizeMixPassesChiSquare) {
  WorkloadConfig cfg;
  cfg.app_count = 300;
  cfg.rng_seed = 7;
  const auto apps = generate_workload(cfg);
  std::array<double, 3> counts{};
  for (const auto& app : apps) counts[static_cast<std::size_t>(app.size_class())] += 1.0;
  double chi2 = 0.0;
  for (std::size_t s = 0; s < 3; ++s) {
    const double expected = cfg.size_mix[s] * 300.0;
    chi2 += (counts[s] - expected) * (counts[s] - expected) / expected;
    EXPECT_NEAR(counts[s] / 300.0, cfg.size_mix[s], 0.05);
  }
  EXPECT_LT(chi2, 13.82);  // 2 degrees of freedom, p = 0.001
}

TEST(Workload, DeterministicInSeed) {
  WorkloadConfig cfg;
  cfg.rng_seed = 3;
  std::stringstream a, b;
  write_workload(a, generate_workload(cfg));
  write_workload(b, generate_workload(cfg));
  EXPECT_EQ(a.str(), b.str());
  cfg.rng_seed = 4;
  std::stringstream c;
  write_workload(c, generate_workload(cfg));
  EXPECT_NE(a.str(), c.str());
}

TEST(Workload, LengthsInsideClassSupportAndDagsAcyclic) {
  WorkloadConfig cfg;
  cfg.app_count = 500;
  cfg.size_mix = {0.4, 0.4, 0.2};
  const auto apps = generate_workload(cfg);
  double last = 0.0;
  for (const auto& app : apps) {
    EXPECT_GE(app.arrival_time, last);
    EXPECT_LE(app.arrival_time, cfg.submission_window);
    last = app.arrival_time;
    EXPECT_NO_THROW(validate(app));
    EXPECT_EQ(topological_order(app).size(), app.nodes.size());
    EXPECT_FALSE(app.input_text.empty());
    const auto& prof = cfg.lengths.at(app.cls);
    for (const auto& n : app.nodes) {
      EXPECT_GE(n.prompt_len, prof.prompt.lo);
      EXPECT_LE(n.prompt_len, prof.prompt.hi);
      EXPECT_GE(n.decode_len, prof.decode.lo);
      EXPECT_LE(n.decode_len, prof.decode.hi);
    }
  }
}

TEST(Workload, DefaultTableWithinDocumentedRanges) {
  for (const auto& [cls, prof] : default_length_table()) {
    switch (size_class_of(cls)) {
      case SizeClass::Small:
        EXPECT_GE(prof.prompt.lo, 100);
        EXPECT_LE(prof.prompt.hi, 500);
        EXPECT_GE(prof.decode.lo, 20);
        EXPECT_LE(prof.decode.hi, 200);
        break;
      case SizeClass::Medium:
        EXPECT_GE(prof.prompt.lo, 300);
        EXPECT_LE(prof.prompt.hi, 1500);
        EXPECT_GE(prof.decode.lo, 100);
        EXPECT_LE(prof.decode.hi, 800);
        break;
      case SizeClass::Large:
        EXPECT_GE(prof.prompt.lo, 2000);
        EXPECT_LE(prof.prompt.hi, 8000);
        EXPECT_GE(prof.decode.lo, 500);
        EXPECT_LE(prof.decode.hi, 3000);
        break;
    }
    EXPECT_LE(prof.min_fan_out, prof.max_fan_out);
    EXPECT_GT(prof.prompt.mean(), static_cast<double>(prof.prompt.lo));
    EXPECT_LT(prof.prompt.mean(), static_cast<double>(prof.prompt.hi));
  }
}

TEST(Workload, ScaleLengthsClampsAtOne) {
  const auto t = scale_lengths(default_length_table(), 1e-6);
  for (const auto& [cls, prof] : t) {
    EXPECT_EQ(prof.prompt.lo, 1);
    EXPECT_EQ(prof.decode.hi, 1);
  }
  EXPECT_THROW(scale_lengths(default_length_table(), 0.0), std::invalid_argument);
}

TEST(Workload, RejectsBadConfig) {
  WorkloadConfig cfg;
  cfg.size_mix = {0.5, 0.5, 0.5};
  EXPECT_THROW(generate_workload(cfg), std::invalid_argument);
  cfg = WorkloadConfig{};
  cfg.app_count = 0;
  EXPECT_THROW(generate_workload(cfg), std::invalid_argument);
}

TEST(DagTemplate, Shapes) {
  const auto mrs = dag_template(AppClass::MRS, DagParams{4});
  ASSERT_EQ(mrs.size(), 5u);
  EXPECT_EQ(mrs[4].deps, (std::vector<NodeId>{1, 2, 3, 4}));

  const auto sc = dag_template(AppClass::SC, DagParams{1});
  ASSERT_EQ(sc.size(), 2u);
  EXPECT_EQ(sc[1].deps, (std::vector<NodeId>{1}));

  const auto dm = dag_template(AppClass::DM, DagParams{3});
  ASSERT_EQ(dm.size(), 7u);
  for (std::size_t merge = 0; merge < 6; merge += 2) {
    EXPECT_TRUE(dm[merge].deps.empty());
    EXPECT_EQ(dm[merge + 1].deps, (std::vector<NodeId>{dm[merge].id}));
  }
  EXPECT_EQ(dm[6].deps, (std::vector<NodeId>{2, 4, 6}));

  const auto fv = dag_template(AppClass::FV, DagParams{3});
  ASSERT_EQ(fv.size(), 4u);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_EQ(fv[i].deps, (std::vector<NodeId>{1}));
  EXPECT_THROW(dag_template(AppClass::PE, DagParams{0}), std::invalid_argument);
}

TEST(Topology, DetectsCycles) {
  ApplicationJob app;
  app.nodes = {InferenceSpec{1, 1, 1, {2}}, InferenceSpec{2, 1, 1, {1}}};
  EXPECT_THROW(topological_order(app), std::invalid_argument);
  app.nodes = {InferenceSpec{1, 1, 1, {9}}};
  EXPECT_THROW(validate(app), std::invalid_argument);
}

TEST(Trace, RescaleSortAndErrors) {
  std::stringstream in("0\n1\n5\n");
  const auto fitted = fit_to_window(parse_trace(in), 10.0);
  ASSERT_EQ(fitted.size(), 3u);
  EXPECT_DOUBLE_EQ(fitted[1].offset, 2.0);
  EXPECT_DOUBLE_EQ(fitted[2].offset, 10.0);

  std::stringstream unsorted("3\n1\n2 EV\n");
  const auto sorted = parse_trace(unsorted);
  EXPECT_DOUBLE_EQ(sorted[0].offset, 1.0);
  EXPECT_DOUBLE_EQ(sorted[2].offset, 3.0);
  EXPECT_EQ(sorted[1].cls, AppClass::EV);

  std::stringstream empty("");
  EXPECT_THROW(parse_trace(empty), TraceError);

  std::stringstream bad("1\nabc\n");
  try {
    parse_trace(bad);
    FAIL() << "expected TraceError";
  } catch (const TraceError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }

  std::stringstream mooncake("{\"timestamp\": 1500, \"input_length\": 10}\n{\"timestamp\": 0}\n");
  const auto mc = parse_trace(mooncake);
  EXPECT_DOUBLE_EQ(mc[1].offset, 1.5);
}

TEST(Trace, DrivesArrivalsAndClasses) {
  std::stringstream in("0 MRS\n10 EV\n20 SC\n");
  WorkloadConfig cfg;
  cfg.app_count = 3;
  cfg.submission_window = 40.0;
  cfg.trace = parse_trace(in);
  const auto apps = generate_workload(cfg);
  EXPECT_DOUBLE_EQ(apps[1].arrival_time, 20.0);
  EXPECT_EQ(apps[0].cls, AppClass::MRS);
  EXPECT_EQ(apps[2].cls, AppClass::SC);
}

TEST(WorkloadIo, RoundTrip) {
  WorkloadConfig cfg;
  cfg.app_count = 20;
  const auto apps = generate_workload(cfg);
  std::stringstream buf;
  write_workload(buf, apps);
  EXPECT_EQ(read_workload(buf), apps);
  std::stringstream bad("{\"app_id\": 0, \"class\": \"NOPE\"}\n");
  EXPECT_THROW(read_workload(bad), std::runtime_error);
}
