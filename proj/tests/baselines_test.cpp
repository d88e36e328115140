#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "justitia/baselines.hpp"
#include "justitia/engine.hpp"
#include "test_util.hpp"

using namespace justitia;
using justitia::testing::make_app;

namespace {

KvCost oracle(const ApplicationJob& app) { return application_cost(app, CostModel::memory_centric()); }

RunResult run_with(SchedulerKind kind, const std::vector<ApplicationJob>& apps, EngineConfig cfg) {
  SchedulerContext ctx;
  ctx.service_rate = cfg.service_rate();
  auto s = make_scheduler(kind, ctx);
  return run(apps, *s, oracle, cfg);
}

double avg_jct(const RunResult& r) {
  double sum = 0.0;
  for (const auto& rec : r.records) sum += rec.jct();
  return sum / static_cast<double>(r.records.size());
}

// Forwards to AppFcfs and checks, at every admission, that no app that
// arrived earlier still has a ready node.
class NonInterleavingProbe : public Scheduler {
 public:
  std::string_view name() const override { return inner_.name(); }
  void on_arrival(const ApplicationJob& app, KvCost c, double now) override {
    arrivals_.push_back(&app);
    inner_.on_arrival(app, c, now);
  }
  std::optional<NodeRef> pick_next() const override { return inner_.pick_next(); }
  void on_admitted(NodeRef node, double now) override {
    const double a = inner_.queue().app(node.app).arrival_time;
    for (const ApplicationJob* other : arrivals_) {
      if (other->arrival_time < a && !inner_.queue().app_finished(other->id) &&
          !inner_.queue().ready_nodes_of(other->id).empty()) {
        ++violations;
      }
    }
    inner_.on_admitted(node, now);
  }
  void on_node_completion(NodeRef node, double now) override { inner_.on_node_completion(node, now); }
  PriorityKey priority_of(NodeRef node) const override { return inner_.priority_of(node); }
  std::size_t ready_count() const override { return inner_.ready_count(); }

  int violations = 0;

 private:
  AppFcfsScheduler inner_;
  std::vector<const ApplicationJob*> arrivals_;
};

}  // namespace

TEST(VtcCounter, WeightedUpdates) {
  VtcCounter c;
  c.track(1);
  EXPECT_DOUBLE_EQ(c.update(1, 100, 0), 100.0);
  EXPECT_DOUBLE_EQ(c.update(1, 0, 10), 120.0);
  EXPECT_DOUBLE_EQ(c.update(1, 0, 0), 120.0);
  EXPECT_THROW(c.update(2, 1, 0), std::out_of_range);
}

TEST(VtcCounter, NewcomerLiftedToMinimumTracked) {
  VtcCounter c;
  c.track(1);
  c.track(2);
  c.update(1, 100, 0);
  c.update(2, 40, 0);
  c.track(3);
  EXPECT_DOUBLE_EQ(c.value(3), 40.0);
  c.untrack(1);
  c.untrack(2);
  c.untrack(3);
  c.track(4);
  EXPECT_DOUBLE_EQ(c.value(4), 0.0);
}

TEST(Baselines, InfFcfsPicksEarliestRelease) {
  InfFcfsScheduler s;
  const auto a = make_app(1, 1.0, {{1, 1}});
  const auto b = make_app(2, 2.0, {{1, 1}});
  const auto c = make_app(3, 3.0, {{1, 1}});
  s.on_arrival(a, KvCost(9.0), 1.0);
  s.on_arrival(b, KvCost(1.0), 2.0);
  s.on_arrival(c, KvCost(1.0), 3.0);
  EXPECT_EQ(s.pick_next()->app, 1u);
}

TEST(Baselines, InfSjfPrefersShorterEstimate) {
  InfSjfScheduler s(default_length_table());
  const auto big = make_app(1, 0.0, {{400, 1}}, AppClass::EV);
  const auto small = make_app(2, 0.0, {{100, 1000}}, AppClass::EV);
  s.on_arrival(big, KvCost(0.0), 0.0);
  s.on_arrival(small, KvCost(0.0), 0.0);
  // The true decode length is ignored; only the class mean is used.
  EXPECT_EQ(s.pick_next()->app, 2u);
}

TEST(Baselines, VtcPicksLeastServed) {
  VtcScheduler s;
  const auto a = make_app(1, 0.0, {{100, 5}, {100, 5}});
  const auto b = make_app(2, 0.0, {{40, 5}, {40, 5}});
  s.on_arrival(a, KvCost(0.0), 0.0);
  s.on_arrival(b, KvCost(0.0), 0.0);
  s.on_admitted(NodeRef{1, 0}, 0.0);
  s.on_progress(NodeRef{1, 0}, 100, 0);
  s.on_admitted(NodeRef{2, 0}, 0.0);
  s.on_progress(NodeRef{2, 0}, 40, 0);
  EXPECT_DOUBLE_EQ(s.counter().value(1), 100.0);
  EXPECT_DOUBLE_EQ(s.counter().value(2), 40.0);
  EXPECT_EQ(s.pick_next()->app, 2u);
}

TEST(Baselines, SrjfPicksLeastRemaining) {
  SrjfScheduler s;
  const auto a = make_app(1, 0.0, {{1, 1}});
  const auto b = make_app(2, 0.0, {{1, 1}});
  s.on_arrival(a, KvCost(500.0), 0.0);
  s.on_arrival(b, KvCost(80.0), 0.0);
  EXPECT_EQ(s.pick_next()->app, 2u);
}

TEST(Baselines, SrjfRemainingDropsByFinishedNodeCost) {
  SrjfScheduler s;
  const auto a = make_app(1, 0.0, {{10, 4}, {5, 1}});
  s.on_arrival(a, KvCost(56.0), 0.0);
  s.on_admitted(NodeRef{1, 0}, 0.0);
  s.on_node_completion(NodeRef{1, 0}, 1.0);
  EXPECT_DOUBLE_EQ(s.remaining(1), 6.0);
}

TEST(Baselines, AppFcfsNeverInterleaves) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::int64_t> len(5, 60);
  std::vector<ApplicationJob> apps;
  for (AppId i = 0; i < 30; ++i) {
    auto app = make_app(i, 0.5 * static_cast<double>(i), {});
    app.nodes = dag_template(i % 2 ? AppClass::MRS : AppClass::DM, DagParams{3});
    for (auto& n : app.nodes) {
      n.prompt_len = len(rng);
      n.decode_len = len(rng);
    }
    apps.push_back(std::move(app));
  }
  NonInterleavingProbe probe;
  EngineConfig cfg;
  cfg.capacity = 300;
  run(apps, probe, oracle, cfg);
  EXPECT_EQ(probe.violations, 0);
}

TEST(Baselines, VtcCountersStayClose) {
  std::vector<ApplicationJob> apps;
  for (AppId id = 0; id < 2; ++id) {
    std::vector<justitia::testing::NodeSpec> nodes(60, {10, 20});
    apps.push_back(make_app(id, 0.0, nodes));
  }
  VtcScheduler s;
  EngineConfig cfg;
  cfg.capacity = 200;
  Engine engine(cfg, s);
  for (const auto& app : apps) engine.add_arrival(app, KvCost(0.0));
  double worst = 0.0;
  while (true) {
    engine.step();
    if (!engine.records().empty()) break;
    worst = std::max(worst, std::abs(s.counter().value(0) - s.counter().value(1)));
  }
  // One step can add at most a pool's worth of prompt admissions plus one
  // decode token per resident node.
  const double per_step = 1.0 * cfg.capacity + 2.0 * cfg.capacity;
  EXPECT_LE(worst, per_step);
}

TEST(Baselines, SrjfIsOptimalOnSequentialSingleNodeApps) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::int64_t> decode(1, 40);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<ApplicationJob> apps;
    std::vector<double> service;
    for (AppId i = 0; i < 6; ++i) {
      apps.push_back(make_app(i, 0.0, {{50, decode(rng)}}, AppClass::EV));
      service.push_back(static_cast<double>(apps.back().nodes[0].decode_len + 1));
    }
    EngineConfig cfg;
    cfg.capacity = 99;  // one node at a time
    cfg.tau = 1.0;

    std::vector<std::size_t> perm(apps.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    do {
      double t = 0.0, sum = 0.0;
      for (std::size_t k : perm) sum += (t += service[k]);
      best = std::min(best, sum / static_cast<double>(perm.size()));
    } while (std::next_permutation(perm.begin(), perm.end()));

    const double srjf = avg_jct(run_with(SchedulerKind::Srjf, apps, cfg));
    EXPECT_NEAR(srjf, best, 1e-9);
    for (SchedulerKind kind : kAllSchedulers) {
      if (kind == SchedulerKind::Justitia) continue;
      EXPECT_LE(srjf, avg_jct(run_with(kind, apps, cfg)) + 1e-9) << to_string(kind);
    }
  }
}

TEST(Baselines, FactoryAndNames) {
  for (SchedulerKind kind : kAllSchedulers) {
    auto s = make_scheduler(kind, SchedulerContext{});
    EXPECT_EQ(s->name(), to_string(kind));
    EXPECT_EQ(parse_scheduler_kind(to_string(kind)), kind);
  }
  EXPECT_FALSE(parse_scheduler_kind("fifo"));
}
