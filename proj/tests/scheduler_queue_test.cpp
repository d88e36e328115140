#include <gtest/gtest.h>

#include <map>

#include "justitia/scheduler.hpp"
#include "justitia/workload.hpp"
#include "test_util.hpp"

using namespace justitia;
using justitia::testing::make_app;

namespace {

struct Fixture {
  std::map<AppId, double> weight;
  SchedulerQueue queue{[this](NodeRef n) {
    return PriorityKey{weight.at(n.app), 0.0, n.app, queue.rank_of(n)};
  }};
};

}  // namespace

TEST(SchedulerQueue, EmptyQueueHasNoFront) {
  Fixture f;
  EXPECT_FALSE(f.queue.front());
  EXPECT_EQ(f.queue.ready_count(), 0u);
}

TEST(SchedulerQueue, ReduceWaitsForAllMaps) {
  Fixture f;
  auto app = make_app(1, 0.0, {});
  app.nodes = dag_template(AppClass::MRS, DagParams{4});
  f.weight[1] = 1.0;
  f.queue.add_app(app, 0.0);
  EXPECT_EQ(f.queue.ready_count(), 4u);
  for (std::uint32_t i = 0; i < 4; ++i) {
    const auto next = *f.queue.front();
    EXPECT_EQ(next.index, i);
    f.queue.take(next);
    const auto released = f.queue.complete(next, 1.0 + i);
    if (i < 3) {
      EXPECT_TRUE(released.empty());
    } else {
      ASSERT_EQ(released.size(), 1u);
      EXPECT_EQ(released[0].index, 4u);
      EXPECT_DOUBLE_EQ(f.queue.release_time(released[0]), 4.0);
    }
  }
  EXPECT_FALSE(f.queue.app_finished(1));
  const auto reduce = *f.queue.front();
  f.queue.take(reduce);
  EXPECT_TRUE(f.queue.complete(reduce, 5.0).empty());
  EXPECT_TRUE(f.queue.app_finished(1));
}

TEST(SchedulerQueue, RejectsInvalidTransitions) {
  Fixture f;
  const auto app = make_app(1, 0.0, {{1, 1}, {1, 1, {1}}});
  f.weight[1] = 1.0;
  f.queue.add_app(app, 0.0);
  EXPECT_THROW(f.queue.add_app(app, 0.0), std::invalid_argument);
  EXPECT_THROW(f.queue.take(NodeRef{1, 1}), std::logic_error);
  EXPECT_THROW(f.queue.complete(NodeRef{1, 0}, 0.0), std::logic_error);
  EXPECT_THROW(f.queue.complete(NodeRef{9, 0}, 0.0), std::out_of_range);
}

TEST(SchedulerQueue, RekeyMovesReadyNodes) {
  Fixture f;
  const auto a = make_app(1, 0.0, {{1, 1}});
  const auto b = make_app(2, 0.0, {{1, 1}});
  f.weight = {{1, 1.0}, {2, 2.0}};
  f.queue.add_app(a, 0.0);
  f.queue.add_app(b, 0.0);
  EXPECT_EQ(f.queue.front()->app, 1u);
  f.weight[1] = 3.0;
  f.queue.rekey_app(1);
  EXPECT_EQ(f.queue.front()->app, 2u);
  EXPECT_EQ(f.queue.ready_nodes_of(1).size(), 1u);
}
