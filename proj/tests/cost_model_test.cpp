#include <gtest/gtest.h>

#include "justitia/cost_model.hpp"
#include "test_util.hpp"

using namespace justitia;
using justitia::testing::make_app;

namespace {

double loop_kv(std::int64_t p, std::int64_t d) {
  double sum = 0.0;
  for (std::int64_t i = 1; i <= d; ++i) sum += static_cast<double>(p + i);
  return sum;
}

}  // namespace

TEST(KvTokenTime, HandValues) {
  EXPECT_EQ(kv_token_time(0, 0).value, 0.0);
  EXPECT_EQ(kv_token_time(5, 1).value, 6.0);
  EXPECT_EQ(kv_token_time(10, 4).value, 50.0);
}

TEST(KvTokenTime, MatchesLoopOracleOnGrid) {
  for (std::int64_t p = 0; p <= 200; ++p) {
    for (std::int64_t d = 0; d <= 200; ++d) {
      ASSERT_EQ(kv_token_time(p, d).value, loop_kv(p, d)) << "p=" << p << " d=" << d;
    }
  }
}

TEST(KvTokenTime, MonotoneAndSuperlinearInDecode) {
  for (std::int64_t p = 0; p <= 50; p += 5) {
    for (std::int64_t d = 1; d <= 100; ++d) {
      EXPECT_LE(kv_token_time(p, d).value, kv_token_time(p + 1, d).value);
      EXPECT_LT(kv_token_time(p, d - 1).value, kv_token_time(p, d).value);
      EXPECT_GT(kv_token_time(p, 2 * d).value - 2 * kv_token_time(p, d).value, 0.0);
    }
  }
}

TEST(KvTokenTime, RejectsNegativeLengths) {
  EXPECT_THROW(kv_token_time(-1, 3), std::invalid_argument);
  EXPECT_THROW(kv_token_time(3, -1), std::invalid_argument);
}

TEST(ComputeCost, WeightedTokenCounts) {
  EXPECT_EQ(compute_cost(10, 4).value, 18.0);
  EXPECT_EQ(compute_cost(0, 0).value, 0.0);
  EXPECT_EQ(compute_cost(7, 3, ComputeWeights{1.0, 1.0}).value, 10.0);
  EXPECT_THROW(compute_cost(-1, 0), std::invalid_argument);
  EXPECT_THROW(CostModel::compute_centric(ComputeWeights{0.0, 1.0}), std::invalid_argument);
}

TEST(ApplicationCost, SumsNodesUnderEitherModel) {
  const auto app = make_app(1, 0.0, {{10, 4}, {5, 1}});
  EXPECT_EQ(application_cost(app, CostModel::memory_centric()).value, 56.0);
  EXPECT_EQ(application_cost(app, CostModel::compute_centric()).value, 25.0);
  EXPECT_EQ(max_inference_cost(app).value, 50.0);
  EXPECT_EQ(application_cost(make_app(2, 0.0, {{0, 0}}), CostModel::memory_centric()).value, 0.0);
}

TEST(ApplicationCost, RejectsEmptyApp) {
  ApplicationJob empty;
  EXPECT_THROW(application_cost(empty, CostModel::memory_centric()), std::invalid_argument);
}
