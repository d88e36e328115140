#include "justitia/cost_model.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace justitia {

namespace {

void require_non_negative(std::int64_t p, std::int64_t d) {
  if (p < 0 || d < 0) {
    throw std::invalid_argument("token counts must be non-negative (p=" + std::to_string(p) +
                                ", d=" + std::to_string(d) + ")");
  }
}

}  // namespace

KvCost kv_token_time(std::int64_t prompt_tokens, std::int64_t decode_tokens) {
  require_non_negative(prompt_tokens, decode_tokens);
  // d*(d+1) is always even, so integer arithmetic stays exact.
  const auto p = static_cast<std::uint64_t>(prompt_tokens);
  const auto d = static_cast<std::uint64_t>(decode_tokens);
  const std::uint64_t total = p * d + d * (d + 1) / 2;
  return KvCost(static_cast<double>(total));
}

KvCost compute_cost(std::int64_t prompt_tokens, std::int64_t decode_tokens,
                    ComputeWeights weights) {
  require_non_negative(prompt_tokens, decode_tokens);
  return KvCost(weights.prompt * static_cast<double>(prompt_tokens) +
                weights.decode * static_cast<double>(decode_tokens));
}

CostModel CostModel::compute_centric(ComputeWeights weights) {
  if (!(weights.prompt > 0.0) || !(weights.decode > 0.0)) {
    throw std::invalid_argument("compute-centric weights must be strictly positive");
  }
  return CostModel(Kind::ComputeCentric, weights);
}

KvCost CostModel::inference_cost(std::int64_t prompt_tokens,
                                 std::int64_t decode_tokens) const {
  if (kind_ == Kind::MemoryCentric) return kv_token_time(prompt_tokens, decode_tokens);
  return compute_cost(prompt_tokens, decode_tokens, weights_);
}

KvCost application_cost(const ApplicationJob& app, const CostModel& model) {
  if (app.nodes.empty()) {
    throw std::invalid_argument("app " + std::to_string(app.id) + " has no inference nodes");
  }
  KvCost total;
  for (const auto& node : app.nodes) {
    total += model.inference_cost(node.prompt_len, node.decode_len);
  }
  return total;
}

KvCost max_inference_cost(const ApplicationJob& app) {
  KvCost best;
  for (const auto& node : app.nodes) {
    best = std::max(best, kv_token_time(node.prompt_len, node.decode_len));
  }
  return best;
}

}  // namespace justitia
