#pragma once

#include <compare>
#include <cstdint>

#include "justitia/types.hpp"

namespace justitia {

// Service cost in KV token-time: one token resident in the KV cache for one
// decode iteration. Integral costs are exact up to 2^53.
struct KvCost {
  double value = 0.0;

  constexpr KvCost() = default;
  constexpr explicit KvCost(double v) : value(v) {}

  constexpr KvCost& operator+=(KvCost other) {
    value += other.value;
    return *this;
  }
  friend constexpr KvCost operator+(KvCost a, KvCost b) { return KvCost(a.value + b.value); }
  friend constexpr auto operator<=>(KvCost, KvCost) = default;
};

struct ComputeWeights {
  double prompt = 1.0;
  double decode = 2.0;
};

// Cumulative KV occupancy of one inference: sum_{i=1..d} (p + i)
// = p*d + d*(d+1)/2. The prefill iteration itself is not counted.
// The continuous approximation p*d + d^2/2 differs by d/2.
KvCost kv_token_time(std::int64_t prompt_tokens, std::int64_t decode_tokens);

// Token-count cost w_p*p + w_d*d, the counter used by VTC-style schedulers.
KvCost compute_cost(std::int64_t prompt_tokens, std::int64_t decode_tokens,
                    ComputeWeights weights = {});

class CostModel {
 public:
  enum class Kind { MemoryCentric, ComputeCentric };

  static CostModel memory_centric() { return CostModel(Kind::MemoryCentric, {}); }
  // Throws std::invalid_argument for non-positive weights.
  static CostModel compute_centric(ComputeWeights weights = {});

  Kind kind() const { return kind_; }
  const ComputeWeights& weights() const { return weights_; }

  KvCost inference_cost(std::int64_t prompt_tokens, std::int64_t decode_tokens) const;

 private:
  CostModel(Kind kind, ComputeWeights weights) : kind_(kind), weights_(weights) {}

  Kind kind_;
  ComputeWeights weights_;
};

// Sum of per-inference costs; throws std::invalid_argument for an empty app.
KvCost application_cost(const ApplicationJob& app, const CostModel& model);

// Largest single-inference KV token-time in the application.
KvCost max_inference_cost(const ApplicationJob& app);

}  // namespace justitia
