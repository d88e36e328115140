#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "justitia/baselines.hpp"
#include "justitia/engine.hpp"
#include "justitia/predictor.hpp"
#include "justitia/workload.hpp"

namespace justitia {

// One MRS elephant at t = 0 (id 0) and n_mice small apps drawn uniformly
// from KBQAV, CC and ALFWI at t = 1, 2, ..., n_mice seconds.
std::vector<ApplicationJob> scenario_starvation(std::size_t n_mice, std::uint64_t seed,
                                                const LengthTable& lengths = default_length_table(),
                                                int elephant_fan_out = 0);

// The starvation bench needs a mouse stream that outruns the pool: a small
// pool and a narrow elephant.
inline constexpr int kStarvationElephantFanOut = 2;
inline EngineConfig starvation_engine_config() {
  EngineConfig cfg;
  cfg.capacity = 8000;
  return cfg;
}

// Two identical apps of `width` parallel (p, d) nodes arriving together.
std::vector<ApplicationJob> scenario_twin_apps(int width, std::int64_t prompt_len,
                                               std::int64_t decode_len);

// Default mixed suite: 300 apps over a window of base_window / density.
inline constexpr double kBaseSubmissionWindow = 1080.0;
WorkloadConfig mixed_workload_config(std::uint64_t seed, double density = 3.0);

struct SimulationOptions {
  SchedulerKind scheduler = SchedulerKind::Justitia;
  CostModel cost_model = CostModel::memory_centric();
  EngineConfig engine{};
  LengthTable lengths = default_length_table();
};

// Scheduler built from `opts`; predictions come from `predictor`.
RunResult simulate(std::span<const ApplicationJob> workload, Predictor& predictor,
                   const SimulationOptions& opts);

// Instantaneous equal sharing for apps that all arrive together: each of
// the n apps runs alone on a pool of capacity / n.
RunResult simulate_fair_sharing(std::span<const ApplicationJob> workload, const EngineConfig& cfg);

struct DecisionOverhead {
  std::size_t queued_apps = 0;
  double mean_seconds = 0.0;  // one arrival insert plus one pick-next
};

// Justitia decision latency with `queued_apps` apps already waiting.
DecisionOverhead measure_decision_overhead(std::size_t queued_apps, std::size_t samples,
                                           std::uint64_t seed);

}  // namespace justitia
