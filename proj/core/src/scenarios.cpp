#include "justitia/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <stdexcept>

#include "justitia/gps_reference.hpp"
#include "justitia/justitia_scheduler.hpp"

namespace justitia {

std::vector<ApplicationJob> scenario_starvation(std::size_t n_mice, std::uint64_t seed,
                                                const LengthTable& lengths, int elephant_fan_out) {
  std::mt19937_64 rng(seed);
  ClassProfile elephant = lengths.at(AppClass::MRS);
  if (elephant_fan_out > 0) elephant.min_fan_out = elephant.max_fan_out = elephant_fan_out;
  std::vector<ApplicationJob> apps;
  apps.push_back(generate_application(0, AppClass::MRS, 0.0, elephant, rng));
  constexpr AppClass kMice[] = {AppClass::KBQAV, AppClass::CC, AppClass::ALFWI};
  std::uniform_int_distribution<int> pick(0, 2);
  for (std::size_t i = 1; i <= n_mice; ++i) {
    const AppClass cls = kMice[pick(rng)];
    apps.push_back(generate_application(i, cls, static_cast<double>(i), lengths.at(cls), rng));
  }
  return apps;
}

std::vector<ApplicationJob> scenario_twin_apps(int width, std::int64_t prompt_len,
                                               std::int64_t decode_len) {
  if (width < 1) throw std::invalid_argument("twin apps need at least one node");
  std::mt19937_64 rng(0);
  std::vector<ApplicationJob> apps;
  for (AppId id = 0; id < 2; ++id) {
    ApplicationJob app;
    app.id = id;
    app.cls = AppClass::SC;
    for (int k = 1; k <= width; ++k) {
      app.nodes.push_back(InferenceSpec{static_cast<NodeId>(k), prompt_len, decode_len, {}});
    }
    app.input_text = synthesize_input_text(app.cls, app.nodes, rng);
    apps.push_back(std::move(app));
  }
  return apps;
}

WorkloadConfig mixed_workload_config(std::uint64_t seed, double density) {
  if (!(density > 0.0)) throw std::invalid_argument("density must be positive");
  WorkloadConfig cfg;
  cfg.rng_seed = seed;
  cfg.submission_window = kBaseSubmissionWindow / density;
  return cfg;
}

RunResult simulate(std::span<const ApplicationJob> workload, Predictor& predictor,
                   const SimulationOptions& opts) {
  SchedulerContext ctx;
  ctx.service_rate = opts.engine.service_rate();
  ctx.lengths = opts.lengths;
  ctx.cost_model = opts.cost_model;
  auto scheduler = make_scheduler(opts.scheduler, ctx);
  return run(workload, *scheduler, [&](const ApplicationJob& app) { return predictor.predict(app); },
             opts.engine);
}

RunResult simulate_fair_sharing(std::span<const ApplicationJob> workload, const EngineConfig& cfg) {
  RunResult out;
  if (workload.empty()) return out;
  for (const auto& app : workload) {
    if (app.arrival_time != workload.front().arrival_time) {
      throw std::invalid_argument("fair-sharing simulation needs simultaneous arrivals");
    }
  }
  EngineConfig share = cfg;
  share.capacity = cfg.capacity / static_cast<std::int64_t>(workload.size());
  std::vector<FluidApp> fluid;
  for (const auto& app : workload) {
    AppFcfsScheduler scheduler;
    const auto single = run(std::span(&app, 1), scheduler,
                            [](const ApplicationJob& a) { return application_cost(a, CostModel::memory_centric()); },
                            share);
    out.records.push_back(single.records.front());
    out.makespan = std::max(out.makespan, single.makespan);
    out.stats.iterations = std::max(out.stats.iterations, single.stats.iterations);
    out.stats.swaps += single.stats.swaps;
    fluid.push_back(FluidApp{app.id, app.arrival_time, single.records.front().true_cost});
  }
  const GpsSchedule gps = gps_run(fluid, cfg.service_rate());
  for (auto& rec : out.records) rec.gps_completion = gps.finish.at(rec.app_id);
  std::sort(out.records.begin(), out.records.end(),
            [](const RunRecord& a, const RunRecord& b) { return a.app_id < b.app_id; });
  return out;
}

DecisionOverhead measure_decision_overhead(std::size_t queued_apps, std::size_t samples,
                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> len(10, 1000);
  auto make_app = [&](AppId id, double t) {
    ApplicationJob app;
    app.id = id;
    app.cls = AppClass::EV;
    app.arrival_time = t;
    app.nodes.push_back(InferenceSpec{1, len(rng), len(rng), {}});
    return app;
  };
  // Large costs relative to the rate keep every app GPS-active throughout.
  JustitiaScheduler scheduler(1.0);
  std::vector<ApplicationJob> apps;
  apps.reserve(queued_apps + samples);
  for (std::size_t i = 0; i < queued_apps + samples; ++i) {
    apps.push_back(make_app(i, 1e-9 * static_cast<double>(i)));
  }
  for (std::size_t i = 0; i < queued_apps; ++i) {
    scheduler.on_arrival(apps[i], KvCost(1e12 + static_cast<double>(len(rng))), apps[i].arrival_time);
  }
  double total = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const ApplicationJob& app = apps[queued_apps + s];
    const KvCost cost(1e12 + static_cast<double>(len(rng)));
    const auto start = std::chrono::steady_clock::now();
    scheduler.on_arrival(app, cost, app.arrival_time);
    const auto next = scheduler.pick_next();
    total += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (next) {
      scheduler.on_admitted(*next, app.arrival_time);
      scheduler.on_node_completion(*next, app.arrival_time);
    }
  }
  return DecisionOverhead{queued_apps, samples ? total / static_cast<double>(samples) : 0.0};
}

}  // namespace justitia
