#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "justitia/metrics.hpp"
#include "justitia/predictor.hpp"
#include "justitia/scenarios.hpp"

namespace justitia::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitBoundViolation = 2;

// Entry point shared by the binary and the tests. Returns the process exit
// code; usage errors print help to `err` and return nonzero.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Workload config overrides. Either a JSON object or key=value lines ('#'
// starts a comment). Keys: app_count, submission_window, density, seed,
// size_mix ("small,medium,large"), trace, trace_scale.
WorkloadConfig read_workload_config(std::istream& in, WorkloadConfig base = {});

// Header: scheduler,avg_jct,p90_jct,frac_not_delayed,max_delay,bound
void write_report_csv(std::ostream& out, std::span<const RunReport> reports);
// Header: ratio,cum_fraction
void write_cdf_csv(std::ostream& out, std::span<const double> ratios);

struct RunSpec {
  SchedulerKind scheduler = SchedulerKind::Justitia;
  PredictorKind predictor = PredictorKind::Oracle;
  CostModel cost_model = CostModel::memory_centric();
  EngineConfig engine{};
  std::uint64_t seed = 1;  // predictor training seed
  std::string model_dir;   // load trained models instead of training
};

// Builds the predictor a run would use. MLP kinds train on synthetic
// history under the run's cost model unless model_dir is set.
std::unique_ptr<Predictor> build_predictor(const RunSpec& spec);

}  // namespace justitia::cli
