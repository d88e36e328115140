#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "justitia/engine.hpp"

namespace justitia {

// Linear interpolation between closest ranks: position q * (n - 1).
double percentile(std::vector<double> values, double q);

struct RunReport {
  std::string scheduler;
  std::size_t apps = 0;
  double avg_jct = 0.0;
  double p50_jct = 0.0;
  double p90_jct = 0.0;
  // JCT under the run divided by JCT under the reference, by app id. Lower
  // is better. Empty when no reference was given.
  std::vector<double> fair_ratios;
  double frac_not_delayed = 0.0;  // ratio <= 1 + 1e-9 (or f_j <= gps f_j without a reference)
  double worst_fair_ratio = 0.0;
  // bound - (f_j - gps f_j), by app id.
  std::vector<double> bound_slacks;
  double max_delay = 0.0;  // max over apps of f_j - gps f_j
  double bound = 0.0;      // 2 c_max + C_max / M, in seconds
  double decision_mean_ms = 0.0;
  double decision_max_ms = 0.0;
};

inline constexpr double kFairEpsilon = 1e-9;

// Throws std::invalid_argument when `reference` is non-empty and covers a
// different app set.
RunReport compute_metrics(std::span<const RunRecord> records, std::span<const RunRecord> reference,
                          std::int64_t capacity, double tau);

// Adds decision latency from engine stats.
void attach_overhead(RunReport& report, const EngineStats& stats);

// Sorted (ratio, cumulative fraction) points, one per app.
std::vector<std::pair<double, double>> fair_ratio_cdf(std::span<const double> ratios);

struct BoundCheck {
  bool pass = true;
  double bound = 0.0;
  double max_delay = 0.0;
  std::optional<AppId> worst_app;  // largest f_j - gps f_j
  std::size_t violations = 0;
};

// f_j - gps f_j <= tau * (2 c_max + C_max / M) for every record, with a
// 1e-9 relative allowance for floating-point time accumulation.
BoundCheck check_delay_bound(std::span<const RunRecord> records, std::int64_t capacity, double tau);

}  // namespace justitia
