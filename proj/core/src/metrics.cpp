#include "justitia/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "justitia/gps_reference.hpp"

namespace justitia {

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty set");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("percentile rank outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

struct Extremes {
  double c_max = 0.0;
  double app_max = 0.0;
};

Extremes extremes(std::span<const RunRecord> records) {
  Extremes e;
  for (const auto& r : records) {
    e.c_max = std::max(e.c_max, r.max_inference_cost);
    e.app_max = std::max(e.app_max, r.true_cost);
  }
  return e;
}

}  // namespace

RunReport compute_metrics(std::span<const RunRecord> records, std::span<const RunRecord> reference,
                          std::int64_t capacity, double tau) {
  RunReport report;
  report.apps = records.size();
  if (records.empty()) return report;

  std::map<AppId, const RunRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.app_id, &r);
  std::map<AppId, const RunRecord*> ref_by_id;
  for (const auto& r : reference) ref_by_id.emplace(r.app_id, &r);
  if (!reference.empty()) {
    bool same = ref_by_id.size() == by_id.size();
    for (auto a = by_id.begin(), b = ref_by_id.begin(); same && a != by_id.end(); ++a, ++b) {
      same = a->first == b->first;
    }
    if (!same) throw std::invalid_argument("run and reference cover different app sets");
  }

  std::vector<double> jcts;
  for (const auto& [id, r] : by_id) jcts.push_back(r->jct());
  report.avg_jct = std::accumulate(jcts.begin(), jcts.end(), 0.0) / static_cast<double>(jcts.size());
  report.p50_jct = percentile(jcts, 0.5);
  report.p90_jct = percentile(jcts, 0.9);

  const Extremes e = extremes(records);
  report.bound = delay_bound(e.c_max, e.app_max, static_cast<double>(capacity), tau);
  report.max_delay = -std::numeric_limits<double>::infinity();
  std::size_t not_delayed = 0;
  for (const auto& [id, r] : by_id) {
    const double delay = r->completion - r->gps_completion;
    report.max_delay = std::max(report.max_delay, delay);
    report.bound_slacks.push_back(report.bound - delay);
    if (reference.empty()) {
      if (delay <= kFairEpsilon * std::max(1.0, std::abs(r->gps_completion))) ++not_delayed;
      continue;
    }
    const RunRecord& ref = *ref_by_id.at(id);
    const double ratio = ref.jct() > 0.0 ? r->jct() / ref.jct() : 1.0;
    report.fair_ratios.push_back(ratio);
    report.worst_fair_ratio = std::max(report.worst_fair_ratio, ratio);
    if (ratio <= 1.0 + kFairEpsilon) ++not_delayed;
  }
  report.frac_not_delayed = static_cast<double>(not_delayed) / static_cast<double>(records.size());
  return report;
}

void attach_overhead(RunReport& report, const EngineStats& stats) {
  report.decision_max_ms = 1e3 * stats.decision_seconds_max;
  report.decision_mean_ms =
      stats.decisions ? 1e3 * stats.decision_seconds_total / static_cast<double>(stats.decisions)
                      : 0.0;
}

std::vector<std::pair<double, double>> fair_ratio_cdf(std::span<const double> ratios) {
  std::vector<double> sorted(ratios.begin(), ratios.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> out;
  out.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    out.emplace_back(sorted[i], static_cast<double>(i + 1) / static_cast<double>(sorted.size()));
  }
  return out;
}

BoundCheck check_delay_bound(std::span<const RunRecord> records, std::int64_t capacity,
                             double tau) {
  BoundCheck check;
  const Extremes e = extremes(records);
  check.bound = delay_bound(e.c_max, e.app_max, static_cast<double>(capacity), tau);
  check.max_delay = -std::numeric_limits<double>::infinity();
  const double allowance = 1e-9 * std::max(1.0, check.bound);
  for (const auto& r : records) {
    const double delay = r.completion - r.gps_completion;
    if (delay > check.max_delay) {
      check.max_delay = delay;
      check.worst_app = r.app_id;
    }
    if (delay > check.bound + allowance) ++check.violations;
  }
  check.pass = check.violations == 0;
  return check;
}

}  // namespace justitia
