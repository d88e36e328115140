#include "justitia/gps_reference.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace justitia {

namespace {

struct Active {
  AppId id;
  double work;
  double remaining;
};

}  // namespace

GpsSchedule gps_run(std::span<const FluidApp> apps, double service_rate) {
  if (!(service_rate > 0.0)) throw std::invalid_argument("GPS service rate must be positive");
  std::vector<FluidApp> sorted(apps.begin(), apps.end());
  for (const auto& a : sorted) {
    if (!(a.work >= 0.0)) {
      throw std::invalid_argument("app " + std::to_string(a.id) + " has negative work");
    }
  }
  std::stable_sort(sorted.begin(), sorted.end(), [](const FluidApp& a, const FluidApp& b) {
    return a.arrival != b.arrival ? a.arrival < b.arrival : a.id < b.id;
  });

  GpsSchedule out;
  std::vector<Active> active;
  std::size_t next = 0;
  double now = 0.0;
  bool in_period = false;

  auto finish = [&](AppId id, double t) {
    if (!out.finish.emplace(id, t).second) {
      throw std::invalid_argument("duplicate app id " + std::to_string(id));
    }
    out.busy_periods.back().apps.push_back(id);
  };
  auto open_period = [&](double t) {
    if (!in_period) {
      out.busy_periods.push_back(BusyPeriod{t, t, {}});
      in_period = true;
    }
  };
  auto close_period_if_idle = [&] {
    if (in_period && active.empty()) {
      out.busy_periods.back().end = now;
      out.busy_time += now - out.busy_periods.back().start;
      in_period = false;
    }
  };
  auto admit_arrivals = [&] {
    while (next < sorted.size() && sorted[next].arrival <= now) {
      const FluidApp& a = sorted[next++];
      open_period(now);
      if (a.work == 0.0) {
        finish(a.id, a.arrival);
      } else {
        active.push_back(Active{a.id, a.work, a.work});
      }
    }
    close_period_if_idle();
  };

  while (next < sorted.size() || !active.empty()) {
    if (active.empty()) {
      now = std::max(now, sorted[next].arrival);
      admit_arrivals();
      continue;
    }
    const double n = static_cast<double>(active.size());
    const double share = service_rate / n;
    const auto min_it = std::min_element(active.begin(), active.end(),
                                         [](const Active& a, const Active& b) {
                                           return a.remaining < b.remaining;
                                         });
    const double depletion = now + min_it->remaining / share;
    const double arrival = next < sorted.size() ? sorted[next].arrival
                                                : std::numeric_limits<double>::infinity();
    if (depletion <= arrival) {
      const double amount = min_it->remaining;
      out.delivered_work += amount * n;
      now = depletion;
      for (auto& a : active) a.remaining -= amount;
      min_it->remaining = 0.0;
      // Apps within rounding of zero deplete at the same instant.
      std::vector<Active> keep;
      std::vector<Active> done;
      for (const auto& a : active) {
        (a.remaining <= 1e-12 * std::max(1.0, a.work) ? done : keep).push_back(a);
      }
      std::stable_sort(done.begin(), done.end(),
                       [](const Active& a, const Active& b) { return a.id < b.id; });
      for (const auto& a : done) finish(a.id, now);
      active = std::move(keep);
      admit_arrivals();
    } else {
      const double amount = share * (arrival - now);
      out.delivered_work += amount * n;
      for (auto& a : active) a.remaining -= amount;
      now = arrival;
      admit_arrivals();
    }
  }
  return out;
}

double delay_bound(double max_inference_cost, double max_app_cost, double capacity, double tau) {
  if (!(capacity > 0.0)) throw std::invalid_argument("capacity must be positive");
  return tau * (2.0 * max_inference_cost + max_app_cost / capacity);
}

}  // namespace justitia
