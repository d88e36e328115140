#pragma once

#include <map>
#include <span>
#include <vector>

#include "justitia/types.hpp"

namespace justitia {

// One application as a single divisible mass of work.
struct FluidApp {
  AppId id = 0;
  double arrival = 0.0;
  double work = 0.0;  // true KV token-time
};

// Interval during which at least one application holds remaining work.
struct BusyPeriod {
  double start = 0.0;
  double end = 0.0;
  std::vector<AppId> apps;  // in completion order
};

struct GpsSchedule {
  std::map<AppId, double> finish;
  std::vector<BusyPeriod> busy_periods;
  double delivered_work = 0.0;
  double busy_time = 0.0;
};

// Event-driven Generalized Processor Sharing: between events every active
// app drains at service_rate / N_t. Events are arrivals and depletions.
// Zero-work apps complete at arrival. Throws std::invalid_argument for
// negative work, a non-positive rate, or duplicate ids.
GpsSchedule gps_run(std::span<const FluidApp> apps, double service_rate);

// 2*c_max + C_max/M iterations of tau seconds each.
double delay_bound(double max_inference_cost, double max_app_cost, double capacity,
                   double tau = 1.0);

}  // namespace justitia
