#pragma once

#include <optional>
#include <set>
#include <unordered_map>
#include <utility>
#include <vector>

#include "justitia/scheduler.hpp"

namespace justitia {

struct GpsCrossing {
  AppId app = 0;
  double time = 0.0;            // real time at which V reached the tag
  double virtual_finish = 0.0;  // F_j
};

// Piecewise-linear virtual time. V(0) = 0 and dV/dt = rate / N_t while N_t > 0
// apps are GPS-active; V holds constant while none are. An app is active from
// activation until V reaches its virtual finish tag.
class VirtualClock {
 public:
  // `service_rate` is KV token-time delivered per unit of real time
  // (capacity / tau for an engine with tau-second iterations).
  explicit VirtualClock(double service_rate);

  // Integrates to real time t, recording each tag crossing passed on the way.
  // Throws std::invalid_argument if t precedes the last update.
  void advance(double t);

  // Advances until no app is active.
  void drain();

  // Registers an app whose tag was computed at the current instant. A tag
  // not above V completes immediately.
  void activate(AppId app, double virtual_finish);

  double virtual_now() const { return v_now_; }
  double last_update() const { return t_last_; }
  double service_rate() const { return rate_; }
  std::size_t active_count() const { return active_.size(); }
  const std::vector<GpsCrossing>& crossings() const { return crossings_; }
  std::optional<double> gps_finish(AppId app) const;

 private:
  void record(AppId app, double virtual_finish);

  double rate_;
  double v_now_ = 0.0;
  double t_last_ = 0.0;
  std::multiset<std::pair<double, AppId>> active_;
  std::vector<GpsCrossing> crossings_;
  std::unordered_map<AppId, std::size_t> crossing_index_;
};

struct AppPriority {
  AppId app = 0;
  double virtual_finish = 0.0;
  KvCost predicted_cost;
};

// Application-level fair queuing: each app is tagged once at arrival with
// F_j = V(a_j) + C_j and all of its inferences are served in ascending F_j,
// never interleaving below a higher-priority app with ready work.
// Ties on F_j break by arrival time, then app id.
class JustitiaScheduler : public QueueScheduler {
 public:
  explicit JustitiaScheduler(double service_rate) : clock_(service_rate) {}

  std::string_view name() const override { return "justitia"; }

  // Advances the clock to `now`, assigns F_j, enqueues root nodes.
  // Throws std::invalid_argument on a duplicate app id or time regression.
  void on_arrival(const ApplicationJob& app, KvCost predicted_cost, double now) override;

  PriorityKey priority_of(NodeRef node) const override;

  const AppPriority& priority(AppId app) const;
  const VirtualClock& clock() const { return clock_; }
  VirtualClock& clock() { return clock_; }

 private:
  VirtualClock clock_;
  std::unordered_map<AppId, AppPriority> priorities_;
  std::unordered_map<AppId, double> arrival_;
};

}  // namespace justitia
