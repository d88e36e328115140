#include "justitia/justitia_scheduler.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace justitia {

VirtualClock::VirtualClock(double service_rate) : rate_(service_rate) {
  if (!(service_rate > 0.0)) throw std::invalid_argument("service rate must be positive");
}

void VirtualClock::record(AppId app, double virtual_finish) {
  crossing_index_[app] = crossings_.size();
  crossings_.push_back(GpsCrossing{app, t_last_, virtual_finish});
}

void VirtualClock::advance(double t) {
  if (t < t_last_) {
    throw std::invalid_argument("virtual clock cannot move backwards (" + std::to_string(t) +
                                " < " + std::to_string(t_last_) + ")");
  }
  while (!active_.empty()) {
    const double slope = rate_ / static_cast<double>(active_.size());
    const double tag = active_.begin()->first;
    const double cross = t_last_ + (tag - v_now_) / slope;
    if (cross > t) {
      v_now_ += slope * (t - t_last_);
      t_last_ = t;
      return;
    }
    t_last_ = cross;
    v_now_ = tag;
    while (!active_.empty() && active_.begin()->first <= v_now_) {
      record(active_.begin()->second, active_.begin()->first);
      active_.erase(active_.begin());
    }
  }
  t_last_ = t;
}

void VirtualClock::drain() {
  while (!active_.empty()) {
    const double slope = rate_ / static_cast<double>(active_.size());
    advance(t_last_ + (active_.begin()->first - v_now_) / slope);
  }
}

void VirtualClock::activate(AppId app, double virtual_finish) {
  if (virtual_finish <= v_now_) {
    record(app, virtual_finish);
    return;
  }
  active_.emplace(virtual_finish, app);
}

std::optional<double> VirtualClock::gps_finish(AppId app) const {
  auto it = crossing_index_.find(app);
  if (it == crossing_index_.end()) return std::nullopt;
  return crossings_[it->second].time;
}

void JustitiaScheduler::on_arrival(const ApplicationJob& app, KvCost predicted_cost, double now) {
  if (priorities_.contains(app.id)) {
    throw std::invalid_argument("duplicate app id " + std::to_string(app.id));
  }
  clock_.advance(now);
  const double tag = clock_.virtual_now() + predicted_cost.value;
  priorities_.emplace(app.id, AppPriority{app.id, tag, predicted_cost});
  arrival_.emplace(app.id, app.arrival_time);
  clock_.activate(app.id, tag);
  queue_.add_app(app, now);
}

PriorityKey JustitiaScheduler::priority_of(NodeRef node) const {
  const AppPriority& p = priority(node.app);
  return PriorityKey{p.virtual_finish, arrival_.at(node.app), node.app, queue_.rank_of(node)};
}

const AppPriority& JustitiaScheduler::priority(AppId app) const {
  auto it = priorities_.find(app);
  if (it == priorities_.end()) throw std::out_of_range("unknown app " + std::to_string(app));
  return it->second;
}

}  // namespace justitia
