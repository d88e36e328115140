#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>

#include "justitia/scheduler.hpp"
#include "justitia/workload.hpp"

namespace justitia {

enum class BaselineKind { InfFcfs, InfSjf, AppFcfs, Vtc, Srjf };

// Per-app served-work counter, w_p * prompt tokens admitted + w_d * decode
// tokens emitted. A newly tracked app starts at the smallest counter among
// apps still tracked (0 when none), so late arrivals cannot claim credit
// for time they were absent.
class VtcCounter {
 public:
  explicit VtcCounter(ComputeWeights weights = {}) : weights_(weights) {}

  void track(AppId app);
  void untrack(AppId app);
  // Adds w_p * prompt_tokens + w_d * decode_tokens; returns the new value.
  double update(AppId app, std::int64_t prompt_tokens, std::int64_t decode_tokens);
  double value(AppId app) const;
  std::optional<double> min_tracked() const;
  const ComputeWeights& weights() const { return weights_; }

 private:
  ComputeWeights weights_;
  std::unordered_map<AppId, double> value_;
  std::multiset<std::pair<double, AppId>> tracked_;
};

// First-come-first-serve over inferences by dependency release time.
class InfFcfsScheduler : public QueueScheduler {
 public:
  std::string_view name() const override { return "inf-fcfs"; }
  void on_arrival(const ApplicationJob& app, KvCost predicted_cost, double now) override;
  PriorityKey priority_of(NodeRef node) const override;
};

// Shortest predicted inference first. A node's estimate is
// kv_token_time(p, mean decode length of its class).
class InfSjfScheduler : public QueueScheduler {
 public:
  explicit InfSjfScheduler(const LengthTable& lengths);
  std::string_view name() const override { return "inf-sjf"; }
  void on_arrival(const ApplicationJob& app, KvCost predicted_cost, double now) override;
  PriorityKey priority_of(NodeRef node) const override;

 private:
  std::map<AppClass, double> mean_decode_;
};

// FCFS at application level: all inferences of the earliest app first.
class AppFcfsScheduler : public QueueScheduler {
 public:
  std::string_view name() const override { return "app-fcfs"; }
  void on_arrival(const ApplicationJob& app, KvCost predicted_cost, double now) override;
  PriorityKey priority_of(NodeRef node) const override;
};

// Least served app first, per VtcCounter.
class VtcScheduler : public QueueScheduler {
 public:
  explicit VtcScheduler(ComputeWeights weights = {}) : counter_(weights) {}
  std::string_view name() const override { return "vtc"; }
  void on_arrival(const ApplicationJob& app, KvCost predicted_cost, double now) override;
  void on_progress(NodeRef node, std::int64_t prompt_tokens, std::int64_t decode_tokens) override;
  void on_node_completion(NodeRef node, double now) override;
  PriorityKey priority_of(NodeRef node) const override;
  const VtcCounter& counter() const { return counter_; }

 private:
  VtcCounter counter_;
};

// Shortest predicted remaining application cost first. Remaining cost drops
// by each finished inference's cost under `model`.
class SrjfScheduler : public QueueScheduler {
 public:
  explicit SrjfScheduler(CostModel model = CostModel::memory_centric()) : model_(model) {}
  std::string_view name() const override { return "srjf"; }
  void on_arrival(const ApplicationJob& app, KvCost predicted_cost, double now) override;
  void on_node_completion(NodeRef node, double now) override;
  PriorityKey priority_of(NodeRef node) const override;
  double remaining(AppId app) const { return remaining_.at(app); }

 private:
  CostModel model_;
  std::unordered_map<AppId, double> remaining_;
};

std::string_view to_string(BaselineKind kind);

enum class SchedulerKind { Justitia, InfFcfs, InfSjf, AppFcfs, Vtc, Srjf };

inline constexpr SchedulerKind kAllSchedulers[] = {
    SchedulerKind::Justitia, SchedulerKind::InfFcfs, SchedulerKind::InfSjf,
    SchedulerKind::AppFcfs,  SchedulerKind::Vtc,     SchedulerKind::Srjf};

std::string_view to_string(SchedulerKind kind);
std::optional<SchedulerKind> parse_scheduler_kind(std::string_view name);

struct SchedulerContext {
  double service_rate = 1.0;  // capacity / tau, for the virtual clock
  LengthTable lengths = default_length_table();
  CostModel cost_model = CostModel::memory_centric();
  ComputeWeights vtc_weights{};
};

std::unique_ptr<Scheduler> make_scheduler(SchedulerKind kind, const SchedulerContext& ctx);

}  // namespace justitia
