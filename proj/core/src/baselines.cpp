#include "justitia/baselines.hpp"

#include <cmath>
#include <stdexcept>

#include "justitia/justitia_scheduler.hpp"

namespace justitia {

void VtcCounter::track(AppId app) {
  if (value_.contains(app)) throw std::invalid_argument("app already tracked");
  const double start = min_tracked().value_or(0.0);
  value_.emplace(app, start);
  tracked_.emplace(start, app);
}

void VtcCounter::untrack(AppId app) {
  auto it = value_.find(app);
  if (it == value_.end()) return;
  tracked_.erase(tracked_.find({it->second, app}));
  value_.erase(it);
}

double VtcCounter::update(AppId app, std::int64_t prompt_tokens, std::int64_t decode_tokens) {
  auto it = value_.find(app);
  if (it == value_.end()) throw std::out_of_range("untracked app " + std::to_string(app));
  const double delta = weights_.prompt * static_cast<double>(prompt_tokens) +
                       weights_.decode * static_cast<double>(decode_tokens);
  if (delta == 0.0) return it->second;
  tracked_.erase(tracked_.find({it->second, app}));
  it->second += delta;
  tracked_.emplace(it->second, app);
  return it->second;
}

double VtcCounter::value(AppId app) const {
  auto it = value_.find(app);
  if (it == value_.end()) throw std::out_of_range("untracked app " + std::to_string(app));
  return it->second;
}

std::optional<double> VtcCounter::min_tracked() const {
  if (tracked_.empty()) return std::nullopt;
  return tracked_.begin()->first;
}

void InfFcfsScheduler::on_arrival(const ApplicationJob& app, KvCost, double now) {
  queue_.add_app(app, now);
}

PriorityKey InfFcfsScheduler::priority_of(NodeRef node) const {
  return PriorityKey{queue_.release_time(node), queue_.app(node.app).arrival_time, node.app,
                     queue_.rank_of(node)};
}

InfSjfScheduler::InfSjfScheduler(const LengthTable& lengths) {
  for (const auto& [cls, profile] : lengths) mean_decode_[cls] = profile.decode.mean();
}

void InfSjfScheduler::on_arrival(const ApplicationJob& app, KvCost, double now) {
  if (!mean_decode_.contains(app.cls)) {
    throw std::invalid_argument("no decode-length estimate for class " +
                                std::string(to_string(app.cls)));
  }
  queue_.add_app(app, now);
}

PriorityKey InfSjfScheduler::priority_of(NodeRef node) const {
  const ApplicationJob& job = queue_.app(node.app);
  const auto& spec = job.nodes.at(node.index);
  const auto d = static_cast<std::int64_t>(std::llround(mean_decode_.at(job.cls)));
  return PriorityKey{kv_token_time(spec.prompt_len, d).value, queue_.release_time(node), node.app,
                     queue_.rank_of(node)};
}

void AppFcfsScheduler::on_arrival(const ApplicationJob& app, KvCost, double now) {
  queue_.add_app(app, now);
}

PriorityKey AppFcfsScheduler::priority_of(NodeRef node) const {
  return PriorityKey{queue_.app(node.app).arrival_time, 0.0, node.app, queue_.rank_of(node)};
}

void VtcScheduler::on_arrival(const ApplicationJob& app, KvCost, double now) {
  counter_.track(app.id);
  queue_.add_app(app, now);
}

void VtcScheduler::on_progress(NodeRef node, std::int64_t prompt_tokens,
                               std::int64_t decode_tokens) {
  counter_.update(node.app, prompt_tokens, decode_tokens);
  queue_.rekey_app(node.app);
}

void VtcScheduler::on_node_completion(NodeRef node, double now) {
  queue_.complete(node, now);
  if (queue_.app_finished(node.app)) counter_.untrack(node.app);
}

PriorityKey VtcScheduler::priority_of(NodeRef node) const {
  return PriorityKey{counter_.value(node.app), queue_.app(node.app).arrival_time, node.app,
                     queue_.rank_of(node)};
}

void SrjfScheduler::on_arrival(const ApplicationJob& app, KvCost predicted_cost, double now) {
  if (remaining_.contains(app.id)) {
    throw std::invalid_argument("duplicate app id " + std::to_string(app.id));
  }
  remaining_.emplace(app.id, predicted_cost.value);
  queue_.add_app(app, now);
}

void SrjfScheduler::on_node_completion(NodeRef node, double now) {
  const auto& spec = queue_.app(node.app).nodes.at(node.index);
  double& rem = remaining_.at(node.app);
  rem = std::max(0.0, rem - model_.inference_cost(spec.prompt_len, spec.decode_len).value);
  queue_.complete(node, now);
  queue_.rekey_app(node.app);
}

PriorityKey SrjfScheduler::priority_of(NodeRef node) const {
  return PriorityKey{remaining_.at(node.app), queue_.app(node.app).arrival_time, node.app,
                     queue_.rank_of(node)};
}

std::string_view to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::InfFcfs: return "inf-fcfs";
    case BaselineKind::InfSjf: return "inf-sjf";
    case BaselineKind::AppFcfs: return "app-fcfs";
    case BaselineKind::Vtc: return "vtc";
    case BaselineKind::Srjf: return "srjf";
  }
  return "?";
}

std::string_view to_string(SchedulerKind kind) {
  switch (kind) {
    case SchedulerKind::Justitia: return "justitia";
    case SchedulerKind::InfFcfs: return "inf-fcfs";
    case SchedulerKind::InfSjf: return "inf-sjf";
    case SchedulerKind::AppFcfs: return "app-fcfs";
    case SchedulerKind::Vtc: return "vtc";
    case SchedulerKind::Srjf: return "srjf";
  }
  return "?";
}

std::optional<SchedulerKind> parse_scheduler_kind(std::string_view name) {
  for (SchedulerKind kind : kAllSchedulers) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

std::unique_ptr<Scheduler> make_scheduler(SchedulerKind kind, const SchedulerContext& ctx) {
  switch (kind) {
    case SchedulerKind::Justitia: return std::make_unique<JustitiaScheduler>(ctx.service_rate);
    case SchedulerKind::InfFcfs: return std::make_unique<InfFcfsScheduler>();
    case SchedulerKind::InfSjf: return std::make_unique<InfSjfScheduler>(ctx.lengths);
    case SchedulerKind::AppFcfs: return std::make_unique<AppFcfsScheduler>();
    case SchedulerKind::Vtc: return std::make_unique<VtcScheduler>(ctx.vtc_weights);
    case SchedulerKind::Srjf: return std::make_unique<SrjfScheduler>(ctx.cost_model);
  }
  throw std::invalid_argument("unknown scheduler kind");
}

}  // namespace justitia
