#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "justitia/cost_model.hpp"
#include "justitia/types.hpp"

namespace justitia {

// A node is addressed by its owning app and its index in ApplicationJob::nodes.
struct NodeRef {
  AppId app = 0;
  std::uint32_t index = 0;

  friend auto operator<=>(const NodeRef&, const NodeRef&) = default;
};

// Lexicographic scheduling key; smaller is served first. `rank` is the
// node's position in the app's topological order.
struct PriorityKey {
  double primary = 0.0;
  double secondary = 0.0;
  AppId app = 0;
  std::uint32_t rank = 0;

  friend auto operator<=>(const PriorityKey&, const PriorityKey&) = default;
};

// Contract between the engine and every scheduling policy. Applications
// passed to on_arrival must outlive the scheduler.
class Scheduler {
 public:
  virtual ~Scheduler() = default;

  virtual std::string_view name() const = 0;

  virtual void on_arrival(const ApplicationJob& app, KvCost predicted_cost, double now) = 0;

  // Highest-priority ready node, or none. Does not remove it.
  virtual std::optional<NodeRef> pick_next() const = 0;

  // The engine allocated KV space to `node`; it leaves the waiting queue.
  virtual void on_admitted(NodeRef node, double now) = 0;

  // Service delivered to a running node: prompt tokens at admission, one
  // decode token per iteration afterwards.
  virtual void on_progress(NodeRef /*node*/, std::int64_t /*prompt_tokens*/,
                           std::int64_t /*decode_tokens*/) {}

  virtual void on_node_completion(NodeRef node, double now) = 0;

  // Current key of any node known to the scheduler, used for swap victim
  // selection (largest key is suspended first).
  virtual PriorityKey priority_of(NodeRef node) const = 0;

  virtual std::size_t ready_count() const = 0;
};

// Ready-node bookkeeping shared by all policies: DAG release gating and an
// ordered set of ready nodes. pick-next is O(1), insert/erase O(log n).
class SchedulerQueue {
 public:
  using KeyFn = std::function<PriorityKey(NodeRef)>;

  explicit SchedulerQueue(KeyFn key) : key_(std::move(key)) {}

  // Registers the DAG and releases root nodes at `now`. Throws on duplicate ids.
  void add_app(const ApplicationJob& app, double now);

  bool contains(AppId app) const { return apps_.contains(app); }
  const ApplicationJob& app(AppId id) const;

  std::optional<NodeRef> front() const;

  // Removes a ready node; throws std::logic_error if it is not ready.
  void take(NodeRef node);

  // Marks a taken node done, releasing successors whose deps are all done.
  // Returns the newly released nodes. Throws for unknown or non-running nodes.
  std::vector<NodeRef> complete(NodeRef node, double now);

  // Recomputes keys of all ready nodes of `app` after its priority changed.
  void rekey_app(AppId app);

  bool app_finished(AppId app) const;
  std::uint32_t rank_of(NodeRef node) const;
  double release_time(NodeRef node) const;
  std::size_t ready_count() const { return ready_.size(); }
  std::vector<NodeRef> ready_nodes_of(AppId app) const;

 private:
  enum class NodeState { Blocked, Ready, Taken, Done };

  struct AppEntry {
    const ApplicationJob* job = nullptr;
    std::vector<std::uint32_t> rank;
    std::vector<int> pending;
    std::vector<std::vector<std::uint32_t>> successors;
    std::vector<double> release;
    std::vector<NodeState> state;
    std::vector<PriorityKey> key;
    std::size_t done = 0;
  };

  AppEntry& entry(AppId app);
  const AppEntry& entry(AppId app) const;
  void release(AppEntry& e, AppId app, std::uint32_t index, double now);

  KeyFn key_;
  std::unordered_map<AppId, AppEntry> apps_;
  std::set<std::pair<PriorityKey, NodeRef>> ready_;
};

// Base for policies that only differ in how they key ready nodes.
class QueueScheduler : public Scheduler {
 public:
  QueueScheduler() : queue_([this](NodeRef n) { return priority_of(n); }) {}

  std::optional<NodeRef> pick_next() const override { return queue_.front(); }
  void on_admitted(NodeRef node, double) override { queue_.take(node); }
  void on_node_completion(NodeRef node, double now) override { queue_.complete(node, now); }
  std::size_t ready_count() const override { return queue_.ready_count(); }

  const SchedulerQueue& queue() const { return queue_; }

 protected:
  SchedulerQueue queue_;
};

}  // namespace justitia
