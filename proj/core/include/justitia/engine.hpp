#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "justitia/cost_model.hpp"
#include "justitia/scheduler.hpp"
#include "justitia/types.hpp"

namespace justitia {

struct EngineConfig {
  std::int64_t capacity = 40000;  // KV token units (M)
  double tau = 0.05;              // seconds per batched iteration
  std::uint64_t max_iterations = 50'000'000;

  double service_rate() const { return static_cast<double>(capacity) / tau; }
};

struct NodeRecord {
  NodeId id = 0;
  std::int64_t prompt_len = 0;
  std::int64_t decode_len = 0;
  double admitted = -1.0;  // first admission
  double finished = -1.0;
  std::uint32_t swaps = 0;
  double occupancy_integral = 0.0;  // sum of occupancy over decode iterations

  friend bool operator==(const NodeRecord&, const NodeRecord&) = default;
};

struct RunRecord {
  AppId app_id = 0;
  AppClass cls = AppClass::SC;
  double arrival = 0.0;
  double completion = 0.0;
  double gps_completion = 0.0;
  double true_cost = 0.0;  // memory-centric KV token-time
  double predicted_cost = 0.0;
  double max_inference_cost = 0.0;
  std::vector<NodeRecord> nodes;

  double jct() const { return completion - arrival; }
  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

struct EngineStats {
  std::uint64_t iterations = 0;
  std::uint64_t swaps = 0;
  std::uint64_t fragmentation_stalls = 0;  // refills where the head did not fit
  std::uint64_t decisions = 0;
  double decision_seconds_total = 0.0;
  double decision_seconds_max = 0.0;
  std::int64_t peak_used = 0;
};

struct StepEvents {
  std::vector<NodeRef> resumed;
  std::vector<NodeRef> admitted;
  std::vector<NodeRef> swapped;
  std::vector<NodeRef> completed;
  std::vector<AppId> finished_apps;
  bool idle_jump = false;  // no work ran; the clock jumped to the next arrival
  std::int64_t free_before_refill = 0;
  std::int64_t free_after_refill = 0;
};

// Thrown when an engine invariant would be violated; carries a state dump.
class EngineInvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Iteration-level simulation of one server with a KV pool of `capacity`
// token units. Each iteration every decoding node emits one token (+1
// occupancy). Admitted nodes hold p units and spend one prefill iteration
// before decoding. When growth would overflow the pool, the running node
// with the largest scheduler key is swapped out, keeping its progress.
// Refill serves the swapped queue strictly before the waiting queue and
// never skips the head of either; a candidate fits only if it leaves room
// for the next iteration's growth of all decoding nodes.
class Engine {
 public:
  Engine(EngineConfig cfg, Scheduler& scheduler);

  // Queues an arrival. Arrivals must be added in non-decreasing time order
  // and not before the current clock. Throws if a node can never fit
  // (p + d > capacity).
  void add_arrival(const ApplicationJob& app, KvCost predicted_cost);

  StepEvents step();
  bool done() const;

  double now() const { return now_; }
  std::int64_t capacity() const { return cfg_.capacity; }
  std::int64_t used() const { return used_; }
  std::int64_t free() const { return cfg_.capacity - used_; }
  std::size_t running_count() const { return running_.size(); }
  std::size_t swapped_count() const { return swapped_.size(); }
  const EngineStats& stats() const { return stats_; }

  // Records of finished apps, keyed by app id.
  const std::map<AppId, RunRecord>& records() const { return records_; }
  std::string dump_state() const;

 private:
  struct Slot {
    NodeRef ref;
    std::int64_t prompt_len = 0;
    std::int64_t decode_len = 0;
    std::int64_t decoded = 0;
    bool prefilled = false;
    std::int64_t occupancy() const { return prompt_len + decoded; }
  };
  struct Pending {
    const ApplicationJob* app;
    KvCost predicted;
  };
  struct AppProgress {
    RunRecord record;
    std::size_t remaining = 0;
  };

  void deliver_arrivals();
  void refill(StepEvents& events);
  void relieve_overflow(StepEvents& events);
  void execute_iteration(StepEvents& events);
  std::int64_t growing_count() const;
  void check_invariants() const;
  template <typename F>
  auto timed(F&& f);

  EngineConfig cfg_;
  Scheduler& scheduler_;
  double now_ = 0.0;
  std::int64_t used_ = 0;
  std::vector<Slot> running_;
  std::vector<Slot> swapped_;
  std::deque<Pending> arrivals_;
  std::map<AppId, const ApplicationJob*> apps_;
  std::map<AppId, AppProgress> progress_;
  std::map<AppId, RunRecord> records_;
  EngineStats stats_;
};

using CostEstimator = std::function<KvCost(const ApplicationJob&)>;

struct RunResult {
  std::vector<RunRecord> records;  // ascending app id
  EngineStats stats;
  double makespan = 0.0;
};

// Simulates until every app completes. Predictions are requested at each
// arrival; gps_completion comes from a fluid GPS run over true costs at
// rate capacity / tau. Throws std::runtime_error past max_iterations.
RunResult run(std::span<const ApplicationJob> workload, Scheduler& scheduler,
              const CostEstimator& estimate, const EngineConfig& cfg);

// Run output: one JSON object per record.
void write_records(std::ostream& out, std::span<const RunRecord> records);
std::vector<RunRecord> read_records(std::istream& in);

}  // namespace justitia
