#include "justitia/engine.hpp"

#include <algorithm>
#include <chrono>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "justitia/gps_reference.hpp"

namespace justitia {

Engine::Engine(EngineConfig cfg, Scheduler& scheduler) : cfg_(cfg), scheduler_(scheduler) {
  if (cfg_.capacity <= 0) throw std::invalid_argument("capacity must be positive");
  if (!(cfg_.tau > 0.0)) throw std::invalid_argument("tau must be positive");
}

template <typename F>
auto Engine::timed(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  auto result = f();
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ++stats_.decisions;
  stats_.decision_seconds_total += elapsed;
  stats_.decision_seconds_max = std::max(stats_.decision_seconds_max, elapsed);
  return result;
}

void Engine::add_arrival(const ApplicationJob& app, KvCost predicted_cost) {
  validate(app);
  if (app.arrival_time < now_) {
    throw std::invalid_argument("app " + std::to_string(app.id) + " arrives in the past");
  }
  if (!arrivals_.empty() && app.arrival_time < arrivals_.back().app->arrival_time) {
    throw std::invalid_argument("arrivals must be added in time order");
  }
  if (apps_.contains(app.id)) {
    throw std::invalid_argument("duplicate app id " + std::to_string(app.id));
  }
  RunRecord rec;
  rec.app_id = app.id;
  rec.cls = app.cls;
  rec.arrival = app.arrival_time;
  rec.predicted_cost = predicted_cost.value;
  for (const auto& node : app.nodes) {
    if (node.prompt_len + node.decode_len > cfg_.capacity) {
      throw std::invalid_argument("app " + std::to_string(app.id) + " node " +
                                  std::to_string(node.id) + " needs " +
                                  std::to_string(node.prompt_len + node.decode_len) +
                                  " KV units, above capacity " + std::to_string(cfg_.capacity));
    }
    const double c = kv_token_time(node.prompt_len, node.decode_len).value;
    rec.true_cost += c;
    rec.max_inference_cost = std::max(rec.max_inference_cost, c);
    rec.nodes.push_back(NodeRecord{node.id, node.prompt_len, node.decode_len});
  }
  apps_.emplace(app.id, &app);
  progress_.emplace(app.id, AppProgress{std::move(rec), app.nodes.size()});
  arrivals_.push_back(Pending{&app, predicted_cost});
}

void Engine::deliver_arrivals() {
  while (!arrivals_.empty() && arrivals_.front().app->arrival_time <= now_) {
    const Pending p = arrivals_.front();
    arrivals_.pop_front();
    timed([&] {
      scheduler_.on_arrival(*p.app, p.predicted, p.app->arrival_time);
      return 0;
    });
  }
}

std::int64_t Engine::growing_count() const {
  return std::count_if(running_.begin(), running_.end(), [](const Slot& s) { return s.prefilled; });
}

void Engine::refill(StepEvents& events) {
  std::int64_t grow = growing_count();
  if (!swapped_.empty()) {
    std::stable_sort(swapped_.begin(), swapped_.end(), [&](const Slot& a, const Slot& b) {
      return scheduler_.priority_of(a.ref) < scheduler_.priority_of(b.ref);
    });
    std::size_t resumed = 0;
    for (; resumed < swapped_.size(); ++resumed) {
      const Slot& s = swapped_[resumed];
      const std::int64_t need = s.occupancy() + (s.prefilled ? 1 : 0);
      if (need > free() - grow) break;
      used_ += s.occupancy();
      if (s.prefilled) ++grow;
      running_.push_back(s);
      events.resumed.push_back(s.ref);
    }
    swapped_.erase(swapped_.begin(), swapped_.begin() + static_cast<std::ptrdiff_t>(resumed));
    if (!swapped_.empty()) {
      ++stats_.fragmentation_stalls;
      return;
    }
  }
  while (true) {
    const auto next = timed([&] { return scheduler_.pick_next(); });
    if (!next) break;
    const ApplicationJob& app = *apps_.at(next->app);
    const InferenceSpec& spec = app.nodes.at(next->index);
    if (spec.prompt_len > free() - grow) {
      ++stats_.fragmentation_stalls;
      break;
    }
    scheduler_.on_admitted(*next, now_);
    scheduler_.on_progress(*next, spec.prompt_len, 0);
    running_.push_back(Slot{*next, spec.prompt_len, spec.decode_len, 0, false});
    used_ += spec.prompt_len;
    NodeRecord& nr = progress_.at(next->app).record.nodes.at(next->index);
    if (nr.admitted < 0.0) nr.admitted = now_;
    events.admitted.push_back(*next);
  }
}

void Engine::relieve_overflow(StepEvents& events) {
  while (used_ + growing_count() > cfg_.capacity) {
    if (running_.empty()) throw EngineInvariantError("overflow with nothing running\n" + dump_state());
    auto victim = std::max_element(running_.begin(), running_.end(), [&](const Slot& a, const Slot& b) {
      return scheduler_.priority_of(a.ref) < scheduler_.priority_of(b.ref);
    });
    used_ -= victim->occupancy();
    ++progress_.at(victim->ref.app).record.nodes.at(victim->ref.index).swaps;
    ++stats_.swaps;
    events.swapped.push_back(victim->ref);
    swapped_.push_back(*victim);
    running_.erase(victim);
  }
}

void Engine::execute_iteration(StepEvents& events) {
  for (Slot& s : running_) {
    if (!s.prefilled) {
      s.prefilled = true;
      continue;
    }
    ++s.decoded;
    ++used_;
    progress_.at(s.ref.app).record.nodes.at(s.ref.index).occupancy_integral +=
        static_cast<double>(s.occupancy());
    scheduler_.on_progress(s.ref, 0, 1);
  }
  now_ += cfg_.tau;
  ++stats_.iterations;
  stats_.peak_used = std::max(stats_.peak_used, used_);
  if (used_ > cfg_.capacity) throw EngineInvariantError("KV pool overflow\n" + dump_state());

  std::vector<Slot> still_running;
  still_running.reserve(running_.size());
  for (const Slot& s : running_) {
    if (!(s.prefilled && s.decoded >= s.decode_len)) {
      still_running.push_back(s);
      continue;
    }
    used_ -= s.occupancy();
    AppProgress& prog = progress_.at(s.ref.app);
    prog.record.nodes.at(s.ref.index).finished = now_;
    scheduler_.on_node_completion(s.ref, now_);
    events.completed.push_back(s.ref);
    if (--prog.remaining == 0) {
      prog.record.completion = now_;
      events.finished_apps.push_back(s.ref.app);
      records_.emplace(s.ref.app, std::move(prog.record));
      progress_.erase(s.ref.app);
    }
  }
  running_ = std::move(still_running);
}

StepEvents Engine::step() {
  StepEvents events;
  deliver_arrivals();
  events.free_before_refill = free();
  refill(events);
  events.free_after_refill = free();
  if (running_.empty()) {
    if (!swapped_.empty() || scheduler_.ready_count() > 0) {
      throw EngineInvariantError("pending work cannot be admitted into an empty pool\n" +
                                 dump_state());
    }
    if (!arrivals_.empty()) {
      now_ = std::max(now_, arrivals_.front().app->arrival_time);
      events.idle_jump = true;
    }
    return events;
  }
  relieve_overflow(events);
  execute_iteration(events);
  check_invariants();
  return events;
}

bool Engine::done() const {
  return arrivals_.empty() && running_.empty() && swapped_.empty() &&
         scheduler_.ready_count() == 0;
}

void Engine::check_invariants() const {
  const std::int64_t total = std::accumulate(
      running_.begin(), running_.end(), std::int64_t{0},
      [](std::int64_t acc, const Slot& s) { return acc + s.occupancy(); });
  if (total != used_ || used_ < 0 || used_ > cfg_.capacity) {
    throw EngineInvariantError("KV accounting mismatch\n" + dump_state());
  }
}

std::string Engine::dump_state() const {
  std::ostringstream os;
  os << "t=" << now_ << " iter=" << stats_.iterations << " used=" << used_ << "/" << cfg_.capacity
     << " ready=" << scheduler_.ready_count() << " pending_arrivals=" << arrivals_.size() << '\n';
  auto dump = [&](const char* label, const std::vector<Slot>& slots) {
    os << label << ":";
    for (const Slot& s : slots) {
      os << " [app " << s.ref.app << " #" << s.ref.index << " p=" << s.prompt_len
         << " decoded=" << s.decoded << "/" << s.decode_len << (s.prefilled ? "" : " prefill")
         << "]";
    }
    os << '\n';
  };
  dump("running", running_);
  dump("swapped", swapped_);
  return os.str();
}

RunResult run(std::span<const ApplicationJob> workload, Scheduler& scheduler,
              const CostEstimator& estimate, const EngineConfig& cfg) {
  std::vector<const ApplicationJob*> order;
  order.reserve(workload.size());
  for (const auto& app : workload) order.push_back(&app);
  std::stable_sort(order.begin(), order.end(), [](const ApplicationJob* a, const ApplicationJob* b) {
    return a->arrival_time != b->arrival_time ? a->arrival_time < b->arrival_time : a->id < b->id;
  });

  Engine engine(cfg, scheduler);
  for (const ApplicationJob* app : order) engine.add_arrival(*app, estimate(*app));
  while (!engine.done()) {
    engine.step();
    if (engine.stats().iterations > cfg.max_iterations) {
      throw std::runtime_error("simulation exceeded " + std::to_string(cfg.max_iterations) +
                               " iterations\n" + engine.dump_state());
    }
  }

  RunResult result;
  result.stats = engine.stats();
  result.makespan = engine.now();
  std::vector<FluidApp> fluid;
  fluid.reserve(engine.records().size());
  for (const auto& [id, rec] : engine.records()) {
    fluid.push_back(FluidApp{id, rec.arrival, rec.true_cost});
    result.records.push_back(rec);
  }
  const GpsSchedule gps = gps_run(fluid, cfg.service_rate());
  for (auto& rec : result.records) rec.gps_completion = gps.finish.at(rec.app_id);
  return result;
}

void write_records(std::ostream& out, std::span<const RunRecord> records) {
  for (const auto& rec : records) {
    nlohmann::ordered_json j;
    j["app_id"] = rec.app_id;
    j["class"] = std::string(to_string(rec.cls));
    j["arrival"] = rec.arrival;
    j["completion"] = rec.completion;
    j["gps_completion"] = rec.gps_completion;
    j["jct"] = rec.jct();
    j["true_cost"] = rec.true_cost;
    j["predicted_cost"] = rec.predicted_cost;
    j["max_inference_cost"] = rec.max_inference_cost;
    auto nodes = nlohmann::ordered_json::array();
    for (const auto& n : rec.nodes) {
      nlohmann::ordered_json jn;
      jn["id"] = n.id;
      jn["p"] = n.prompt_len;
      jn["d"] = n.decode_len;
      jn["admitted"] = n.admitted;
      jn["finished"] = n.finished;
      jn["swaps"] = n.swaps;
      nodes.push_back(std::move(jn));
    }
    j["nodes"] = std::move(nodes);
    out << j.dump() << '\n';
  }
}

std::vector<RunRecord> read_records(std::istream& in) {
  std::vector<RunRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      RunRecord rec;
      rec.app_id = j.at("app_id").get<AppId>();
      const auto cls = parse_app_class(j.at("class").get<std::string>());
      if (!cls) throw std::invalid_argument("unknown class");
      rec.cls = *cls;
      rec.arrival = j.at("arrival").get<double>();
      rec.completion = j.at("completion").get<double>();
      rec.gps_completion = j.at("gps_completion").get<double>();
      rec.true_cost = j.at("true_cost").get<double>();
      rec.predicted_cost = j.at("predicted_cost").get<double>();
      rec.max_inference_cost = j.at("max_inference_cost").get<double>();
      for (const auto& jn : j.at("nodes")) {
        NodeRecord n;
        n.id = jn.at("id").get<NodeId>();
        n.prompt_len = jn.at("p").get<std::int64_t>();
        n.decode_len = jn.at("d").get<std::int64_t>();
        n.admitted = jn.at("admitted").get<double>();
        n.finished = jn.at("finished").get<double>();
        n.swaps = jn.at("swaps").get<std::uint32_t>();
        n.occupancy_integral = kv_token_time(n.prompt_len, n.decode_len).value;
        rec.nodes.push_back(n);
      }
      out.push_back(std::move(rec));
    } catch (const std::exception& e) {
      throw std::runtime_error("records line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace justitia
