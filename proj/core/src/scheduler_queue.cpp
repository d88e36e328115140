#include <stdexcept>
#include <string>

#include "justitia/scheduler.hpp"

namespace justitia {

namespace {

std::string node_name(NodeRef node) {
  return "app " + std::to_string(node.app) + " node#" + std::to_string(node.index);
}

}  // namespace

SchedulerQueue::AppEntry& SchedulerQueue::entry(AppId app) {
  auto it = apps_.find(app);
  if (it == apps_.end()) throw std::out_of_range("unknown app " + std::to_string(app));
  return it->second;
}

const SchedulerQueue::AppEntry& SchedulerQueue::entry(AppId app) const {
  auto it = apps_.find(app);
  if (it == apps_.end()) throw std::out_of_range("unknown app " + std::to_string(app));
  return it->second;
}

const ApplicationJob& SchedulerQueue::app(AppId id) const { return *entry(id).job; }

void SchedulerQueue::add_app(const ApplicationJob& job, double now) {
  if (apps_.contains(job.id)) {
    throw std::invalid_argument("duplicate app id " + std::to_string(job.id));
  }
  const auto order = topological_order(job);
  const std::size_t n = job.nodes.size();
  AppEntry e;
  e.job = &job;
  e.rank.resize(n);
  for (std::size_t r = 0; r < order.size(); ++r) e.rank[order[r]] = static_cast<std::uint32_t>(r);
  e.pending.assign(n, 0);
  e.successors.resize(n);
  e.release.assign(n, 0.0);
  e.state.assign(n, NodeState::Blocked);
  e.key.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::set<NodeId> unique(job.nodes[i].deps.begin(), job.nodes[i].deps.end());
    for (NodeId dep : unique) {
      e.successors[job.index_of(dep)].push_back(static_cast<std::uint32_t>(i));
      ++e.pending[i];
    }
  }
  auto& stored = apps_.emplace(job.id, std::move(e)).first->second;
  for (std::uint32_t r = 0; r < order.size(); ++r) {
    const auto i = static_cast<std::uint32_t>(order[r]);
    if (stored.pending[i] == 0) release(stored, job.id, i, now);
  }
}

void SchedulerQueue::release(AppEntry& e, AppId app, std::uint32_t index, double now) {
  e.state[index] = NodeState::Ready;
  e.release[index] = now;
  const NodeRef ref{app, index};
  e.key[index] = key_(ref);
  ready_.emplace(e.key[index], ref);
}

std::optional<NodeRef> SchedulerQueue::front() const {
  if (ready_.empty()) return std::nullopt;
  return ready_.begin()->second;
}

void SchedulerQueue::take(NodeRef node) {
  AppEntry& e = entry(node.app);
  if (node.index >= e.state.size() || e.state[node.index] != NodeState::Ready) {
    throw std::logic_error(node_name(node) + " is not ready");
  }
  ready_.erase({e.key[node.index], node});
  e.state[node.index] = NodeState::Taken;
}

std::vector<NodeRef> SchedulerQueue::complete(NodeRef node, double now) {
  AppEntry& e = entry(node.app);
  if (node.index >= e.state.size() || e.state[node.index] != NodeState::Taken) {
    throw std::logic_error(node_name(node) + " was not running");
  }
  e.state[node.index] = NodeState::Done;
  ++e.done;
  std::vector<NodeRef> released;
  for (std::uint32_t s : e.successors[node.index]) {
    if (--e.pending[s] == 0) {
      release(e, node.app, s, now);
      released.push_back(NodeRef{node.app, s});
    }
  }
  return released;
}

void SchedulerQueue::rekey_app(AppId app) {
  AppEntry& e = entry(app);
  for (std::uint32_t i = 0; i < e.state.size(); ++i) {
    if (e.state[i] != NodeState::Ready) continue;
    const NodeRef ref{app, i};
    const PriorityKey fresh = key_(ref);
    if (fresh == e.key[i]) continue;
    ready_.erase({e.key[i], ref});
    e.key[i] = fresh;
    ready_.emplace(fresh, ref);
  }
}

bool SchedulerQueue::app_finished(AppId app) const {
  const AppEntry& e = entry(app);
  return e.done == e.state.size();
}

std::uint32_t SchedulerQueue::rank_of(NodeRef node) const {
  return entry(node.app).rank.at(node.index);
}

double SchedulerQueue::release_time(NodeRef node) const {
  return entry(node.app).release.at(node.index);
}

std::vector<NodeRef> SchedulerQueue::ready_nodes_of(AppId app) const {
  const AppEntry& e = entry(app);
  std::vector<NodeRef> out;
  for (std::uint32_t i = 0; i < e.state.size(); ++i) {
    if (e.state[i] == NodeState::Ready) out.push_back(NodeRef{app, i});
  }
  return out;
}

}  // namespace justitia
