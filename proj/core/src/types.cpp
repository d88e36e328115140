#include "justitia/types.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace justitia {

std::string_view to_string(AppClass cls) {
  switch (cls) {
    case AppClass::MRS: return "MRS";
    case AppClass::PE: return "PE";
    case AppClass::CC: return "CC";
    case AppClass::KBQAV: return "KBQAV";
    case AppClass::EV: return "EV";
    case AppClass::FV: return "FV";
    case AppClass::ALFWI: return "ALFWI";
    case AppClass::DM: return "DM";
    case AppClass::SC: return "SC";
  }
  return "?";
}

std::string_view to_string(SizeClass size) {
  switch (size) {
    case SizeClass::Small: return "small";
    case SizeClass::Medium: return "medium";
    case SizeClass::Large: return "large";
  }
  return "?";
}

std::optional<AppClass> parse_app_class(std::string_view name) {
  for (AppClass cls : kAllClasses) {
    if (to_string(cls) == name) return cls;
  }
  return std::nullopt;
}

SizeClass size_class_of(AppClass cls) {
  switch (cls) {
    case AppClass::EV:
    case AppClass::FV:
    case AppClass::CC:
    case AppClass::ALFWI:
    case AppClass::KBQAV:
      return SizeClass::Small;
    case AppClass::PE:
    case AppClass::SC:
      return SizeClass::Medium;
    case AppClass::DM:
    case AppClass::MRS:
      return SizeClass::Large;
  }
  return SizeClass::Small;
}

std::vector<AppClass> classes_of_size(SizeClass size) {
  std::vector<AppClass> out;
  for (AppClass cls : kAllClasses) {
    if (size_class_of(cls) == size) out.push_back(cls);
  }
  return out;
}

std::size_t ApplicationJob::index_of(NodeId node) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id == node) return i;
  }
  throw std::out_of_range("app " + std::to_string(id) + " has no node " +
                          std::to_string(node));
}

std::vector<std::size_t> topological_order(const ApplicationJob& app) {
  const std::size_t n = app.nodes.size();
  std::unordered_map<NodeId, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) {
    if (!index.emplace(app.nodes[i].id, i).second) {
      throw std::invalid_argument("app " + std::to_string(app.id) +
                                  ": duplicate node id " +
                                  std::to_string(app.nodes[i].id));
    }
  }
  std::vector<int> indegree(n, 0);
  std::vector<std::vector<std::size_t>> successors(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::unordered_set<NodeId> seen;
    for (NodeId dep : app.nodes[i].deps) {
      auto it = index.find(dep);
      if (it == index.end()) {
        throw std::invalid_argument("app " + std::to_string(app.id) + ": node " +
                                    std::to_string(app.nodes[i].id) +
                                    " depends on unknown node " + std::to_string(dep));
      }
      if (!seen.insert(dep).second) continue;
      ++indegree[i];
      successors[it->second].push_back(i);
    }
  }
  auto by_id = [&](std::size_t a, std::size_t b) {
    return app.nodes[a].id > app.nodes[b].id;
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(by_id)> ready(by_id);
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push(i);
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    std::size_t i = ready.top();
    ready.pop();
    order.push_back(i);
    for (std::size_t s : successors[i]) {
      if (--indegree[s] == 0) ready.push(s);
    }
  }
  if (order.size() != n) {
    throw std::invalid_argument("app " + std::to_string(app.id) + ": dependency cycle");
  }
  return order;
}

void validate(const ApplicationJob& app) {
  if (!(app.arrival_time >= 0.0)) {
    throw std::invalid_argument("app " + std::to_string(app.id) + ": negative arrival time");
  }
  if (app.nodes.empty()) {
    throw std::invalid_argument("app " + std::to_string(app.id) + ": no inference nodes");
  }
  for (const auto& node : app.nodes) {
    if (node.prompt_len < 0 || node.decode_len < 0) {
      throw std::invalid_argument("app " + std::to_string(app.id) + ": node " +
                                  std::to_string(node.id) + " has negative length");
    }
  }
  (void)topological_order(app);
}

}  // namespace justitia
