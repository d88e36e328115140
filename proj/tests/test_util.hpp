#pragma once

#include <initializer_list>
#include <utility>
#include <vector>

#include "justitia/types.hpp"

namespace justitia::testing {

struct NodeSpec {
  std::int64_t p = 0;
  std::int64_t d = 0;
  std::vector<NodeId> deps{};
};

// Node ids are 1.. in list order.
inline ApplicationJob make_app(AppId id, double arrival, std::vector<NodeSpec> nodes,
                               AppClass cls = AppClass::SC) {
  ApplicationJob app;
  app.id = id;
  app.cls = cls;
  app.arrival_time = arrival;
  NodeId next = 1;
  for (auto& n : nodes) app.nodes.push_back(InferenceSpec{next++, n.p, n.d, std::move(n.deps)});
  return app;
}

}  // namespace justitia::testing
