#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace justitia {

using AppId = std::uint64_t;
using NodeId = std::uint32_t;

// Application classes of the mixed workload suite.
enum class AppClass { MRS, PE, CC, KBQAV, EV, FV, ALFWI, DM, SC };

enum class SizeClass { Small, Medium, Large };

inline constexpr AppClass kAllClasses[] = {
    AppClass::MRS, AppClass::PE,    AppClass::CC, AppClass::KBQAV, AppClass::EV,
    AppClass::FV,  AppClass::ALFWI, AppClass::DM, AppClass::SC};

std::string_view to_string(AppClass cls);
std::string_view to_string(SizeClass size);
std::optional<AppClass> parse_app_class(std::string_view name);
SizeClass size_class_of(AppClass cls);
std::vector<AppClass> classes_of_size(SizeClass size);

// One LLM inference inside an application DAG. decode_len is ground truth
// and must not be consulted by schedulers.
struct InferenceSpec {
  NodeId id = 0;
  std::int64_t prompt_len = 0;
  std::int64_t decode_len = 0;
  std::vector<NodeId> deps;

  friend bool operator==(const InferenceSpec&, const InferenceSpec&) = default;
};

struct ApplicationJob {
  AppId id = 0;
  AppClass cls = AppClass::SC;
  double arrival_time = 0.0;
  std::vector<InferenceSpec> nodes;
  std::string input_text;

  SizeClass size_class() const { return size_class_of(cls); }
  // Index into `nodes` for a node id; throws std::out_of_range.
  std::size_t index_of(NodeId node) const;

  friend bool operator==(const ApplicationJob&, const ApplicationJob&) = default;
};

// Node indices in topological order, ties broken by node id. Throws
// std::invalid_argument on cycles or dangling dependencies.
std::vector<std::size_t> topological_order(const ApplicationJob& app);

// Checks arrival >= 0, non-empty node list, unique ids, in-app deps, acyclicity.
void validate(const ApplicationJob& app);

}  // namespace justitia
