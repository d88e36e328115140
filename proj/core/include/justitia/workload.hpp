#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "justitia/types.hpp"

namespace justitia {

// Skew-normal length distribution truncated to [lo, hi] by rejection.
struct LengthDistribution {
  std::int64_t lo = 1;
  std::int64_t hi = 1;
  double skew = 3.0;  // shape parameter alpha; > 0 skews right

  double mean() const;  // numerical mean of the truncated distribution
  std::int64_t sample(std::mt19937_64& rng) const;
};

struct ClassProfile {
  LengthDistribution prompt;
  LengthDistribution decode;
  int min_fan_out = 1;
  int max_fan_out = 1;
};

using LengthTable = std::map<AppClass, ClassProfile>;

// Shipped defaults: small classes p in [100,500], d in [20,200]; medium
// p in [300,1500], d in [100,800]; large p in [2000,8000], d in [500,3000].
const LengthTable& default_length_table();

// Multiplies every length bound by `factor` (bounds clamp at 1 token).
LengthTable scale_lengths(const LengthTable& table, double factor);

struct DagParams {
  int fan_out = 1;
};

// DAG shape of one application class with unit placeholder lengths.
//   MRS: k map nodes, then one reduce node depending on all of them.
//   DM: k merge nodes each followed by a score node, then one select node.
//   FV, KBQAV, EV, CC: one extraction node, then k parallel verify nodes.
//   SC, PE, ALFWI: k independent nodes, then one vote/aggregate node.
// Node ids start at 1.
std::vector<InferenceSpec> dag_template(AppClass cls, DagParams params);

struct TraceRecord {
  double offset = 0.0;  // seconds
  std::optional<AppClass> cls;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

class TraceError : public std::runtime_error {
 public:
  TraceError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Reads an arrival trace, one record per line. Accepted line forms:
//   "<offset-seconds> [CLASS]"
//   {"timestamp": <milliseconds>, ...}   (Mooncake-style JSON lines)
// Offsets are multiplied by `scale` and returned sorted ascending.
std::vector<TraceRecord> ingest_trace(const std::filesystem::path& path, double scale = 1.0);
std::vector<TraceRecord> parse_trace(std::istream& in, double scale = 1.0);

// Shifts the earliest offset to 0 and stretches the span to `window` seconds.
std::vector<TraceRecord> fit_to_window(std::vector<TraceRecord> records, double window);

struct WorkloadConfig {
  std::size_t app_count = 300;
  double submission_window = 360.0;  // seconds
  std::array<double, 3> size_mix{0.72, 0.26, 0.02};  // small, medium, large
  std::uint64_t rng_seed = 1;
  LengthTable lengths = default_length_table();
  // When set, arrivals (and classes, if the trace carries them) come from the
  // trace fitted to the submission window instead of uniform draws.
  std::optional<std::vector<TraceRecord>> trace;
};

void validate(const WorkloadConfig& cfg);

// Deterministic in cfg. Apps are numbered 0.. in arrival order.
std::vector<ApplicationJob> generate_workload(const WorkloadConfig& cfg);

// One application of `cls` with lengths drawn from `profile`; used by the
// generator and by scenario builders.
ApplicationJob generate_application(AppId id, AppClass cls, double arrival,
                                    const ClassProfile& profile, std::mt19937_64& rng);

// Synthesized prompt text whose keyword counts track the drawn lengths.
std::string synthesize_input_text(AppClass cls, const std::vector<InferenceSpec>& nodes,
                                  std::mt19937_64& rng);

// Workload JSONL: {app_id, class, arrival_time, nodes:[{id,p,d,deps}], input_text}.
void write_workload(std::ostream& out, const std::vector<ApplicationJob>& apps);
std::vector<ApplicationJob> read_workload(std::istream& in);
void save_workload(const std::filesystem::path& path, const std::vector<ApplicationJob>& apps);
std::vector<ApplicationJob> load_workload(const std::filesystem::path& path);

}  // namespace justitia
