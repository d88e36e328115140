#include "justitia/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace justitia {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

double skew_normal_pdf(double z, double alpha) {
  const double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
  const double cdf = 0.5 * std::erfc(-alpha * z / kSqrt2);
  return 2.0 * phi * cdf;
}

struct SkewParams {
  double location;
  double scale;
};

SkewParams skew_params(const LengthDistribution& dist) {
  const double span = static_cast<double>(dist.hi - dist.lo);
  // Mode sits near the low end for positive skew and near the high end for
  // negative skew.
  const double location = dist.skew >= 0.0 ? static_cast<double>(dist.lo) + 0.15 * span
                                           : static_cast<double>(dist.hi) - 0.15 * span;
  return {location, std::max(0.4 * span, 0.5)};
}

struct Vocabulary {
  std::vector<std::string> topic;
  std::vector<std::string> body;
  std::vector<std::string> reasoning;
};

const Vocabulary& vocabulary_of(AppClass cls) {
  static const std::map<AppClass, Vocabulary> table = {
      {AppClass::MRS,
       {{"summarize", "document", "report", "overview", "digest", "abstract", "outline", "brief"},
        {"chunk", "paragraph", "section"},
        {"summary", "condense", "highlight"}}},
      {AppClass::PE,
       {{"plan", "task", "goal", "tool", "execute", "schedule", "agent", "subtask"},
        {"instruction", "context", "requirement"},
        {"step", "action", "result"}}},
      {AppClass::CC,
       {{"code", "function", "compile", "bug", "test", "snippet", "review", "lint"},
        {"source", "line", "module"},
        {"check", "trace", "patch"}}},
      {AppClass::KBQAV,
       {{"question", "knowledge", "answer", "query", "fact", "entity", "base", "lookup"},
        {"passage", "record", "evidence"},
        {"verify", "cite", "confirm"}}},
      {AppClass::EV,
       {{"equation", "math", "solve", "variable", "formula", "algebra", "proof", "term"},
        {"expression", "symbol", "operand"},
        {"derive", "simplify", "evaluate"}}},
      {AppClass::FV,
       {{"claim", "fact", "statement", "source", "search", "truth", "wiki", "assert"},
        {"sentence", "excerpt", "quote"},
        {"query", "judge", "support"}}},
      {AppClass::ALFWI,
       {{"room", "object", "household", "navigate", "pick", "place", "drawer", "counter"},
        {"observation", "scene", "inventory"},
        {"move", "interact", "think"}}},
      {AppClass::DM,
       {{"merge", "documents", "combine", "redundancy", "score", "select", "draft", "unify"},
        {"doc", "page", "article"},
        {"rewrite", "rank", "revise"}}},
      {AppClass::SC,
       {{"problem", "reasoning", "vote", "majority", "path", "sample", "consistent", "puzzle"},
        {"premise", "given", "condition"},
        {"chain", "deduce", "conclude"}}},
  };
  return table.at(cls);
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::int64_t scaled_bound(std::int64_t v, double factor) {
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::llround(static_cast<double>(v) * factor)));
}

std::mt19937_64 app_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x5eedu};
  return std::mt19937_64(seq);
}

}  // namespace

double LengthDistribution::mean() const {
  if (hi <= lo) return static_cast<double>(lo);
  const auto [location, scale] = skew_params(*this);
  constexpr int kSteps = 2000;
  const double width = static_cast<double>(hi - lo) / kSteps;
  double mass = 0.0;
  double moment = 0.0;
  for (int i = 0; i < kSteps; ++i) {
    const double x = static_cast<double>(lo) + (i + 0.5) * width;
    const double w = skew_normal_pdf((x - location) / scale, skew);
    mass += w;
    moment += w * x;
  }
  return mass > 0.0 ? moment / mass : 0.5 * static_cast<double>(lo + hi);
}

std::int64_t LengthDistribution::sample(std::mt19937_64& rng) const {
  if (hi <= lo) return lo;
  const auto [location, scale] = skew_params(*this);
  const double delta = skew / std::sqrt(1.0 + skew * skew);
  std::normal_distribution<double> normal(0.0, 1.0);
  double x = location;
  for (int attempt = 0; attempt < 64; ++attempt) {
    const double u0 = normal(rng);
    const double u1 = normal(rng);
    const double z = delta * std::abs(u0) + std::sqrt(1.0 - delta * delta) * u1;
    x = location + scale * z;
    if (x >= static_cast<double>(lo) && x <= static_cast<double>(hi)) break;
  }
  const auto v = static_cast<std::int64_t>(std::llround(x));
  return std::clamp(v, lo, hi);
}

const LengthTable& default_length_table() {
  static const LengthTable table = [] {
    LengthTable t;
    // small
    t[AppClass::EV] = {{100, 300, 3.0}, {40, 160, 2.0}, 3, 5};
    t[AppClass::FV] = {{300, 500, 2.0}, {60, 200, 2.0}, 3, 5};
    t[AppClass::CC] = {{200, 450, 3.0}, {100, 200, 2.0}, 3, 5};
    t[AppClass::ALFWI] = {{100, 400, 3.0}, {40, 160, 2.0}, 4, 6};
    t[AppClass::KBQAV] = {{150, 350, 3.0}, {80, 200, 2.0}, 3, 5};
    // medium: long decodes, wide fan-out
    t[AppClass::PE] = {{300, 1000, -2.0}, {200, 800, -2.0}, 8, 14};
    t[AppClass::SC] = {{500, 1500, -2.0}, {100, 800, -2.0}, 10, 16};
    // large: prompts capped at 10% of the default pool
    t[AppClass::MRS] = {{2000, 4000, 2.0}, {500, 1500, 3.0}, 6, 12};
    t[AppClass::DM] = {{2000, 4000, 2.0}, {1000, 3000, 3.0}, 3, 5};
    return t;
  }();
  return table;
}

LengthTable scale_lengths(const LengthTable& table, double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("length scale must be positive");
  LengthTable out = table;
  for (auto& [cls, profile] : out) {
    for (LengthDistribution* dist : {&profile.prompt, &profile.decode}) {
      dist->lo = scaled_bound(dist->lo, factor);
      dist->hi = std::max(dist->lo, scaled_bound(dist->hi, factor));
    }
  }
  return out;
}

std::vector<InferenceSpec> dag_template(AppClass cls, DagParams params) {
  if (params.fan_out < 1) throw std::invalid_argument("fan_out must be >= 1");
  const auto k = static_cast<NodeId>(params.fan_out);
  std::vector<InferenceSpec> nodes;
  auto add = [&](std::vector<NodeId> deps) {
    const auto id = static_cast<NodeId>(nodes.size() + 1);
    nodes.push_back(InferenceSpec{id, 1, 1, std::move(deps)});
    return id;
  };
  switch (cls) {
    case AppClass::MRS: {
      std::vector<NodeId> maps;
      for (NodeId i = 0; i < k; ++i) maps.push_back(add({}));
      add(maps);
      break;
    }
    case AppClass::DM: {
      std::vector<NodeId> scores;
      for (NodeId i = 0; i < k; ++i) {
        const NodeId merge = add({});
        scores.push_back(add({merge}));
      }
      add(scores);
      break;
    }
    case AppClass::FV:
    case AppClass::KBQAV:
    case AppClass::EV:
    case AppClass::CC: {
      const NodeId extract = add({});
      for (NodeId i = 0; i < k; ++i) add({extract});
      break;
    }
    case AppClass::SC:
    case AppClass::PE:
    case AppClass::ALFWI: {
      std::vector<NodeId> branches;
      for (NodeId i = 0; i < k; ++i) branches.push_back(add({}));
      add(branches);
      break;
    }
  }
  return nodes;
}

std::string synthesize_input_text(AppClass cls, const std::vector<InferenceSpec>& nodes,
                                  std::mt19937_64& rng) {
  const Vocabulary& vocab = vocabulary_of(cls);
  std::vector<std::string> words;
  words.push_back(lowercase(to_string(cls)));
  std::uniform_int_distribution<std::size_t> topic_pick(0, vocab.topic.size() - 1);
  std::uniform_int_distribution<int> header_len(6, 10);
  const int header = header_len(rng);
  for (int i = 0; i < header; ++i) words.push_back(vocab.topic[topic_pick(rng)]);

  std::uniform_real_distribution<double> jitter(0.8, 1.2);
  std::uniform_int_distribution<std::size_t> body_pick(0, vocab.body.size() - 1);
  std::uniform_int_distribution<std::size_t> reason_pick(0, vocab.reasoning.size() - 1);
  for (const auto& node : nodes) {
    words.emplace_back("item");
    const auto body = std::max<long>(1, std::lround(static_cast<double>(node.prompt_len) / 40.0 * jitter(rng)));
    const auto reason = std::max<long>(1, std::lround(static_cast<double>(node.decode_len) / 20.0 * jitter(rng)));
    for (long i = 0; i < body; ++i) words.push_back(vocab.body[body_pick(rng)]);
    for (long i = 0; i < reason; ++i) words.push_back(vocab.reasoning[reason_pick(rng)]);
  }
  std::string text;
  for (const auto& w : words) {
    if (!text.empty()) text.push_back(' ');
    text += w;
  }
  return text;
}

ApplicationJob generate_application(AppId id, AppClass cls, double arrival,
                                    const ClassProfile& profile, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> fan(profile.min_fan_out,
                                         std::max(profile.min_fan_out, profile.max_fan_out));
  ApplicationJob app;
  app.id = id;
  app.cls = cls;
  app.arrival_time = arrival;
  app.nodes = dag_template(cls, DagParams{fan(rng)});
  for (auto& node : app.nodes) {
    node.prompt_len = profile.prompt.sample(rng);
    node.decode_len = profile.decode.sample(rng);
  }
  app.input_text = synthesize_input_text(cls, app.nodes, rng);
  return app;
}

void validate(const WorkloadConfig& cfg) {
  if (cfg.app_count == 0) throw std::invalid_argument("app_count must be positive");
  if (!(cfg.submission_window >= 0.0)) {
    throw std::invalid_argument("submission_window must be non-negative");
  }
  double sum = 0.0;
  for (double p : cfg.size_mix) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("size_mix probabilities must be finite and non-negative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("size_mix must sum to 1 (got " + std::to_string(sum) + ")");
  }
  for (std::size_t s = 0; s < 3; ++s) {
    if (cfg.size_mix[s] == 0.0) continue;
    for (AppClass cls : classes_of_size(static_cast<SizeClass>(s))) {
      if (!cfg.lengths.contains(cls)) {
        throw std::invalid_argument("length table lacks class " + std::string(to_string(cls)));
      }
    }
  }
  if (cfg.trace && cfg.trace->size() < cfg.app_count) {
    throw std::invalid_argument("trace has " + std::to_string(cfg.trace->size()) +
                                " records, fewer than app_count");
  }
}

std::vector<ApplicationJob> generate_workload(const WorkloadConfig& cfg) {
  validate(cfg);
  std::mt19937_64 master(cfg.rng_seed);

  std::vector<double> arrivals(cfg.app_count);
  std::vector<std::optional<AppClass>> traced(cfg.app_count);
  if (cfg.trace) {
    auto fitted = fit_to_window(
        std::vector<TraceRecord>(cfg.trace->begin(), cfg.trace->begin() + static_cast<std::ptrdiff_t>(cfg.app_count)),
        cfg.submission_window);
    for (std::size_t i = 0; i < cfg.app_count; ++i) {
      arrivals[i] = fitted[i].offset;
      traced[i] = fitted[i].cls;
    }
  } else {
    std::uniform_real_distribution<double> uniform(0.0, cfg.submission_window);
    for (auto& a : arrivals) a = uniform(master);
    std::sort(arrivals.begin(), arrivals.end());
  }

  std::discrete_distribution<int> size_pick(cfg.size_mix.begin(), cfg.size_mix.end());
  std::vector<ApplicationJob> apps;
  apps.reserve(cfg.app_count);
  for (std::size_t i = 0; i < cfg.app_count; ++i) {
    AppClass cls;
    if (traced[i]) {
      cls = *traced[i];
    } else {
      const auto bucket = classes_of_size(static_cast<SizeClass>(size_pick(master)));
      std::uniform_int_distribution<std::size_t> pick(0, bucket.size() - 1);
      cls = bucket[pick(master)];
    }
    auto it = cfg.lengths.find(cls);
    if (it == cfg.lengths.end()) {
      throw std::invalid_argument("length table lacks class " + std::string(to_string(cls)));
    }
    auto rng = app_stream(cfg.rng_seed, i);
    apps.push_back(generate_application(static_cast<AppId>(i), cls, arrivals[i], it->second, rng));
  }
  return apps;
}

std::vector<TraceRecord> parse_trace(std::istream& in, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("trace scale must be positive");
  std::vector<TraceRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    TraceRecord rec;
    if (line[first] == '{') {
      try {
        auto j = nlohmann::json::parse(line);
        rec.offset = j.at("timestamp").get<double>() / 1000.0;
        if (j.contains("class")) {
          rec.cls = parse_app_class(j["class"].get<std::string>());
          if (!rec.cls) throw std::invalid_argument("unknown class");
        }
      } catch (const std::exception& e) {
        throw TraceError("trace line " + std::to_string(line_no) + ": " + e.what(), line_no);
      }
    } else {
      std::istringstream fields(line);
      std::string offset_field;
      std::string class_field;
      std::string extra;
      fields >> offset_field >> class_field >> extra;
      std::size_t used = 0;
      try {
        rec.offset = std::stod(offset_field, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != offset_field.size() || !extra.empty()) {
        throw TraceError("trace line " + std::to_string(line_no) + ": malformed record '" + line + "'",
                         line_no);
      }
      if (!class_field.empty()) {
        rec.cls = parse_app_class(class_field);
        if (!rec.cls) {
          throw TraceError("trace line " + std::to_string(line_no) + ": unknown class '" +
                               class_field + "'",
                           line_no);
        }
      }
    }
    if (!std::isfinite(rec.offset) || rec.offset < 0.0) {
      throw TraceError("trace line " + std::to_string(line_no) + ": offset must be finite and >= 0",
                       line_no);
    }
    rec.offset *= scale;
    out.push_back(rec);
  }
  if (out.empty()) throw TraceError("trace contains no records", 0);
  std::stable_sort(out.begin(), out.end(),
                   [](const TraceRecord& a, const TraceRecord& b) { return a.offset < b.offset; });
  return out;
}

std::vector<TraceRecord> ingest_trace(const std::filesystem::path& path, double scale) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file " + path.string());
  return parse_trace(in, scale);
}

std::vector<TraceRecord> fit_to_window(std::vector<TraceRecord> records, double window) {
  if (records.empty()) return records;
  std::stable_sort(records.begin(), records.end(),
                   [](const TraceRecord& a, const TraceRecord& b) { return a.offset < b.offset; });
  const double base = records.front().offset;
  const double span = records.back().offset - base;
  for (auto& r : records) {
    r.offset = span > 0.0 ? (r.offset - base) * window / span : 0.0;
  }
  return records;
}

void write_workload(std::ostream& out, const std::vector<ApplicationJob>& apps) {
  for (const auto& app : apps) {
    nlohmann::ordered_json j;
    j["app_id"] = app.id;
    j["class"] = std::string(to_string(app.cls));
    j["arrival_time"] = app.arrival_time;
    auto nodes = nlohmann::ordered_json::array();
    for (const auto& node : app.nodes) {
      nlohmann::ordered_json n;
      n["id"] = node.id;
      n["p"] = node.prompt_len;
      n["d"] = node.decode_len;
      n["deps"] = node.deps;
      nodes.push_back(std::move(n));
    }
    j["nodes"] = std::move(nodes);
    j["input_text"] = app.input_text;
    out << j.dump() << '\n';
  }
}

std::vector<ApplicationJob> read_workload(std::istream& in) {
  std::vector<ApplicationJob> apps;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      ApplicationJob app;
      app.id = j.at("app_id").get<AppId>();
      const auto cls_name = j.at("class").get<std::string>();
      auto cls = parse_app_class(cls_name);
      if (!cls) throw std::invalid_argument("unknown class " + cls_name);
      app.cls = *cls;
      app.arrival_time = j.at("arrival_time").get<double>();
      for (const auto& n : j.at("nodes")) {
        InferenceSpec spec;
        spec.id = n.at("id").get<NodeId>();
        spec.prompt_len = n.at("p").get<std::int64_t>();
        spec.decode_len = n.at("d").get<std::int64_t>();
        spec.deps = n.at("deps").get<std::vector<NodeId>>();
        app.nodes.push_back(std::move(spec));
      }
      app.input_text = j.value("input_text", std::string{});
      validate(app);
      apps.push_back(std::move(app));
    } catch (const std::exception& e) {
      throw std::runtime_error("workload line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return apps;
}

void save_workload(const std::filesystem::path& path, const std::vector<ApplicationJob>& apps) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write workload file " + path.string());
  write_workload(out, apps);
}

std::vector<ApplicationJob> load_workload(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open workload file " + path.string());
  return read_workload(in);
}

}  // namespace justitia
