#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "justitia/gps_reference.hpp"

namespace justitia::cli {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

template <typename T>
T number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T v{};
  if (!(in >> v) || !(in >> std::ws).eof()) {
    throw std::invalid_argument("bad value for '" + key + "': " + value);
  }
  return v;
}

void apply_setting(WorkloadConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "app_count") {
    cfg.app_count = number<std::size_t>(key, value);
  } else if (key == "submission_window") {
    cfg.submission_window = number<double>(key, value);
  } else if (key == "density") {
    cfg.submission_window = kBaseSubmissionWindow / number<double>(key, value);
  } else if (key == "seed" || key == "rng_seed") {
    cfg.rng_seed = number<std::uint64_t>(key, value);
  } else if (key == "size_mix") {
    const auto parts = split(value, ',');
    if (parts.size() != 3) throw std::invalid_argument("size_mix needs three weights");
    for (std::size_t i = 0; i < 3; ++i) cfg.size_mix[i] = number<double>(key, parts[i]);
  } else if (key == "trace") {
    cfg.trace = ingest_trace(value);
  } else if (key == "trace_scale") {
    if (!cfg.trace) throw std::invalid_argument("trace_scale needs a trace");
    const double scale = number<double>(key, value);
    for (auto& r : *cfg.trace) r.offset *= scale;
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

std::string json_scalar(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string joined;
    for (const auto& x : v) joined += (joined.empty() ? "" : ",") + x.dump();
    return joined;
  }
  return v.dump();
}

SchedulerKind scheduler_from(const std::string& name) {
  if (auto k = parse_scheduler_kind(name)) return *k;
  throw std::invalid_argument("unknown scheduler '" + name + "'");
}

PredictorKind predictor_from(const std::string& name) {
  if (auto k = parse_predictor_kind(name)) return *k;
  throw std::invalid_argument("unknown predictor '" + name + "'");
}

CostModel cost_model_from(const std::string& name) {
  if (name == "memory") return CostModel::memory_centric();
  if (name == "compute") return CostModel::compute_centric();
  throw std::invalid_argument("unknown cost model '" + name + "'");
}

// Writes to `path`, or to `fallback` when the path is empty or "-".
template <typename F>
void emit(const std::string& path, std::ostream& fallback, F&& write) {
  if (path.empty() || path == "-") {
    write(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
  write(file);
  if (!file) throw std::runtime_error("write to '" + path + "' failed");
}

std::vector<ApplicationJob> load_input(const std::string& path) {
  if (path == "-") return read_workload(std::cin);
  return load_workload(path);
}

std::vector<RunRecord> load_records(const std::string& path) {
  if (path == "-") return read_records(std::cin);
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_records(in);
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

// Flags shared by the subcommands that simulate a run.
struct RunFlags {
  std::string scheduler = "justitia";
  std::string predictor = "oracle";
  std::string cost_model = "memory";
  std::int64_t capacity = EngineConfig{}.capacity;
  double tau = EngineConfig{}.tau;
  std::uint64_t seed = 1;
  std::string model_dir;

  void add_engine(CLI::App* cmd) {
    cmd->add_option("--capacity", capacity, "KV pool size M in token units")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--tau", tau, "seconds per batched iteration")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  }

  void add_all(CLI::App* cmd, bool with_scheduler) {
    static const std::vector<std::string> kSchedulers = {"justitia", "inf-fcfs", "inf-sjf",
                                                         "app-fcfs", "vtc",      "srjf"};
    if (with_scheduler) {
      cmd->add_option("--scheduler", scheduler)->capture_default_str()->check(CLI::IsMember(kSchedulers));
    }
    cmd->add_option("--predictor", predictor)
        ->capture_default_str()
        ->check(CLI::IsMember({"oracle", "mlp", "global-mlp"}));
    cmd->add_option("--cost-model", cost_model, "memory (KV token-time) or compute (p + 2d)")
        ->capture_default_str()
        ->check(CLI::IsMember({"memory", "compute"}));
    add_engine(cmd);
    cmd->add_option("--seed", seed, "predictor training seed")->capture_default_str();
    cmd->add_option("--model-dir", model_dir, "load trained models saved by `train`")
        ->check(CLI::ExistingDirectory);
  }

  RunSpec spec() const {
    RunSpec s;
    s.scheduler = scheduler_from(scheduler);
    s.predictor = predictor_from(predictor);
    s.cost_model = cost_model_from(cost_model);
    s.engine.capacity = capacity;
    s.engine.tau = tau;
    s.seed = seed;
    s.model_dir = model_dir;
    return s;
  }
};

SimulationOptions options_for(const RunSpec& spec, SchedulerKind scheduler) {
  SimulationOptions opts;
  opts.scheduler = scheduler;
  opts.cost_model = spec.cost_model;
  opts.engine = spec.engine;
  return opts;
}

struct CompareFlags {
  std::string workload;
  std::vector<std::string> schedulers{"justitia", "inf-fcfs", "inf-sjf", "app-fcfs", "vtc", "srjf"};
  std::string reference = "vtc";
  std::string out;
  std::string cdf;
  std::string cdf_scheduler = "justitia";
  double density = 3.0;
  unsigned jobs = 1;
};

int cmd_compare(const RunFlags& rf, const CompareFlags& cf, std::ostream& out, std::ostream& err) {
  const RunSpec spec = rf.spec();
  const auto workload = cf.workload.empty()
                            ? generate_workload(mixed_workload_config(spec.seed, cf.density))
                            : load_input(cf.workload);
  std::vector<SchedulerKind> kinds;
  for (const auto& name : cf.schedulers) kinds.push_back(scheduler_from(name));
  const SchedulerKind reference = scheduler_from(cf.reference);
  std::vector<SchedulerKind> to_run = kinds;
  if (std::find(to_run.begin(), to_run.end(), reference) == to_run.end()) to_run.push_back(reference);

  const auto base = build_predictor(spec);
  struct Outcome {
    RunResult result;
    double predict_ms = 0.0;
  };
  auto simulate_one = [&](SchedulerKind kind, std::unique_ptr<Predictor> predictor) {
    Outcome o;
    o.result = simulate(workload, *predictor, options_for(spec, kind));
    o.predict_ms = predictor->stats().mean_ms();
    return o;
  };
  std::map<SchedulerKind, Outcome> outcomes;
  const unsigned jobs = std::max(1u, cf.jobs);
  for (std::size_t i = 0; i < to_run.size(); i += jobs) {
    std::vector<std::pair<SchedulerKind, std::future<Outcome>>> batch;
    for (std::size_t k = i; k < std::min(to_run.size(), i + jobs); ++k) {
      batch.emplace_back(to_run[k],
                         std::async(jobs > 1 ? std::launch::async : std::launch::deferred,
                                    simulate_one, to_run[k], base->clone()));
    }
    for (auto& [kind, fut] : batch) outcomes.emplace(kind, fut.get());
  }

  const auto& ref_records = outcomes.at(reference).result.records;
  std::vector<RunReport> reports;
  for (SchedulerKind kind : kinds) {
    const Outcome& o = outcomes.at(kind);
    RunReport r = compute_metrics(o.result.records, ref_records, spec.engine.capacity, spec.engine.tau);
    r.scheduler = std::string(to_string(kind));
    attach_overhead(r, o.result.stats);
    reports.push_back(std::move(r));
  }
  emit(cf.out, out, [&](std::ostream& s) { write_report_csv(s, reports); });
  if (!cf.cdf.empty()) {
    const SchedulerKind target = scheduler_from(cf.cdf_scheduler);
    const auto it = std::find(kinds.begin(), kinds.end(), target);
    if (it == kinds.end()) {
      err << "error: --cdf-scheduler " << cf.cdf_scheduler << " is not among --schedulers\n";
      return kExitError;
    }
    emit(cf.cdf, out, [&](std::ostream& s) {
      write_cdf_csv(s, reports[static_cast<std::size_t>(it - kinds.begin())].fair_ratios);
    });
  }
  return kExitOk;
}

struct GenerateFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> apps;
  std::optional<double> density;
  std::optional<double> window;
  std::string trace;
  double trace_scale = 1.0;
  std::string out;
};

int cmd_generate(const GenerateFlags& gf, std::ostream& out) {
  WorkloadConfig cfg = mixed_workload_config(1);
  if (!gf.config.empty()) {
    std::ifstream in(gf.config);
    if (!in) throw std::runtime_error("cannot open '" + gf.config + "'");
    cfg = read_workload_config(in, cfg);
  }
  if (gf.seed) cfg.rng_seed = *gf.seed;
  if (gf.apps) cfg.app_count = *gf.apps;
  if (gf.density) cfg.submission_window = kBaseSubmissionWindow / *gf.density;
  if (gf.window) cfg.submission_window = *gf.window;
  if (!gf.trace.empty()) cfg.trace = ingest_trace(gf.trace, gf.trace_scale);
  const auto apps = generate_workload(cfg);
  emit(gf.out, out, [&](std::ostream& s) { write_workload(s, apps); });
  return kExitOk;
}

int cmd_run(const RunFlags& rf, const std::string& workload_path, const std::string& out_path,
            std::ostream& out) {
  const RunSpec spec = rf.spec();
  const auto workload = load_input(workload_path);
  const auto predictor = build_predictor(spec);
  const RunResult result = simulate(workload, *predictor, options_for(spec, spec.scheduler));
  emit(out_path, out, [&](std::ostream& s) { write_records(s, result.records); });
  return kExitOk;
}

int cmd_check_bound(const RunFlags& rf, const std::string& records_path,
                    const std::string& workload_path, std::ostream& out, std::ostream& err) {
  std::vector<RunRecord> records;
  if (!records_path.empty()) {
    records = load_records(records_path);
  } else if (!workload_path.empty()) {
    RunSpec spec = rf.spec();
    const auto workload = load_input(workload_path);
    const auto predictor = build_predictor(spec);
    records = simulate(workload, *predictor, options_for(spec, spec.scheduler)).records;
  } else {
    err << "error: check-bound needs --records or --workload\n";
    return kExitError;
  }
  const BoundCheck check = check_delay_bound(records, rf.capacity, rf.tau);
  out << "apps=" << records.size() << " max_delay=" << fmt(check.max_delay)
      << " bound=" << fmt(check.bound) << " violations=" << check.violations;
  if (check.worst_app) out << " worst_app=" << *check.worst_app;
  out << (check.pass ? " PASS\n" : " FAIL\n");
  return check.pass ? kExitOk : kExitBoundViolation;
}

struct StarvationFlags {
  std::vector<std::size_t> mice{0, 30, 60, 120};
  std::vector<std::string> schedulers{"srjf", "justitia"};
  int fan_out = kStarvationElephantFanOut;
  std::string out;
};

int cmd_starvation(RunFlags rf, const StarvationFlags& sf, std::ostream& out) {
  const RunSpec spec = rf.spec();
  const auto base = build_predictor(spec);
  emit(sf.out, out, [&](std::ostream& s) {
    s << "scheduler,n_mice,elephant_jct,elephant_delay,bound,within_bound\n";
    for (const auto& name : sf.schedulers) {
      const SchedulerKind kind = scheduler_from(name);
      for (std::size_t n : sf.mice) {
        const auto workload = scenario_starvation(n, spec.seed, default_length_table(), sf.fan_out);
        const auto predictor = base->clone();
        const RunResult result = simulate(workload, *predictor, options_for(spec, kind));
        const RunRecord& elephant = result.records.front();
        const BoundCheck check = check_delay_bound(result.records, spec.engine.capacity, spec.engine.tau);
        const double delay = elephant.completion - elephant.gps_completion;
        s << name << ',' << n << ',' << fmt(elephant.jct()) << ',' << fmt(delay) << ','
          << fmt(check.bound) << ',' << (delay <= check.bound ? "true" : "false") << '\n';
      }
    }
  });
  return kExitOk;
}

struct OverheadFlags {
  std::vector<double> rates{15, 30, 60, 100};  // apps per minute
  double minutes = 3.0;
  std::vector<std::size_t> queue_sizes;
  std::size_t samples = 2000;
  std::string out;
  std::string queue_out;
};

int cmd_overhead(const RunFlags& rf, const OverheadFlags& of, std::ostream& out) {
  RunSpec spec = rf.spec();
  spec.scheduler = SchedulerKind::Justitia;
  const auto base = build_predictor(spec);
  emit(of.out, out, [&](std::ostream& s) {
    s << "arrival_rate,apps,decisions,mean_decision_ms,max_decision_ms,mean_predict_ms\n";
    for (double rate : of.rates) {
      WorkloadConfig cfg = mixed_workload_config(spec.seed);
      cfg.app_count = std::max<std::size_t>(1, static_cast<std::size_t>(rate * of.minutes + 0.5));
      cfg.submission_window = 60.0 * of.minutes;
      const auto workload = generate_workload(cfg);
      const auto predictor = base->clone();
      const RunResult result = simulate(workload, *predictor, options_for(spec, spec.scheduler));
      RunReport r;
      attach_overhead(r, result.stats);
      s << fmt(rate) << ',' << workload.size() << ',' << result.stats.decisions << ','
        << fmt(r.decision_mean_ms) << ',' << fmt(r.decision_max_ms) << ','
        << fmt(predictor->stats().mean_ms()) << '\n';
    }
  });
  if (!of.queue_sizes.empty()) {
    emit(of.queue_out, out, [&](std::ostream& s) {
      s << "queued_apps,mean_decision_ms\n";
      for (std::size_t n : of.queue_sizes) {
        const DecisionOverhead o = measure_decision_overhead(n, of.samples, spec.seed);
        s << n << ',' << fmt(1e3 * o.mean_seconds) << '\n';
      }
    });
  }
  return kExitOk;
}

int cmd_train(const RunFlags& rf, std::size_t samples, const std::string& out_dir,
              std::ostream& out) {
  RunSpec spec = rf.spec();
  if (spec.predictor == PredictorKind::Oracle) {
    throw std::invalid_argument("train needs --predictor mlp or global-mlp");
  }
  PredictorTraining training;
  training.samples_per_class = samples;
  training.seed = spec.seed;
  training.train.seed = spec.seed;
  training.cost_model = spec.cost_model;
  const auto predictor = make_predictor(spec.predictor, default_length_table(), training);
  const auto& mlp = dynamic_cast<const MlpPredictor&>(*predictor);
  std::filesystem::create_directories(out_dir);
  mlp.save(out_dir);
  out << "saved " << to_string(spec.predictor) << " models to " << out_dir << '\n';
  return kExitOk;
}

}  // namespace

WorkloadConfig read_workload_config(std::istream& in, WorkloadConfig base) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string body = trim(text);
  if (!body.empty() && body.front() == '{') {
    const auto doc = nlohmann::json::parse(body);
    // Apply trace before trace_scale regardless of key order.
    if (doc.contains("trace")) apply_setting(base, "trace", json_scalar(doc.at("trace")));
    for (const auto& [key, value] : doc.items()) {
      if (key != "trace") apply_setting(base, key, json_scalar(value));
    }
    return base;
  }
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("expected key=value: " + line);
    apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

void write_report_csv(std::ostream& out, std::span<const RunReport> reports) {
  out << "scheduler,avg_jct,p90_jct,frac_not_delayed,max_delay,bound\n";
  for (const auto& r : reports) {
    out << r.scheduler << ',' << fmt(r.avg_jct) << ',' << fmt(r.p90_jct) << ','
        << fmt(r.frac_not_delayed) << ',' << fmt(r.max_delay) << ',' << fmt(r.bound) << '\n';
  }
}

void write_cdf_csv(std::ostream& out, std::span<const double> ratios) {
  out << "ratio,cum_fraction\n";
  for (const auto& [ratio, frac] : fair_ratio_cdf(ratios)) out << fmt(ratio) << ',' << fmt(frac) << '\n';
}

std::unique_ptr<Predictor> build_predictor(const RunSpec& spec) {
  if (spec.predictor == PredictorKind::Oracle) return std::make_unique<OraclePredictor>(spec.cost_model);
  if (!spec.model_dir.empty()) {
    auto loaded = std::make_unique<MlpPredictor>(MlpPredictor::load(spec.model_dir));
    if (loaded->kind() != spec.predictor) {
      throw std::invalid_argument("models in '" + spec.model_dir + "' are " +
                                  std::string(to_string(loaded->kind())) + ", not " +
                                  std::string(to_string(spec.predictor)));
    }
    return loaded;
  }
  PredictorTraining training;
  training.seed = spec.seed;
  training.train.seed = spec.seed;
  training.cost_model = spec.cost_model;
  return make_predictor(spec.predictor, default_length_table(), training);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"LLM application scheduler simulator"};
  app.name("justitia");
  app.require_subcommand(1);

  GenerateFlags gf;
  auto* generate = app.add_subcommand("generate", "write a synthetic workload (JSONL)");
  generate->add_option("--config", gf.config, "key=value or JSON config")->check(CLI::ExistingFile);
  generate->add_option("--seed", gf.seed);
  generate->add_option("--apps", gf.apps)->check(CLI::PositiveNumber);
  generate->add_option("--density", gf.density, "window = 1080 s / density")->check(CLI::PositiveNumber);
  generate->add_option("--window", gf.window, "submission window in seconds")->check(CLI::PositiveNumber);
  generate->add_option("--trace", gf.trace, "arrival trace to replay")->check(CLI::ExistingFile);
  generate->add_option("--trace-scale", gf.trace_scale)->check(CLI::PositiveNumber);
  generate->add_option("--out", gf.out, "output path (default stdout)");

  RunFlags run_flags;
  std::string workload_path, run_out;
  auto* run_cmd = app.add_subcommand("run", "simulate one scheduler, write records JSONL");
  run_cmd->add_option("--workload", workload_path, "workload JSONL ('-' for stdin)")->required();
  run_flags.add_all(run_cmd, true);
  run_cmd->add_option("--out", run_out, "output path (default stdout)");

  RunFlags cmp_run;
  CompareFlags cf;
  auto* compare = app.add_subcommand("compare", "sweep schedulers, write report and CDF CSV");
  compare->add_option("--workload", cf.workload, "workload JSONL (default: 3x mixed suite)");
  cmp_run.add_all(compare, false);
  compare->add_option("--schedulers", cf.schedulers)->delimiter(',')->capture_default_str();
  compare->add_option("--reference", cf.reference, "fair-ratio denominator")->capture_default_str();
  compare->add_option("--density", cf.density, "mixed suite density without --workload")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  compare->add_option("--out", cf.out, "report CSV path (default stdout)");
  compare->add_option("--cdf", cf.cdf, "fair-ratio CDF CSV path");
  compare->add_option("--cdf-scheduler", cf.cdf_scheduler)->capture_default_str();
  compare->add_option("--jobs", cf.jobs, "parallel runs")->capture_default_str()->check(CLI::PositiveNumber);

  RunFlags bound_run;
  std::string records_path, bound_workload;
  auto* check = app.add_subcommand("check-bound", "verify the delay bound; exit 2 on violation");
  check->add_option("--records", records_path, "records JSONL from `run`");
  check->add_option("--workload", bound_workload, "simulate this workload first");
  bound_run.add_all(check, true);

  RunFlags starve_run;
  starve_run.capacity = starvation_engine_config().capacity;
  StarvationFlags sf;
  auto* starve = app.add_subcommand("starvation-bench", "elephant JCT against a mouse stream");
  starve_run.add_all(starve, false);
  starve->add_option("--mice", sf.mice)->delimiter(',')->capture_default_str();
  starve->add_option("--schedulers", sf.schedulers)->delimiter(',')->capture_default_str();
  starve->add_option("--fan-out", sf.fan_out, "elephant map nodes (0 = sampled)")->capture_default_str();
  starve->add_option("--out", sf.out);

  RunFlags overhead_run;
  OverheadFlags of;
  auto* overhead = app.add_subcommand("overhead-bench", "scheduler decision latency vs arrival rate");
  overhead_run.add_all(overhead, false);
  overhead->add_option("--rates", of.rates, "apps per minute")->delimiter(',')->capture_default_str();
  overhead->add_option("--minutes", of.minutes)->capture_default_str()->check(CLI::PositiveNumber);
  overhead->add_option("--queue-sizes", of.queue_sizes, "also time decisions at these queue sizes")
      ->delimiter(',');
  overhead->add_option("--samples", of.samples)->capture_default_str()->check(CLI::PositiveNumber);
  overhead->add_option("--out", of.out);
  overhead->add_option("--queue-out", of.queue_out);

  RunFlags train_run;
  train_run.predictor = "mlp";
  std::size_t train_samples = PredictorTraining{}.samples_per_class;
  std::string train_out;
  auto* train = app.add_subcommand("train", "train MLP cost models and save them");
  train_run.add_all(train, false);
  train->add_option("--samples", train_samples, "history samples per class")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  train->add_option("--out", train_out, "model directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    for (const auto& name : cf.schedulers) scheduler_from(name);
    for (const auto& name : sf.schedulers) scheduler_from(name);
    if (*generate) return cmd_generate(gf, out);
    if (*run_cmd) return cmd_run(run_flags, workload_path, run_out, out);
    if (*compare) return cmd_compare(cmp_run, cf, out, err);
    if (*check) return cmd_check_bound(bound_run, records_path, bound_workload, out, err);
    if (*starve) return cmd_starvation(starve_run, sf, out);
    if (*overhead) return cmd_overhead(overhead_run, of, out);
    if (*train) return cmd_train(train_run, train_samples, train_out, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"justitia"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace justitia::cli
