#include "hiddenout/cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "hiddenout/baselines.hpp"
#include "hiddenout/bisect.hpp"
#include "hiddenout/data.hpp"
#include "hiddenout/errors.hpp"
#include "hiddenout/parallel.hpp"
#include "hiddenout/pipelines.hpp"

namespace hiddenout::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kCommands = {"synth", "generate", "bench", "occ", "sod"};

// Stream ids for seeds derived inside the CLI.
constexpr std::uint64_t kSubspaceStream = 0x51;
constexpr std::uint64_t kGenerateStream = 0x52;
constexpr std::uint64_t kDownsampleStream = 0x53;
constexpr std::uint64_t kGridStream = 0x54;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

template <typename T>
T read_value(const json& j, const std::string& path) {
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!j.is_number()) fail(path, "expected a number");
    } else if constexpr (std::is_integral_v<T>) {
      if (!j.is_number_integer()) fail(path, "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (j.is_number_integer() && !j.is_number_unsigned() && j.get<long long>() < 0) {
          fail(path, "must be non-negative");
        }
      }
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!j.is_string()) fail(path, "expected a string");
    }
    return j.get<T>();
  } catch (const json::exception& e) {
    fail(path, e.what());
  }
}

template <typename T>
std::vector<T> read_list(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  std::vector<T> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(read_value<T>(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path.empty() ? "config" : path, "expected an object");
}

void merge_adversary(AdversaryConfig& a, const json& j) {
  require_object(j, "adversary");
  for (const auto& [key, value] : j.items()) {
    const std::string path = "adversary." + key;
    if (key == "kind") {
      a.kind = read_value<std::string>(value, path);
    } else if (key == "k") {
      a.k = read_value<std::size_t>(value, path);
    } else if (key == "contamination") {
      a.contamination = read_value<double>(value, path);
    } else {
      fail(path, "unknown key");
    }
  }
}

void merge_synth(SynthConfig& s, const json& j) {
  require_object(j, "synth");
  for (const auto& [key, value] : j.items()) {
    const std::string path = "synth." + key;
    if (key == "clusters") {
      s.clusters = read_value<std::size_t>(value, path);
    } else if (key == "d") {
      s.d = read_value<std::size_t>(value, path);
    } else if (key == "n") {
      s.n = read_value<std::size_t>(value, path);
    } else {
      fail(path, "unknown key");
    }
  }
}

void merge_forest(ForestConfig& f, const json& j) {
  require_object(j, "forest");
  for (const auto& [key, value] : j.items()) {
    const std::string path = "forest." + key;
    if (key == "n_trees") {
      f.n_trees = read_value<std::size_t>(value, path);
    } else if (key == "mtry") {
      f.mtry = read_value<std::size_t>(value, path);
    } else if (key == "min_leaf") {
      f.min_leaf = read_value<std::size_t>(value, path);
    } else {
      fail(path, "unknown key");
    }
  }
}

DetectorSpec detector_spec(const AdversaryConfig& a) {
  const auto kind = parse_detector_kind(a.kind);
  DetectorSpec spec = kind == DetectorKind::kLof ? DetectorSpec::lof() : DetectorSpec::knn();
  if (a.k != 0) spec.k = a.k;
  spec.contamination = a.contamination;
  return spec;
}

BisectConfig bisect_config(const RunConfig& cfg) {
  BisectConfig b;
  b.n_cuts = cfg.n_cuts;
  b.err = cfg.err;
  b.max_restarts = cfg.max_restarts;
  b.weighting = parse_origin_weighting(cfg.origin_weighting);
  return b;
}

unsigned resolved_threads(const RunConfig& cfg) {
  return cfg.threads == 0 ? default_threads() : cfg.threads;
}

PipelineConfig pipeline_config(const RunConfig& cfg) {
  PipelineConfig p;
  p.adversary = detector_spec(cfg.adversary);
  p.budget = cfg.budget;
  p.bisect = bisect_config(cfg);
  p.epsilon = cfg.epsilon;
  p.forest.n_trees = cfg.forest.n_trees;
  p.forest.mtry = cfg.forest.mtry;
  p.forest.min_leaf = cfg.forest.min_leaf;
  p.repeats = cfg.repeats;
  p.seed = cfg.seed;
  p.timeout_seconds = cfg.timeout;
  p.threads = resolved_threads(cfg);
  return p;
}

std::vector<GaussianSpec> grid_specs(const RunConfig& cfg) {
  const auto base = derive_seed(cfg.seed, kGridStream);
  return cfg.grid == "table1" ? table1_grid(base) : desk_grid(base);
}

// Runs a validation step, prefixing any library ConfigError/DomainError with path.
template <typename Fn>
void check(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    fail(path, e.what());
  } catch (const DomainError& e) {
    fail(path, e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

json five_json(const FiveNumber& f) {
  return {{"min", f.min}, {"q1", f.q1}, {"q2", f.q2}, {"q3", f.q3}, {"max", f.max},
          {"iqr", f.iqr()}};
}

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string dataset_name(const RunConfig& cfg) { return fs::path(cfg.input).stem().string(); }

std::optional<std::string> label_if_present(const fs::path& path, const std::string& column) {
  const auto header = read_csv_header(path);
  if (std::find(header.begin(), header.end(), column) != header.end()) return column;
  return std::nullopt;
}

int run_synth(const RunConfig& cfg, std::ostream& log) {
  const GaussianSpec spec{cfg.synth.clusters, cfg.synth.d, cfg.synth.n, cfg.seed};
  const Dataset data = gen_gaussian_clusters(spec);
  write_csv(fs::path(cfg.output) / "data.csv", data);
  log << "wrote " << data.rows() << " rows to " << (fs::path(cfg.output) / "data.csv").string()
      << '\n';
  return kExitOk;
}

int run_generate(const RunConfig& cfg, std::ostream& log) {
  const fs::path input(cfg.input);
  const auto label = label_if_present(input, cfg.label_column);
  const Dataset loaded = load_csv(input, label);
  const Dataset features = loaded.without_labels();
  const auto gen = parse_generator(cfg.generator);
  const auto spec = detector_spec(cfg.adversary);
  const unsigned threads = resolved_threads(cfg);
  const auto gen_seed = derive_seed(cfg.seed, kGenerateStream);

  const auto full = calibrate_threshold(spec, features);
  std::vector<Point> points;
  std::vector<std::string> sides;
  json report = {{"generator", to_string(gen)}, {"requested", cfg.n_samp}};
  json timing;
  bool timed_out = false;

  if (gen == Generator::kHyperbox) {
    const auto res = hyperbox_generate(features, full, cfg.n_samp, gen_seed, cfg.timeout, threads);
    points = res.points;
    timed_out = res.timed_out;
    report["candidates"] = res.total_candidates();
    timing = {{"wall_seconds", res.wall_seconds}};
  } else {
    const auto subspaces =
        select_subspaces(features.cols(), cfg.budget, derive_seed(cfg.seed, kSubspaceStream));
    const auto ensemble = fit_ensemble(features, subspaces, spec, threads);
    const GenerationReport rep =
        gen == Generator::kBisect
            ? generate_batch(features, full, ensemble, cfg.n_samp, bisect_config(cfg), gen_seed,
                             cfg.timeout, threads)
            : hidden_generate(features, full, ensemble, cfg.n_samp,
                              HiddenConfig{cfg.epsilon, cfg.timeout}, gen_seed, threads);
    points = rep.points;
    timed_out = rep.timed_out;
    std::size_t h1 = 0;
    for (auto s : rep.sides) {
      sides.push_back(to_string(s));
      h1 += s == Side::kH1;
    }
    report["subspaces"] = ensemble.size();
    report["candidates"] = rep.total_candidates();
    report["restarts"] = rep.restarts;
    report["full_calls"] = rep.full_calls;
    report["ensemble_calls"] = rep.ensemble_calls;
    report["sides"] = {{"H1", h1}, {"H2", rep.size() - h1}};
    if (gen == Generator::kBisect && !rep.iterations.empty()) {
      std::vector<double> its(rep.iterations.begin(), rep.iterations.end());
      report["iterations"] = five_json(five_number(its));
    }
    timing = {{"wall_seconds", rep.wall_seconds},
              {"adversary_inference_cost", rep.adversary_inference_cost}};
  }
  report["points"] = points.size();
  report["flag"] = timed_out ? "ot" : "ok";

  std::vector<std::pair<std::string, std::vector<std::string>>> extra;
  if (gen != Generator::kHyperbox) extra.emplace_back("side", sides);
  const fs::path points_path = fs::path(cfg.output) / "points.csv";
  if (!points.empty()) {
    Dataset out_data = Dataset::from_rows(points, std::nullopt, features.feature_names());
    if (label) out_data = out_data.with_labels(Labels(points.size(), 1));
    write_csv(points_path, out_data, cfg.label_column, extra);
  } else {
    std::ofstream out(points_path, std::ios::binary);
    const auto& names = features.feature_names();
    for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
    if (label) out << ',' << cfg.label_column;
    for (const auto& e : extra) out << ',' << e.first;
    out << '\n';
  }
  write_json(fs::path(cfg.output) / "report.json", report);
  write_json(fs::path(cfg.output) / "timing.json", timing);
  log << "generated " << points.size() << "/" << cfg.n_samp << " points with "
      << to_string(gen) << (timed_out ? " (timed out)" : "") << '\n';
  return timed_out ? kExitTimeout : kExitOk;
}

int run_bench(const RunConfig& cfg, std::ostream& log) {
  BenchConfig bc;
  bc.grid = grid_specs(cfg);
  for (const auto& name : cfg.generators) {
    const auto kind = parse_generator(name);
    if (kind == Generator::kHidden) {
      for (double eps : cfg.epsilons) bc.generators.push_back({kind, eps});
    } else {
      bc.generators.push_back({kind, 0.0});
    }
  }
  bc.n_samp = cfg.n_samp;
  bc.budget = cfg.budget;
  bc.adversary = detector_spec(cfg.adversary);
  bc.bisect = bisect_config(cfg);
  bc.timeout_seconds = cfg.timeout;
  bc.seed = cfg.seed;
  bc.threads = resolved_threads(cfg);
  const auto result = bench_generation(bc);

  std::ofstream csv(fs::path(cfg.output) / "bench.csv", std::ios::binary);
  csv << "cell,clusters,d,n,seed,generator,epsilon,subspaces,seconds,points,restarts,"
         "candidates,full_calls,ensemble_calls,adversary_cost,flag\n";
  bool any_timeout = false;
  for (const auto& r : result.records) {
    any_timeout = any_timeout || r.timed_out;
    csv << r.cell << ',' << r.spec.clusters << ',' << r.spec.d << ',' << r.spec.n << ','
        << r.spec.seed << ',' << '"' << r.generator << '"' << ',' << format_number(r.epsilon)
        << ',' << r.subspaces << ',' << format_number(r.seconds) << ',' << r.points << ','
        << r.restarts << ',' << r.candidates << ',' << r.full_calls << ',' << r.ensemble_calls
        << ',' << format_number(r.adversary_cost) << ',' << (r.timed_out ? "ot" : "ok") << '\n';
  }
  json summary = json::array();
  for (const auto& s : result.summary) {
    json row = five_json(s.seconds);
    row["generator"] = s.generator;
    row["cells"] = s.cells;
    row["timeouts"] = s.timeouts;
    summary.push_back(row);
    log << s.generator << ": median " << s.seconds.q2 << " s, IQR " << s.seconds.iqr() << " s, "
        << s.timeouts << "/" << s.cells << " timeouts\n";
  }
  write_json(fs::path(cfg.output) / "summary.json", {{"grid", cfg.grid}, {"generators", summary}});
  return any_timeout ? kExitTimeout : kExitOk;
}

json eval_summary(const EvalResult& r, const std::string& dataset) {
  json j = {{"dataset", dataset},
            {"generator", to_string(r.generator)},
            {"flag", to_string(r.flag)},
            {"repeats", r.auc_per_repeat.size()},
            {"auc_per_repeat", r.auc_per_repeat},
            {"baseline_auc_per_repeat", r.baseline_auc_per_repeat},
            {"median_auc", r.median_auc},
            {"median_baseline_auc", r.median_baseline_auc},
            {"p_value", r.p_value ? json(*r.p_value) : json(nullptr)},
            {"p_value_worse", r.p_value_worse ? json(*r.p_value_worse) : json(nullptr)}};
  if (!r.auc_per_repeat.empty()) j["auc_quartiles"] = five_json(five_number(r.auc_per_repeat));
  return j;
}

int write_eval(const RunConfig& cfg, const EvalResult& r, std::ostream& log) {
  const std::string dataset = dataset_name(cfg);
  std::ofstream csv(fs::path(cfg.output) / "metrics.csv", std::ios::binary);
  csv << "dataset,generator,repeat,auc,seconds,flag\n";
  for (const auto& rec : r.repeats) {
    csv << dataset << ',' << to_string(r.generator) << ',' << rec.repeat << ','
        << (rec.flag == RunFlag::kOk ? format_number(rec.auc) : "") << ','
        << format_number(rec.seconds) << ',' << to_string(rec.flag) << '\n';
  }
  write_json(fs::path(cfg.output) / "summary.json", eval_summary(r, dataset));
  log << dataset << " " << to_string(r.generator) << ": median AUC " << r.median_auc
      << " (baseline " << r.median_baseline_auc << "), flag " << to_string(r.flag) << '\n';
  return r.flag == RunFlag::kOt ? kExitTimeout : kExitOk;
}

int run_occ_cmd(const RunConfig& cfg, std::ostream& log) {
  const Dataset data = load_csv(cfg.input, cfg.label_column);
  return write_eval(cfg, run_occ(data, parse_generator(cfg.generator), pipeline_config(cfg)), log);
}

int run_sod_cmd(const RunConfig& cfg, std::ostream& log) {
  const Dataset full = load_csv(cfg.input, cfg.label_column);
  const Dataset small =
      cfg.small_input.empty()
          ? downsample_outliers(full, cfg.downsample_fraction,
                                derive_seed(cfg.seed, kDownsampleStream))
          : load_csv(cfg.small_input, cfg.label_column);
  return write_eval(cfg, run_sod(small, full, parse_generator(cfg.generator), pipeline_config(cfg)),
                    log);
}

}  // namespace

void merge_json(RunConfig& cfg, const json& j_in) {
  require_object(j_in, "");
  const json& j = j_in.contains("config") ? j_in.at("config") : j_in;
  require_object(j, "config");
  if (&j != &j_in) {
    for (const auto& [key, value] : j_in.items()) {
      if (key != "config" && key != "tool" && key != "version") fail(key, "unknown key");
    }
  }
  for (const auto& [key, value] : j.items()) {
    if (key == "command") {
      cfg.command = read_value<std::string>(value, key);
    } else if (key == "input") {
      cfg.input = read_value<std::string>(value, key);
    } else if (key == "small_input") {
      cfg.small_input = read_value<std::string>(value, key);
    } else if (key == "downsample_fraction") {
      cfg.downsample_fraction = read_value<double>(value, key);
    } else if (key == "label_column") {
      cfg.label_column = read_value<std::string>(value, key);
    } else if (key == "generator") {
      cfg.generator = read_value<std::string>(value, key);
    } else if (key == "adversary") {
      merge_adversary(cfg.adversary, value);
    } else if (key == "budget") {
      cfg.budget = read_value<std::size_t>(value, key);
    } else if (key == "n_cuts") {
      cfg.n_cuts = read_value<int>(value, key);
    } else if (key == "err") {
      cfg.err = read_value<double>(value, key);
    } else if (key == "max_restarts") {
      cfg.max_restarts = read_value<int>(value, key);
    } else if (key == "origin_weighting") {
      cfg.origin_weighting = read_value<std::string>(value, key);
    } else if (key == "epsilon") {
      cfg.epsilon = read_value<double>(value, key);
    } else if (key == "n_samp") {
      cfg.n_samp = read_value<std::size_t>(value, key);
    } else if (key == "repeats") {
      cfg.repeats = read_value<std::size_t>(value, key);
    } else if (key == "seed") {
      cfg.seed = read_value<std::uint64_t>(value, key);
    } else if (key == "timeout") {
      cfg.timeout = read_value<double>(value, key);
    } else if (key == "output") {
      cfg.output = read_value<std::string>(value, key);
    } else if (key == "threads") {
      cfg.threads = read_value<unsigned>(value, key);
    } else if (key == "grid") {
      cfg.grid = read_value<std::string>(value, key);
    } else if (key == "generators") {
      cfg.generators = read_list<std::string>(value, key);
    } else if (key == "epsilons") {
      cfg.epsilons = read_list<double>(value, key);
    } else if (key == "synth") {
      merge_synth(cfg.synth, value);
    } else if (key == "forest") {
      merge_forest(cfg.forest, value);
    } else {
      fail(key, "unknown key");
    }
  }
}

json to_json(const RunConfig& cfg) {
  return {{"command", cfg.command},
          {"input", cfg.input},
          {"small_input", cfg.small_input},
          {"downsample_fraction", cfg.downsample_fraction},
          {"label_column", cfg.label_column},
          {"generator", cfg.generator},
          {"adversary",
           {{"kind", cfg.adversary.kind},
            {"k", cfg.adversary.k},
            {"contamination", cfg.adversary.contamination}}},
          {"budget", cfg.budget},
          {"n_cuts", cfg.n_cuts},
          {"err", cfg.err},
          {"max_restarts", cfg.max_restarts},
          {"origin_weighting", cfg.origin_weighting},
          {"epsilon", cfg.epsilon},
          {"n_samp", cfg.n_samp},
          {"repeats", cfg.repeats},
          {"seed", cfg.seed},
          {"timeout", cfg.timeout},
          {"output", cfg.output},
          {"threads", cfg.threads},
          {"grid", cfg.grid},
          {"generators", cfg.generators},
          {"epsilons", cfg.epsilons},
          {"synth", {{"clusters", cfg.synth.clusters}, {"d", cfg.synth.d}, {"n", cfg.synth.n}}},
          {"forest",
           {{"n_trees", cfg.forest.n_trees},
            {"mtry", cfg.forest.mtry},
            {"min_leaf", cfg.forest.min_leaf}}}};
}

void validate(const RunConfig& cfg) {
  if (!kCommands.count(cfg.command)) {
    fail("command", "expected one of synth, generate, bench, occ, sod; got '" + cfg.command + "'");
  }
  if (cfg.output.empty()) fail("output", "must not be empty");
  const bool needs_input = cfg.command == "generate" || cfg.command == "occ" || cfg.command == "sod";
  if (needs_input && cfg.input.empty()) fail("input", "required for " + cfg.command);

  if (cfg.command == "synth") {
    if (cfg.synth.clusters < 1) fail("synth.clusters", "must be >= 1");
    if (cfg.synth.d < 1) fail("synth.d", "must be >= 1");
    if (cfg.synth.n < cfg.synth.clusters) {
      fail("synth.n", "must be >= synth.clusters (" + std::to_string(cfg.synth.clusters) + ")");
    }
    return;
  }

  check("adversary.kind", [&] { parse_detector_kind(cfg.adversary.kind); });
  check("adversary", [&] { detector_spec(cfg.adversary).validate(); });
  if (cfg.budget < 1) fail("budget", "must be >= 1");
  check("origin_weighting", [&] { parse_origin_weighting(cfg.origin_weighting); });
  if (cfg.n_cuts < 1) fail("n_cuts", "must be >= 1");
  if (!(cfg.err > 0.0)) fail("err", "must be > 0");
  if (cfg.max_restarts < 0) fail("max_restarts", "must be >= 0");
  if (!(cfg.timeout >= 0.0)) fail("timeout", "must be >= 0 seconds");
  if (!(cfg.epsilon > 0.0 && cfg.epsilon <= 1.0)) {
    fail("epsilon", "must be in (0, 1], got " + format_number(cfg.epsilon));
  }

  if (cfg.command == "generate" || cfg.command == "bench") {
    if (cfg.n_samp < 1) fail("n_samp", "must be >= 1");
  }
  if (cfg.command == "generate") {
    check("generator", [&] {
      if (parse_generator(cfg.generator) == Generator::kNone) {
        throw ConfigError("generate needs bisect, hidden or hyperbox");
      }
    });
  }
  if (cfg.command == "bench") {
    if (cfg.grid != "desk" && cfg.grid != "table1") fail("grid", "expected desk or table1");
    if (cfg.generators.empty()) fail("generators", "must not be empty");
    for (std::size_t i = 0; i < cfg.generators.size(); ++i) {
      const std::string path = "generators[" + std::to_string(i) + "]";
      check(path, [&] {
        const auto g = parse_generator(cfg.generators[i]);
        if (g != Generator::kBisect && g != Generator::kHidden) {
          throw ConfigError("bench supports bisect and hidden only");
        }
      });
    }
    if (cfg.epsilons.empty()) fail("epsilons", "must not be empty");
    for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) {
      const double e = cfg.epsilons[i];
      if (!(e > 0.0 && e <= 1.0)) {
        fail("epsilons[" + std::to_string(i) + "]", "must be in (0, 1], got " + format_number(e));
      }
    }
  }
  if (cfg.command == "occ" || cfg.command == "sod") {
    check("generator", [&] { parse_generator(cfg.generator); });
    if (cfg.repeats < 1) fail("repeats", "must be >= 1");
    if (cfg.forest.n_trees < 1) fail("forest.n_trees", "must be >= 1");
    if (cfg.forest.min_leaf < 1) fail("forest.min_leaf", "must be >= 1");
    if (cfg.label_column.empty()) fail("label_column", "required for " + cfg.command);
  }
  if (cfg.command == "sod" && cfg.small_input.empty() &&
      !(cfg.downsample_fraction > 0.0 && cfg.downsample_fraction < 1.0)) {
    fail("downsample_fraction", "must be in (0, 1)");
  }
}

int run(const RunConfig& cfg, std::ostream& log) {
  try {
    validate(cfg);
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  try {
    fs::create_directories(cfg.output);
    json manifest = {{"tool", kToolName}, {"version", kVersion}, {"config", to_json(cfg)}};
    write_json(fs::path(cfg.output) / "manifest.json", manifest);
    if (cfg.command == "synth") return run_synth(cfg, log);
    if (cfg.command == "generate") return run_generate(cfg, log);
    if (cfg.command == "bench") return run_bench(cfg, log);
    if (cfg.command == "occ") return run_occ_cmd(cfg, log);
    return run_sod_cmd(cfg, log);
  } catch (const GenerationFailure& e) {
    log << "generation failure: " << e.what() << " (restarts " << e.restarts()
        << ", empty intervals " << e.empty_intervals() << ", ray failures " << e.ray_failures()
        << ", iteration cap hits " << e.iteration_cap_hits() << ")\n";
    return kExitGeneration;
  } catch (const NoOriginError& e) {
    log << "generation failure: " << e.what() << '\n';
    return kExitGeneration;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    log << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

int main(int argc, const char* const* argv) {
  CLI::App app{"Hidden outlier generation and evaluation"};
  app.require_subcommand(0, 1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config or manifest; flags override its values");

  RunConfig flags;
  std::string generators_csv;
  std::string epsilons_csv;
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> overrides;
  // Binds a flag to the field picked by `field` and remembers how to copy it
  // onto the layered config.
  auto opt = [&](CLI::App* sub, const std::string& name, auto field, const std::string& help) {
    auto* o = sub->add_option(name, field(flags), help);
    overrides.emplace_back(o, [field, &flags](RunConfig& target) { field(target) = field(flags); });
    return o;
  };
#define HO_FIELD(member) [](RunConfig& c) -> auto& { return c.member; }

  std::vector<CLI::App*> subs;
  const std::vector<std::pair<const char*, const char*>> commands = {
      {"synth", "write a clustered Gaussian dataset"},
      {"generate", "generate synthetic outliers for a CSV dataset"},
      {"bench", "time generators over a synthetic grid"},
      {"occ", "one-class evaluation with a random forest"},
      {"sod", "supervised outlier detection on a downsampled set"},
  };
  for (const auto& [name, description] : commands) {
    auto* sub = app.add_subcommand(name, description);
    subs.push_back(sub);
    sub->add_option("--config", config_path, "JSON config or manifest; flags override its values");
    opt(sub, "--output,-o", HO_FIELD(output), "output directory");
    opt(sub, "--seed", HO_FIELD(seed), "base seed");
    opt(sub, "--threads", HO_FIELD(threads), "worker threads (0 = logical cores)");
    if (std::string(name) == "synth") {
      opt(sub, "--clusters", HO_FIELD(synth.clusters), "number of Gaussian clusters");
      opt(sub, "--dims", HO_FIELD(synth.d), "number of features");
      opt(sub, "--rows", HO_FIELD(synth.n), "number of rows");
      continue;
    }
    opt(sub, "--adversary", HO_FIELD(adversary.kind), "lof or knn");
    opt(sub, "--k", HO_FIELD(adversary.k), "detector neighbors (0 = detector default)");
    opt(sub, "--contamination", HO_FIELD(adversary.contamination), "expected outlier fraction");
    opt(sub, "--budget", HO_FIELD(budget), "maximum number of subspaces");
    opt(sub, "--n-cuts", HO_FIELD(n_cuts), "cuts per ray");
    opt(sub, "--err", HO_FIELD(err), "bisection tolerance");
    opt(sub, "--max-restarts", HO_FIELD(max_restarts), "restarts per point");
    opt(sub, "--origin-weighting", HO_FIELD(origin_weighting), "increasing, decreasing or uniform");
    opt(sub, "--epsilon", HO_FIELD(epsilon), "HIDDEN hypercube size in (0, 1]");
    opt(sub, "--timeout", HO_FIELD(timeout), "seconds before a run is marked ot");
    if (std::string(name) == "bench") {
      opt(sub, "--grid", HO_FIELD(grid), "desk or table1");
      opt(sub, "--n-samp", HO_FIELD(n_samp), "points per cell");
      sub->add_option("--generators", generators_csv, "comma-separated: bisect,hidden");
      sub->add_option("--epsilons", epsilons_csv, "comma-separated HIDDEN epsilons");
      continue;
    }
    opt(sub, "--input,-i", HO_FIELD(input), "input CSV");
    opt(sub, "--label-column", HO_FIELD(label_column), "name of the 0/1 outlier column");
    opt(sub, "--generator", HO_FIELD(generator), "bisect, hidden, hyperbox or none");
    if (std::string(name) == "generate") {
      opt(sub, "--n-samp", HO_FIELD(n_samp), "points to generate");
      continue;
    }
    opt(sub, "--repeats", HO_FIELD(repeats), "evaluation repeats");
    opt(sub, "--trees", HO_FIELD(forest.n_trees), "random forest size");
    opt(sub, "--mtry", HO_FIELD(forest.mtry), "features per split (0 = floor(sqrt(d)))");
    opt(sub, "--min-leaf", HO_FIELD(forest.min_leaf), "minimum leaf size");
    if (std::string(name) == "sod") {
      opt(sub, "--small-input", HO_FIELD(small_input), "pre-downsampled CSV");
      opt(sub, "--downsample-fraction", HO_FIELD(downsample_fraction), "outlier fraction of the small set");
    }
  }

#undef HO_FIELD

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("config: cannot open '" + config_path + "'");
      json j;
      try {
        j = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
      merge_json(cfg, j);
    }
    for (auto* sub : subs) {
      if (sub->parsed()) cfg.command = sub->get_name();
    }
    for (const auto& [o, apply] : overrides) {
      if (o->count() > 0) apply(cfg);
    }
    auto split_list = [](const std::string& s) {
      std::vector<std::string> out;
      std::stringstream in(s);
      std::string item;
      while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
      }
      return out;
    };
    if (!generators_csv.empty()) cfg.generators = split_list(generators_csv);
    if (!epsilons_csv.empty()) {
      cfg.epsilons.clear();
      for (const auto& item : split_list(epsilons_csv)) {
        try {
          std::size_t used = 0;
          cfg.epsilons.push_back(std::stod(item, &used));
          if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
          throw ConfigError("epsilons: cannot parse '" + item + "'");
        }
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return run(cfg, std::cerr);
}

}  // namespace hiddenout::cli
