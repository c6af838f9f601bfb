#include "hiddenout/pipelines.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <sstream>

#include "hiddenout/ensemble.hpp"

namespace hiddenout {

namespace {

using Clock = std::chrono::steady_clock;

// Stream ids for per-repeat seeds. The split stream depends only on
// (seed, repeat), so runs that differ only in the generator share splits.
enum Stream : std::uint64_t {
  kSplitStream = 0x100,
  kSubspaceStream = 0x200,
  kGenerateStream = 0x300,
  kForestStream = 0x400,
  kBaselineForestStream = 0x500,
};

std::uint64_t repeat_seed(std::uint64_t seed, Stream stream, std::size_t repeat) {
  return derive_seed(seed, stream + (static_cast<std::uint64_t>(repeat) << 16));
}

Dataset labeled(const std::vector<Point>& points, std::uint8_t label) {
  return Dataset::from_rows(points, Labels(points.size(), label));
}

double forest_auc(const Dataset& train, const Dataset& test, const PipelineConfig& cfg,
                  std::uint64_t seed) {
  ForestSpec spec = cfg.forest;
  spec.seed = seed;
  const auto model = forest_train(train, spec, cfg.threads);
  std::vector<double> scores(test.rows());
  for (std::size_t i = 0; i < test.rows(); ++i) scores[i] = model.proba(test.row(i));
  return roc_auc(scores, test.labels());
}

void finalize(EvalResult& result) {
  if (result.flag != RunFlag::kOk || result.auc_per_repeat.empty()) return;
  result.median_auc = median(result.auc_per_repeat);
  result.median_baseline_auc = median(result.baseline_auc_per_repeat);
  if (result.generator == Generator::kNone) return;
  result.p_value = wilcoxon_signed_rank(result.auc_per_repeat, result.baseline_auc_per_repeat,
                                        Alternative::kGreater)
                       .p_value;
  result.p_value_worse = wilcoxon_signed_rank(result.auc_per_repeat,
                                              result.baseline_auc_per_repeat, Alternative::kLess)
                             .p_value;
}

}  // namespace

std::string to_string(Generator g) {
  switch (g) {
    case Generator::kBisect:
      return "bisect";
    case Generator::kHidden:
      return "hidden";
    case Generator::kHyperbox:
      return "hyperbox";
    case Generator::kNone:
      return "none";
  }
  return "unknown";
}

Generator parse_generator(const std::string& name) {
  if (name == "bisect") return Generator::kBisect;
  if (name == "hidden") return Generator::kHidden;
  if (name == "hyperbox" || name == "hb") return Generator::kHyperbox;
  if (name == "none") return Generator::kNone;
  throw ConfigError("unknown generator '" + name + "' (expected bisect, hidden, hyperbox or none)");
}

std::string to_string(RunFlag f) {
  switch (f) {
    case RunFlag::kOk:
      return "ok";
    case RunFlag::kOt:
      return "ot";
    case RunFlag::kNa:
      return "na";
  }
  return "unknown";
}

void PipelineConfig::validate() const {
  adversary.validate();
  bisect.validate();
  HiddenConfig{epsilon, timeout_seconds}.validate();
  if (budget < 1) throw ConfigError("budget must be >= 1");
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  if (forest.n_trees < 1) throw ConfigError("forest n_trees must be >= 1");
  if (forest.min_leaf < 1) throw ConfigError("forest min_leaf must be >= 1");
}

SyntheticOutliers generate_outliers(Generator generator, const Dataset& train, std::size_t count,
                                    const PipelineConfig& cfg, std::uint64_t seed) {
  if (generator == Generator::kNone) throw ConfigError("generator 'none' produces no outliers");
  const Dataset features = train.without_labels();
  const auto full = calibrate_threshold(cfg.adversary, features);
  SyntheticOutliers out;
  if (generator == Generator::kHyperbox) {
    auto res = hyperbox_generate(features, full, count, seed, cfg.timeout_seconds, cfg.threads);
    out.points = std::move(res.points);
    out.timed_out = res.timed_out;
    out.seconds = res.wall_seconds;
    return out;
  }
  const auto subspaces =
      select_subspaces(features.cols(), cfg.budget, derive_seed(seed, kSubspaceStream));
  const auto ensemble = fit_ensemble(features, subspaces, cfg.adversary, cfg.threads);
  GenerationReport report;
  if (generator == Generator::kBisect) {
    report = generate_batch(features, full, ensemble, count, cfg.bisect, seed, cfg.timeout_seconds,
                            cfg.threads);
  } else {
    report = hidden_generate(features, full, ensemble, count,
                             HiddenConfig{cfg.epsilon, cfg.timeout_seconds}, seed, cfg.threads);
  }
  out.points = std::move(report.points);
  out.timed_out = report.timed_out;
  out.seconds = report.wall_seconds;
  return out;
}

EvalResult run_occ(const Dataset& data, Generator generator, const PipelineConfig& cfg) {
  cfg.validate();
  if (!data.has_labels()) throw ConfigError("run_occ needs a labeled dataset");
  EvalResult result;
  result.generator = generator;
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    const auto split = split_occ(data, repeat_seed(cfg.seed, kSplitStream, r));
    RepeatRecord rec;
    rec.repeat = r;
    rec.train_inliers = split.train.rows();
    rec.test_rows = split.test.rows();
    rec.test_outliers = split.test.count_label(1);

    const Dataset train_x = split.train.without_labels();
    const auto adversary = calibrate_threshold(cfg.adversary, train_x);
    std::vector<double> scores(split.test.rows());
    for (std::size_t i = 0; i < split.test.rows(); ++i) scores[i] = adversary.score(split.test.row(i));
    rec.baseline_auc = roc_auc(scores, split.test.labels());

    if (generator == Generator::kNone) {
      rec.auc = rec.baseline_auc;
    } else {
      const auto synth = generate_outliers(generator, split.train, split.train.rows(), cfg,
                                           repeat_seed(cfg.seed, kGenerateStream, r));
      rec.seconds = synth.seconds;
      rec.generated = synth.points.size();
      if (synth.timed_out) {
        rec.flag = RunFlag::kOt;
        result.flag = RunFlag::kOt;
        result.repeats.push_back(rec);
        break;
      }
      const Dataset augmented = concat(split.train, labeled(synth.points, 1));
      rec.auc = forest_auc(augmented, split.test, cfg, repeat_seed(cfg.seed, kForestStream, r));
    }
    result.auc_per_repeat.push_back(rec.auc);
    result.baseline_auc_per_repeat.push_back(rec.baseline_auc);
    result.repeats.push_back(rec);
  }
  finalize(result);
  return result;
}

EvalResult run_sod(const Dataset& d_small, const Dataset& d_full, Generator generator,
                   const PipelineConfig& cfg) {
  cfg.validate();
  EvalResult result;
  result.generator = generator;
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    const auto split = split_sod(d_small, d_full, repeat_seed(cfg.seed, kSplitStream, r));
    RepeatRecord rec;
    rec.repeat = r;
    rec.train_inliers = split.train.count_label(0);
    rec.train_outliers = split.train.count_label(1);
    rec.test_rows = split.test.rows();
    rec.test_outliers = split.test.count_label(1);
    rec.test_added_outliers = split.added_outliers;

    rec.baseline_auc =
        forest_auc(split.train, split.test, cfg, repeat_seed(cfg.seed, kBaselineForestStream, r));

    if (generator == Generator::kNone) {
      rec.auc = rec.baseline_auc;
    } else {
      const std::size_t need =
          rec.train_inliers > rec.train_outliers ? rec.train_inliers - rec.train_outliers : 0;
      Dataset augmented = split.train;
      if (need > 0) {
        const auto synth = generate_outliers(generator, split.train, need, cfg,
                                             repeat_seed(cfg.seed, kGenerateStream, r));
        rec.seconds = synth.seconds;
        rec.generated = synth.points.size();
        if (synth.timed_out) {
          rec.flag = RunFlag::kOt;
          result.flag = RunFlag::kOt;
          result.repeats.push_back(rec);
          break;
        }
        augmented = concat(split.train, labeled(synth.points, 1));
      }
      rec.auc = forest_auc(augmented, split.test, cfg, repeat_seed(cfg.seed, kForestStream, r));
    }
    result.auc_per_repeat.push_back(rec.auc);
    result.baseline_auc_per_repeat.push_back(rec.baseline_auc);
    result.repeats.push_back(rec);
  }
  finalize(result);
  return result;
}

std::string BenchGenerator::label() const {
  if (kind != Generator::kHidden) return to_string(kind);
  std::ostringstream out;
  out << "hidden(eps=" << epsilon << ")";
  return out.str();
}

BenchResult bench_generation(const BenchConfig& cfg) {
  if (cfg.grid.empty()) throw ConfigError("bench grid is empty");
  if (cfg.generators.empty()) throw ConfigError("bench needs at least one generator");
  for (const auto& g : cfg.generators) {
    if (g.kind != Generator::kBisect && g.kind != Generator::kHidden) {
      throw ConfigError("bench supports the bisect and hidden generators only");
    }
    if (g.kind == Generator::kHidden) HiddenConfig{g.epsilon, cfg.timeout_seconds}.validate();
  }
  cfg.adversary.validate();
  cfg.bisect.validate();

  BenchResult result;
  for (std::size_t cell = 0; cell < cfg.grid.size(); ++cell) {
    const auto& spec = cfg.grid[cell];
    const Dataset data = gen_gaussian_clusters(spec);
    const auto full = calibrate_threshold(cfg.adversary, data);
    const auto subspaces =
        select_subspaces(data.cols(), cfg.budget, derive_seed(cfg.seed, cell * 2 + 1));
    const auto ensemble = fit_ensemble(data, subspaces, cfg.adversary, cfg.threads);
    for (const auto& g : cfg.generators) {
      const auto gen_seed = derive_seed(cfg.seed, cell * 2 + 2);
      GenerationReport report =
          g.kind == Generator::kBisect
              ? generate_batch(data, full, ensemble, cfg.n_samp, cfg.bisect, gen_seed,
                               cfg.timeout_seconds, cfg.threads)
              : hidden_generate(data, full, ensemble, cfg.n_samp,
                                HiddenConfig{g.epsilon, cfg.timeout_seconds}, gen_seed,
                                cfg.threads);
      BenchRecord rec;
      rec.cell = cell;
      rec.spec = spec;
      rec.generator = g.label();
      rec.epsilon = g.kind == Generator::kHidden ? g.epsilon : 0.0;
      rec.subspaces = ensemble.size();
      rec.seconds = report.wall_seconds;
      rec.points = report.size();
      rec.restarts = report.restarts;
      rec.candidates = report.total_candidates();
      rec.full_calls = report.full_calls;
      rec.ensemble_calls = report.ensemble_calls;
      rec.adversary_cost = report.adversary_inference_cost;
      rec.timed_out = report.timed_out;
      result.records.push_back(rec);
    }
  }

  for (const auto& g : cfg.generators) {
    BenchSummary row;
    row.generator = g.label();
    std::vector<double> times;
    for (const auto& rec : result.records) {
      if (rec.generator != row.generator) continue;
      ++row.cells;
      if (rec.timed_out) {
        ++row.timeouts;
      } else {
        times.push_back(rec.seconds);
      }
    }
    if (!times.empty()) row.seconds = five_number(times);
    result.summary.push_back(row);
  }
  return result;
}

}  // namespace hiddenout
