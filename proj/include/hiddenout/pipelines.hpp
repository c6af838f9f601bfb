#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hiddenout/baselines.hpp"
#include "hiddenout/bisect.hpp"
#include "hiddenout/data.hpp"
#include "hiddenout/detectors.hpp"
#include "hiddenout/forest.hpp"
#include "hiddenout/metrics.hpp"
#include "hiddenout/stats.hpp"

namespace hiddenout {

enum class Generator { kBisect, kHidden, kHyperbox, kNone };

std::string to_string(Generator g);
Generator parse_generator(const std::string& name);

enum class RunFlag { kOk, kOt, kNa };

std::string to_string(RunFlag f);

struct PipelineConfig {
  DetectorSpec adversary = DetectorSpec::lof();
  std::size_t budget = 2048;
  BisectConfig bisect;
  double epsilon = 0.1;
  ForestSpec forest;
  std::size_t repeats = 7;
  std::uint64_t seed = 0;
  double timeout_seconds = 1800.0;
  unsigned threads = 1;

  void validate() const;
};

/// Synthetic outliers from one generator, with the models it was run against.
struct SyntheticOutliers {
  std::vector<Point> points;
  bool timed_out = false;
  double seconds = 0.0;
};

/// Fits the adversary (and, for BISECT/HIDDEN, the subspace ensemble) on
/// `train` and draws `count` synthetic outliers. Never called for kNone.
SyntheticOutliers generate_outliers(Generator generator, const Dataset& train, std::size_t count,
                                    const PipelineConfig& cfg, std::uint64_t seed);

struct RepeatRecord {
  std::size_t repeat = 0;
  double auc = 0.0;
  /// Adversary-only AUC (OCC) or plain-forest AUC (SOD) on the same split.
  double baseline_auc = 0.0;
  double seconds = 0.0;
  std::size_t train_inliers = 0;
  std::size_t train_outliers = 0;
  std::size_t generated = 0;
  std::size_t test_rows = 0;
  std::size_t test_outliers = 0;
  std::size_t test_added_outliers = 0;
  RunFlag flag = RunFlag::kOk;
};

struct EvalResult {
  Generator generator = Generator::kNone;
  std::vector<double> auc_per_repeat;
  std::vector<double> baseline_auc_per_repeat;
  double median_auc = 0.0;
  double median_baseline_auc = 0.0;
  /// One-sided Wilcoxon: generator better than baseline.
  std::optional<double> p_value;
  /// One-sided Wilcoxon: generator worse than baseline.
  std::optional<double> p_value_worse;
  RunFlag flag = RunFlag::kOk;
  std::vector<RepeatRecord> repeats;
};

/// One-class protocol: per repeat split_occ, generate |D_train| outliers,
/// train a forest on the augmented set and score D_test. The baseline is the
/// adversary's raw score on the same split.
EvalResult run_occ(const Dataset& data, Generator generator, const PipelineConfig& cfg);

/// Supervised protocol: per repeat split_sod, generate outliers until the
/// train classes balance, train a forest and score the augmented test set.
/// The baseline is a forest on the unaugmented train set.
EvalResult run_sod(const Dataset& d_small, const Dataset& d_full, Generator generator,
                   const PipelineConfig& cfg);

struct BenchGenerator {
  Generator kind = Generator::kBisect;
  double epsilon = 0.1;

  std::string label() const;
};

struct BenchConfig {
  std::vector<GaussianSpec> grid;
  std::vector<BenchGenerator> generators;
  std::size_t n_samp = 500;
  std::size_t budget = 2048;
  DetectorSpec adversary = DetectorSpec::lof();
  BisectConfig bisect;
  double timeout_seconds = 1800.0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct BenchRecord {
  std::size_t cell = 0;
  GaussianSpec spec;
  std::string generator;
  double epsilon = 0.0;
  std::size_t subspaces = 0;
  double seconds = 0.0;
  std::size_t points = 0;
  long restarts = 0;
  long candidates = 0;
  long full_calls = 0;
  long ensemble_calls = 0;
  double adversary_cost = 0.0;
  bool timed_out = false;
};

struct BenchSummary {
  std::string generator;
  FiveNumber seconds;
  std::size_t cells = 0;
  std::size_t timeouts = 0;
};

struct BenchResult {
  std::vector<BenchRecord> records;
  /// One row per generator label; timed-out cells are counted, not summarized.
  std::vector<BenchSummary> summary;
};

BenchResult bench_generation(const BenchConfig& cfg);

}  // namespace hiddenout
