#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hiddenout/core.hpp"
#include "hiddenout/detectors.hpp"
#include "hiddenout/ensemble.hpp"
#include "hiddenout/random.hpp"

namespace hiddenout {

/// Parametrizes origin + t * direction for t in [0, length].
struct Ray {
  Point origin;
  Point direction;
  double length = 0.0;

  Point at(double t) const;
};

struct TInterval {
  double a = 0.0;
  double b = 0.0;
};

/// How origin candidates are weighted by their full-space score.
enum class OriginWeighting {
  kIncreasing,  // score - min_inlier_score + delta
  kDecreasing,  // max_inlier_score - score + delta
  kUniform,
};

std::string to_string(OriginWeighting w);
OriginWeighting parse_origin_weighting(const std::string& name);

struct BisectConfig {
  int n_cuts = 5;
  double err = 0.05;
  int max_restarts = 50;
  int max_ray_attempts = 10;
  OriginWeighting weighting = OriginWeighting::kIncreasing;

  void validate() const;
};

/// Output of a generator run. Points are ordered by their request index.
struct GenerationReport {
  std::size_t requested = 0;
  std::vector<Point> points;
  std::vector<Side> sides;
  /// Bisection midpoints evaluated per point (0 for rejection samplers).
  std::vector<int> iterations;
  /// Candidates drawn per point (rays for BISECT, hypercube samples for HIDDEN).
  std::vector<long> candidates;
  long restarts = 0;
  long full_calls = 0;
  long ensemble_calls = 0;
  double wall_seconds = 0.0;
  /// Mean seconds per full-space classify call, measured after generation.
  double adversary_inference_cost = 0.0;
  bool timed_out = false;

  std::size_t size() const noexcept { return points.size(); }
  long total_candidates() const;
};

/// Uniform direction on the unit sphere (normalized standard normal draw).
Point sample_direction(std::size_t d, Rng& rng);

/// Draws (direction, length) until the endpoint is a full-space outlier.
/// Returns nullopt after max_attempts failures, meaning "pick a new origin".
std::optional<Ray> make_ray(PointView origin, const Dataset& data, const BinaryDetector& full,
                            Rng& rng, int max_attempts);
std::optional<Ray> make_ray(PointView origin, double data_max_norm, const BinaryDetector& full,
                            Rng& rng, int max_attempts);

/// Samples training rows that the full-space detector accepts, weighted by
/// their score. Scores are computed once at construction.
class OriginSampler {
 public:
  static constexpr double kDelta = 1e-9;

  OriginSampler(const Dataset& data, const ScoringDetector& full,
                OriginWeighting weighting = OriginWeighting::kIncreasing);

  std::size_t sample(Rng& rng) const;

  const std::vector<std::size_t>& inlier_rows() const noexcept { return inliers_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

 private:
  std::vector<std::size_t> inliers_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

Point select_origin(const Dataset& data, const ScoringDetector& full, Rng& rng,
                    OriginWeighting weighting = OriginWeighting::kIncreasing);

/// Evaluates the full-space verdict at n_cuts + 1 equally spaced points of
/// the ray and returns one adjacent pair with differing verdicts, chosen
/// uniformly; nullopt if the verdict never changes.
std::optional<TInterval> cut_trick_interval(const Ray& ray, const BinaryDetector& full,
                                            int n_cuts, Rng& rng);

/// Nearest integer of log2(interval_length / err) - 1, floored at 0.
int worst_case_iters(double interval_length, double err);

struct HiddenOutlier {
  Point point;
  Side side = Side::kH1;
  int iterations = 0;
};

/// Bisection of f(t) = F(ray.at(t)) on [a, b]. Returns nullopt if no zero is
/// reached within max_iterations midpoints. The interval endpoints must have
/// differing full-space verdicts.
std::optional<HiddenOutlier> bisect_interval(const Ray& ray, TInterval interval,
                                             const BinaryDetector& full,
                                             const BinaryDetector& ensemble, int max_iterations);

/// Hard cap on midpoints for an interval of the given length.
int iteration_cap(double interval_length, double err);

struct BisectStats {
  long restarts = 0;
  long rays = 0;
  long empty_intervals = 0;
  long ray_failures = 0;
  long iteration_cap_hits = 0;
};

/// One hidden outlier: origin, ray, cut trick, bisection; restarts with a new
/// origin on an empty interval or a breached iteration cap. Throws
/// GenerationFailure after cfg.max_restarts restarts.
class BisectGenerator {
 public:
  BisectGenerator(const Dataset& data, const ScoringDetector& full,
                  const BinaryDetector& ensemble, BisectConfig cfg);

  /// `deadline_reached` is polled before every attempt; when it returns true
  /// the call gives up and returns nullopt.
  template <typename Deadline>
  std::optional<HiddenOutlier> generate(Rng& rng, BisectStats& stats, Deadline&& deadline_reached) const;

  HiddenOutlier generate(Rng& rng, BisectStats& stats) const;

  const OriginSampler& origins() const noexcept { return sampler_; }

 private:
  std::optional<HiddenOutlier> attempt(Rng& rng, BisectStats& stats) const;

  const Dataset& data_;
  const ScoringDetector& full_;
  const BinaryDetector& ensemble_;
  BisectConfig cfg_;
  OriginSampler sampler_;
  double max_norm_;
};

HiddenOutlier bisect_one(const Dataset& data, const ScoringDetector& full,
                         const BinaryDetector& ensemble, const BisectConfig& cfg, Rng& rng);

/// n_samp hidden outliers, point i drawn from the stream derived from
/// (seed, i). A timeout yields a partial report with timed_out set.
GenerationReport generate_batch(const Dataset& data, const ScoringDetector& full,
                                const BinaryDetector& ensemble, std::size_t n_samp,
                                const BisectConfig& cfg, std::uint64_t seed,
                                double timeout_seconds = 1800.0, unsigned threads = 1);

/// Mean seconds per full-space classify call over a sample of training rows.
double measure_inference_cost(const Dataset& data, const BinaryDetector& full,
                              std::size_t probes = 64);

// --- template implementation ---

template <typename Deadline>
std::optional<HiddenOutlier> BisectGenerator::generate(Rng& rng, BisectStats& stats,
                                                       Deadline&& deadline_reached) const {
  for (int restart = 0; restart <= cfg_.max_restarts; ++restart) {
    if (deadline_reached()) return std::nullopt;
    if (restart > 0) ++stats.restarts;
    if (auto hit = attempt(rng, stats)) return hit;
  }
  throw GenerationFailure("BISECT exhausted its restart budget",
                          static_cast<int>(stats.restarts),
                          static_cast<int>(stats.empty_intervals),
                          static_cast<int>(stats.ray_failures),
                          static_cast<int>(stats.iteration_cap_hits));
}

}  // namespace hiddenout
