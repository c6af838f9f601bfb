#include "hiddenout/bisect.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "counting.hpp"
#include "hiddenout/parallel.hpp"

namespace hiddenout {

namespace {

using Clock = std::chrono::steady_clock;

// Extra midpoints allowed beyond the worst-case count before restarting.
constexpr int kIterationSlack = 8;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

Point Ray::at(double t) const {
  Point p(origin.size());
  for (std::size_t j = 0; j < p.size(); ++j) p[j] = origin[j] + t * direction[j];
  return p;
}

std::string to_string(OriginWeighting w) {
  switch (w) {
    case OriginWeighting::kIncreasing:
      return "increasing";
    case OriginWeighting::kDecreasing:
      return "decreasing";
    case OriginWeighting::kUniform:
      return "uniform";
  }
  return "unknown";
}

OriginWeighting parse_origin_weighting(const std::string& name) {
  if (name == "increasing") return OriginWeighting::kIncreasing;
  if (name == "decreasing") return OriginWeighting::kDecreasing;
  if (name == "uniform") return OriginWeighting::kUniform;
  throw ConfigError("unknown origin weighting '" + name +
                    "' (expected increasing, decreasing or uniform)");
}

void BisectConfig::validate() const {
  if (n_cuts < 1) throw ConfigError("n_cuts must be >= 1");
  if (!(err > 0.0) || !std::isfinite(err)) throw ConfigError("err must be a positive real");
  if (max_restarts < 0) throw ConfigError("max_restarts must be >= 0");
  if (max_ray_attempts < 1) throw ConfigError("max_ray_attempts must be >= 1");
}

long GenerationReport::total_candidates() const {
  return std::accumulate(candidates.begin(), candidates.end(), 0L);
}

Point sample_direction(std::size_t d, Rng& rng) {
  if (d == 0) throw DegenerateDimensionError("direction needs d >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  Point v(d);
  double len = 0.0;
  do {
    for (auto& x : v) x = normal(rng);
    len = norm(v);
  } while (len == 0.0);
  for (auto& x : v) x /= len;
  return v;
}

std::optional<Ray> make_ray(PointView origin, double data_max_norm, const BinaryDetector& full,
                            Rng& rng, int max_attempts) {
  if (origin.size() != full.dim()) throw ShapeError("ray origin dimension mismatch");
  if (!(data_max_norm > 0.0)) return std::nullopt;
  const double l = data_max_norm;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Ray ray;
    ray.origin.assign(origin.begin(), origin.end());
    ray.direction = sample_direction(origin.size(), rng);
    ray.length = l + uniform_real(rng, -l / 2.0, l);
    if (full.classify(ray.at(ray.length))) return ray;
  }
  return std::nullopt;
}

std::optional<Ray> make_ray(PointView origin, const Dataset& data, const BinaryDetector& full,
                            Rng& rng, int max_attempts) {
  return make_ray(origin, max_norm(data), full, rng, max_attempts);
}

OriginSampler::OriginSampler(const Dataset& data, const ScoringDetector& full,
                             OriginWeighting weighting) {
  if (data.cols() != full.dim()) throw ShapeError("origin sampler: dimension mismatch");
  const double tau = full.threshold();
  const auto* fitted = dynamic_cast<const FittedDetector*>(&full);
  const bool cached = fitted != nullptr && fitted->train().rows() == data.rows() &&
                      fitted->train().values() == data.values();
  std::vector<double> scores;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const double s = cached ? fitted->self_scores()[i] : full.score(data.row(i));
    if (s <= tau) {
      inliers_.push_back(i);
      scores.push_back(s);
    }
  }
  if (inliers_.empty()) throw NoOriginError("no training row is a full-space inlier");
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  const double min_score = *lo;
  const double max_score = *hi;
  weights_.resize(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    switch (weighting) {
      case OriginWeighting::kIncreasing:
        weights_[i] = scores[i] - min_score + kDelta;
        break;
      case OriginWeighting::kDecreasing:
        weights_[i] = max_score - scores[i] + kDelta;
        break;
      case OriginWeighting::kUniform:
        weights_[i] = 1.0;
        break;
    }
  }
  cumulative_.resize(weights_.size());
  std::partial_sum(weights_.begin(), weights_.end(), cumulative_.begin());
}

std::size_t OriginSampler::sample(Rng& rng) const {
  const double u = uniform_real(rng, 0.0, cumulative_.back());
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  return inliers_[static_cast<std::size_t>(it - cumulative_.begin())];
}

Point select_origin(const Dataset& data, const ScoringDetector& full, Rng& rng,
                    OriginWeighting weighting) {
  OriginSampler sampler(data, full, weighting);
  const auto r = data.row(sampler.sample(rng));
  return Point(r.begin(), r.end());
}

std::optional<TInterval> cut_trick_interval(const Ray& ray, const BinaryDetector& full,
                                            int n_cuts, Rng& rng) {
  if (n_cuts < 1) throw ConfigError("n_cuts must be >= 1");
  std::vector<TInterval> changes;
  double prev_t = 0.0;
  bool prev = full.classify(ray.at(prev_t));
  for (int i = 1; i <= n_cuts; ++i) {
    const double t = i == n_cuts ? ray.length : ray.length * i / n_cuts;
    const bool check = full.classify(ray.at(t));
    if (check != prev) changes.push_back({prev_t, t});
    prev = check;
    prev_t = t;
  }
  if (changes.empty()) return std::nullopt;
  return changes[uniform_int<std::size_t>(rng, 0, changes.size() - 1)];
}

int worst_case_iters(double interval_length, double err) {
  if (!(interval_length > 0.0) || !(err > 0.0) || !(err < interval_length)) {
    throw DomainError("worst_case_iters needs 0 < err < interval_length");
  }
  const double n = (std::log(interval_length) - std::log(err)) / std::log(2.0) - 1.0;
  return std::max(0, static_cast<int>(std::lround(n)));
}

int iteration_cap(double interval_length, double err) {
  const int base = interval_length > err ? worst_case_iters(interval_length, err) : 0;
  return base + kIterationSlack;
}

std::optional<HiddenOutlier> bisect_interval(const Ray& ray, TInterval interval,
                                             const BinaryDetector& full,
                                             const BinaryDetector& ensemble, int max_iterations) {
  double a = interval.a;
  double b = interval.b;
  Point pa = ray.at(a);
  const Indication at_a = indicator_f(full, ensemble, pa);
  if (at_a.state == TriState::kDisagree) return HiddenOutlier{std::move(pa), *at_a.side(), 0};
  const TriState fa = at_a.state;
  for (int it = 1; it <= max_iterations; ++it) {
    const double c = 0.5 * (a + b);
    Point pc = ray.at(c);
    const Indication fc = indicator_f(full, ensemble, pc);
    if (fc.state == TriState::kDisagree) return HiddenOutlier{std::move(pc), *fc.side(), it};
    if (fc.state == fa) {
      a = c;
    } else {
      b = c;
    }
  }
  return std::nullopt;
}

BisectGenerator::BisectGenerator(const Dataset& data, const ScoringDetector& full,
                                 const BinaryDetector& ensemble, BisectConfig cfg)
    : data_(data),
      full_(full),
      ensemble_(ensemble),
      cfg_(cfg),
      sampler_(data, full, cfg.weighting),
      max_norm_(max_norm(data)) {
  cfg_.validate();
  if (ensemble.dim() != data.cols()) throw ShapeError("ensemble dimension mismatch");
}

std::optional<HiddenOutlier> BisectGenerator::attempt(Rng& rng, BisectStats& stats) const {
  const auto origin = data_.row(sampler_.sample(rng));
  ++stats.rays;
  auto ray = make_ray(origin, max_norm_, full_, rng, cfg_.max_ray_attempts);
  if (!ray) {
    ++stats.ray_failures;
    return std::nullopt;
  }
  auto interval = cut_trick_interval(*ray, full_, cfg_.n_cuts, rng);
  if (!interval) {
    ++stats.empty_intervals;
    return std::nullopt;
  }
  const int cap = iteration_cap(interval->b - interval->a, cfg_.err);
  auto hit = bisect_interval(*ray, *interval, full_, ensemble_, cap);
  if (!hit) ++stats.iteration_cap_hits;
  return hit;
}

HiddenOutlier BisectGenerator::generate(Rng& rng, BisectStats& stats) const {
  return *generate(rng, stats, [] { return false; });
}

HiddenOutlier bisect_one(const Dataset& data, const ScoringDetector& full,
                         const BinaryDetector& ensemble, const BisectConfig& cfg, Rng& rng) {
  BisectGenerator gen(data, full, ensemble, cfg);
  BisectStats stats;
  return gen.generate(rng, stats);
}

double measure_inference_cost(const Dataset& data, const BinaryDetector& full,
                              std::size_t probes) {
  probes = std::min(probes, data.rows());
  if (probes == 0) return 0.0;
  const std::size_t step = data.rows() / probes;
  volatile bool sink = false;
  const auto start = Clock::now();
  for (std::size_t p = 0; p < probes; ++p) sink = full.classify(data.row(p * step));
  (void)sink;
  return seconds_since(start) / static_cast<double>(probes);
}

GenerationReport generate_batch(const Dataset& data, const ScoringDetector& full,
                                const BinaryDetector& ensemble, std::size_t n_samp,
                                const BisectConfig& cfg, std::uint64_t seed,
                                double timeout_seconds, unsigned threads) {
  if (n_samp < 1) throw ConfigError("n_samp must be >= 1");
  const auto start = Clock::now();
  const auto deadline =
      start + std::chrono::duration_cast<Clock::duration>(
                  std::chrono::duration<double>(std::max(0.0, timeout_seconds)));
  std::atomic<bool> timed_out{false};
  auto deadline_reached = [&] {
    if (timed_out.load(std::memory_order_relaxed)) return true;
    if (Clock::now() >= deadline) {
      timed_out = true;
      return true;
    }
    return false;
  };

  detail::CountingScoring counted_full(full);
  detail::CountingBinary counted_ensemble(ensemble);
  BisectGenerator gen(data, counted_full, counted_ensemble, cfg);

  std::vector<std::optional<HiddenOutlier>> slots(n_samp);
  std::vector<BisectStats> stats(n_samp);
  parallel_for(n_samp, threads, [&](std::size_t i) {
    if (deadline_reached()) return;
    Rng rng = make_rng(seed, i);
    slots[i] = gen.generate(rng, stats[i], deadline_reached);
  });

  GenerationReport report;
  report.requested = n_samp;
  report.timed_out = timed_out.load();
  for (std::size_t i = 0; i < n_samp; ++i) {
    report.restarts += stats[i].restarts;
    if (!slots[i]) continue;
    report.points.push_back(std::move(slots[i]->point));
    report.sides.push_back(slots[i]->side);
    report.iterations.push_back(slots[i]->iterations);
    report.candidates.push_back(stats[i].rays);
  }
  report.full_calls = counted_full.calls();
  report.ensemble_calls = counted_ensemble.calls();
  report.wall_seconds = seconds_since(start);
  report.adversary_inference_cost = measure_inference_cost(data, full);
  return report;
}

}  // namespace hiddenout
