#include "hiddenout/baselines.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>

#include "counting.hpp"
#include "hiddenout/parallel.hpp"

namespace hiddenout {

namespace {

using Clock = std::chrono::steady_clock;

struct Deadline {
  explicit Deadline(double timeout_seconds)
      : at(Clock::now() + std::chrono::duration_cast<Clock::duration>(
                              std::chrono::duration<double>(std::max(0.0, timeout_seconds)))) {}

  bool reached() {
    if (hit.load(std::memory_order_relaxed)) return true;
    if (Clock::now() >= at) {
      hit = true;
      return true;
    }
    return false;
  }

  Clock::time_point at;
  std::atomic<bool> hit{false};
};

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
};

Box bounding_box(const Dataset& data) {
  Box box{Point(data.row(0).begin(), data.row(0).end()),
          Point(data.row(0).begin(), data.row(0).end())};
  for (std::size_t i = 1; i < data.rows(); ++i) {
    const auto r = data.row(i);
    for (std::size_t j = 0; j < data.cols(); ++j) {
      box.lo[j] = std::min(box.lo[j], r[j]);
      box.hi[j] = std::max(box.hi[j], r[j]);
    }
  }
  return box;
}

// Uniform in [lo, hi]; a zero-width side stays constant.
double uniform_side(Rng& rng, double lo, double hi) {
  return hi > lo ? uniform_real(rng, lo, hi) : lo;
}

}  // namespace

void HiddenConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in (0, 1]");
  if (!(timeout_seconds >= 0.0)) throw ConfigError("timeout must be >= 0");
}

double max_range(const Dataset& data) {
  const Box box = bounding_box(data);
  double best = 0.0;
  for (std::size_t j = 0; j < data.cols(); ++j) best = std::max(best, box.hi[j] - box.lo[j]);
  return best;
}

GenerationReport hidden_generate(const Dataset& data, const BinaryDetector& full,
                                 const BinaryDetector& ensemble, std::size_t n_samp,
                                 const HiddenConfig& cfg, std::uint64_t seed, unsigned threads) {
  cfg.validate();
  if (n_samp < 1) throw ConfigError("n_samp must be >= 1");
  if (full.dim() != data.cols() || ensemble.dim() != data.cols()) {
    throw ShapeError("hidden_generate: detector dimension mismatch");
  }
  const auto start = Clock::now();
  Deadline deadline(cfg.timeout_seconds);
  detail::CountingBinary counted_full(full);
  detail::CountingBinary counted_ensemble(ensemble);

  const double half = 0.5 * cfg.epsilon * max_range(data);
  const std::size_t d = data.cols();

  struct Slot {
    std::optional<Point> point;
    Side side = Side::kH1;
    long candidates = 0;
  };
  std::vector<Slot> slots(n_samp);
  parallel_for(n_samp, threads, [&](std::size_t i) {
    Rng rng = make_rng(seed, i);
    Point candidate(d);
    while (!deadline.reached()) {
      const auto center = data.row(uniform_int<std::size_t>(rng, 0, data.rows() - 1));
      for (std::size_t j = 0; j < d; ++j) {
        candidate[j] = uniform_side(rng, center[j] - half, center[j] + half);
      }
      ++slots[i].candidates;
      const Indication f = indicator_f(counted_full, counted_ensemble, candidate);
      if (f.state == TriState::kDisagree) {
        slots[i].point = candidate;
        slots[i].side = *f.side();
        return;
      }
    }
  });

  GenerationReport report;
  report.requested = n_samp;
  report.timed_out = deadline.hit.load();
  for (auto& s : slots) {
    if (!s.point) continue;
    report.points.push_back(std::move(*s.point));
    report.sides.push_back(s.side);
    report.iterations.push_back(0);
    report.candidates.push_back(s.candidates);
  }
  report.full_calls = counted_full.calls();
  report.ensemble_calls = counted_ensemble.calls();
  report.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  report.adversary_inference_cost = measure_inference_cost(data, full);
  return report;
}

long HyperboxResult::total_candidates() const {
  return std::accumulate(candidates.begin(), candidates.end(), 0L);
}

HyperboxResult hyperbox_generate(const Dataset& data, const BinaryDetector& full,
                                 std::size_t n_samp, std::uint64_t seed, double timeout_seconds,
                                 unsigned threads) {
  if (n_samp < 1) throw ConfigError("n_samp must be >= 1");
  if (full.dim() != data.cols()) throw ShapeError("hyperbox_generate: dimension mismatch");
  const auto start = Clock::now();
  Deadline deadline(timeout_seconds);
  const Box box = bounding_box(data);
  const std::size_t d = data.cols();

  std::vector<std::optional<Point>> slots(n_samp);
  std::vector<long> tried(n_samp, 0);
  parallel_for(n_samp, threads, [&](std::size_t i) {
    Rng rng = make_rng(seed, i);
    Point candidate(d);
    while (!deadline.reached()) {
      for (std::size_t j = 0; j < d; ++j) candidate[j] = uniform_side(rng, box.lo[j], box.hi[j]);
      ++tried[i];
      if (full.classify(candidate)) {
        slots[i] = candidate;
        return;
      }
    }
  });

  HyperboxResult out;
  out.timed_out = deadline.hit.load();
  for (std::size_t i = 0; i < n_samp; ++i) {
    if (!slots[i]) continue;
    out.points.push_back(std::move(*slots[i]));
    out.candidates.push_back(tried[i]);
  }
  out.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

}  // namespace hiddenout
