#include "hiddenout/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hiddenout/stats.hpp"

namespace hiddenout {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void distances_to_rows(const Dataset& train, PointView query, std::vector<double>& out) {
  const std::size_t n = train.rows();
  const std::size_t d = train.cols();
  out.resize(n);
  const double* base = train.values().data();
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = base + i * d;
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = query[j] - r[j];
      acc += diff * diff;
    }
    out[i] = std::sqrt(acc);
  }
}

// k-th smallest value (1-based k) of dist; scratch is clobbered.
double kth_smallest(const std::vector<double>& dist, std::size_t k, std::vector<double>& scratch) {
  scratch.assign(dist.begin(), dist.end());
  auto nth = scratch.begin() + static_cast<std::ptrdiff_t>(k - 1);
  std::nth_element(scratch.begin(), nth, scratch.end());
  return *nth;
}

void check_query(const FittedDetector& fitted, PointView query) {
  if (query.size() != fitted.dim()) {
    std::ostringstream msg;
    msg << "query has dimension " << query.size() << ", detector expects " << fitted.dim();
    throw ShapeError(msg.str());
  }
}

// Ratio of mean neighbor lrd to own lrd under the infinite-density convention.
double lof_ratio(double neighbor_lrd_sum, std::size_t neighbors, double own_lrd) {
  const double mean = neighbor_lrd_sum / static_cast<double>(neighbors);
  if (std::isinf(own_lrd)) return std::isinf(mean) ? 1.0 : 0.0;
  if (std::isinf(mean)) return kInf;
  return mean / own_lrd;
}

struct Scratch {
  std::vector<double> dist;
  std::vector<double> sorted;
};

Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

}  // namespace

std::string to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::kLof:
      return "lof";
    case DetectorKind::kKnn:
      return "knn";
  }
  return "unknown";
}

DetectorKind parse_detector_kind(const std::string& name) {
  if (name == "lof" || name == "LOF") return DetectorKind::kLof;
  if (name == "knn" || name == "KNN") return DetectorKind::kKnn;
  throw ConfigError("unknown detector kind '" + name + "' (expected lof or knn)");
}

void DetectorSpec::validate() const {
  if (k < 1) throw ConfigError("detector k must be >= 1");
  if (!(contamination > 0.0 && contamination <= 0.5)) {
    throw ConfigError("detector contamination must lie in (0, 0.5]");
  }
}

double FittedDetector::score(PointView query) const {
  return spec_.kind == DetectorKind::kLof ? lof_score(*this, query) : knn_score(*this, query);
}

double knn_score(const FittedDetector& fitted, PointView query) {
  check_query(fitted, query);
  auto& s = scratch();
  distances_to_rows(fitted.train(), query, s.dist);
  return kth_smallest(s.dist, fitted.spec().k, s.sorted);
}

double lof_score(const FittedDetector& fitted, PointView query) {
  check_query(fitted, query);
  if (fitted.lrd_.empty()) throw ConfigError("lof_score called on a detector not fitted as LOF");
  auto& s = scratch();
  distances_to_rows(fitted.train(), query, s.dist);
  const double kdist = kth_smallest(s.dist, fitted.spec().k, s.sorted);

  double reach_sum = 0.0;
  double lrd_sum = 0.0;
  std::size_t count = 0;
  for (std::size_t o = 0; o < s.dist.size(); ++o) {
    if (s.dist[o] > kdist) continue;
    reach_sum += std::max(fitted.k_distance_[o], s.dist[o]);
    lrd_sum += fitted.lrd_[o];
    ++count;
  }
  const double own_lrd = reach_sum == 0.0 ? kInf : static_cast<double>(count) / reach_sum;
  return lof_ratio(lrd_sum, count, own_lrd);
}

FittedDetector calibrate_threshold(const DetectorSpec& spec, const Dataset& data) {
  spec.validate();
  const std::size_t n = data.rows();
  if (spec.k >= n) {
    std::ostringstream msg;
    msg << "detector needs more than k=" << spec.k << " training rows, got " << n;
    throw InsufficientDataError(msg.str());
  }

  FittedDetector fitted(spec, std::make_shared<const Dataset>(data));
  const Dataset& train = fitted.train();

  // Leave-self-out neighborhoods of the training rows.
  std::vector<std::vector<std::uint32_t>> neighbors(
      spec.kind == DetectorKind::kLof ? n : 0);
  std::vector<std::vector<double>> neighbor_dist(neighbors.size());
  // k-distance of a training row when it is queried and counts as its own neighbor.
  std::vector<double> self_kdist(n);
  fitted.k_distance_.resize(n);
  std::vector<double> dist;
  std::vector<double> sorted;
  for (std::size_t i = 0; i < n; ++i) {
    distances_to_rows(train, train.row(i), dist);
    dist[i] = kInf;
    const double kdist = kth_smallest(dist, spec.k, sorted);
    fitted.k_distance_[i] = kdist;
    self_kdist[i] = spec.k == 1 ? 0.0 : *std::max_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(spec.k - 1));
    if (spec.kind == DetectorKind::kLof) {
      for (std::size_t j = 0; j < n; ++j) {
        if (dist[j] <= kdist) {
          neighbors[i].push_back(static_cast<std::uint32_t>(j));
          neighbor_dist[i].push_back(dist[j]);
        }
      }
    }
  }

  if (spec.kind == DetectorKind::kKnn) {
    fitted.training_scores_ = fitted.k_distance_;
    fitted.self_scores_ = self_kdist;
  } else {
    fitted.lrd_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double reach_sum = 0.0;
      const auto r = train.row(i);
      for (auto o : neighbors[i]) {
        reach_sum += std::max(fitted.k_distance_[o], euclidean_distance(r, train.row(o)));
      }
      fitted.lrd_[i] =
          reach_sum == 0.0 ? kInf : static_cast<double>(neighbors[i].size()) / reach_sum;
    }
    fitted.training_scores_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double lrd_sum = 0.0;
      for (auto o : neighbors[i]) lrd_sum += fitted.lrd_[o];
      fitted.training_scores_[i] = lof_ratio(lrd_sum, neighbors[i].size(), fitted.lrd_[i]);
    }
    // Same accumulation order as lof_score on the row itself.
    fitted.self_scores_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double reach_sum = 0.0;
      double lrd_sum = 0.0;
      std::size_t count = 0;
      bool self_done = false;
      auto add_self = [&] {
        reach_sum += fitted.k_distance_[i];
        lrd_sum += fitted.lrd_[i];
        ++count;
        self_done = true;
      };
      for (std::size_t m = 0; m < neighbors[i].size(); ++m) {
        const auto o = neighbors[i][m];
        if (!self_done && o > i) add_self();
        if (neighbor_dist[i][m] > self_kdist[i]) continue;
        reach_sum += std::max(fitted.k_distance_[o], neighbor_dist[i][m]);
        lrd_sum += fitted.lrd_[o];
        ++count;
      }
      if (!self_done) add_self();
      const double own_lrd = reach_sum == 0.0 ? kInf : static_cast<double>(count) / reach_sum;
      fitted.self_scores_[i] = lof_ratio(lrd_sum, count, own_lrd);
    }
  }

  double tau = quantile(fitted.training_scores_, 1.0 - spec.contamination);
  if (!std::isfinite(tau)) {
    // Infinite LOF scores occur next to exact-duplicate clusters; keep the
    // threshold at the largest finite training score.
    tau = 0.0;
    for (double v : fitted.training_scores_) {
      if (std::isfinite(v)) tau = std::max(tau, v);
    }
  }
  fitted.threshold_ = tau;
  return fitted;
}

}  // namespace hiddenout
