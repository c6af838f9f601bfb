#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hiddenout/core.hpp"

namespace hiddenout {

/// Anything that maps a point to a binary verdict (true = outlier).
class BinaryDetector {
 public:
  virtual ~BinaryDetector() = default;

  /// Dimension of the points this detector accepts.
  virtual std::size_t dim() const = 0;
  virtual bool classify(PointView query) const = 0;
};

/// A detector of the form "score > threshold". Its acceptance region
/// {x : score(x) <= threshold} is closed.
class ScoringDetector : public BinaryDetector {
 public:
  virtual double score(PointView query) const = 0;
  virtual double threshold() const = 0;

  bool classify(PointView query) const override { return score(query) > threshold(); }
};

enum class DetectorKind { kLof, kKnn };

std::string to_string(DetectorKind kind);
DetectorKind parse_detector_kind(const std::string& name);

struct DetectorSpec {
  DetectorKind kind = DetectorKind::kLof;
  std::size_t k = 20;
  double contamination = 0.1;

  static DetectorSpec lof(std::size_t k = 20, double contamination = 0.1) {
    return {DetectorKind::kLof, k, contamination};
  }
  static DetectorSpec knn(std::size_t k = 5, double contamination = 0.1) {
    return {DetectorKind::kKnn, k, contamination};
  }

  /// Checks k >= 1 and contamination in (0, 0.5].
  void validate() const;
};

/// LOF or kNN-distance detector fitted on a training set, with the binary
/// threshold calibrated from the training scores. Immutable after fitting.
class FittedDetector final : public ScoringDetector {
 public:
  const DetectorSpec& spec() const noexcept { return spec_; }
  const Dataset& train() const noexcept { return *train_; }
  std::size_t dim() const override { return train_->cols(); }
  double threshold() const override { return threshold_; }
  double score(PointView query) const override;

  /// Leave-self-out scores of the training rows used for calibration.
  const std::vector<double>& training_scores() const noexcept { return training_scores_; }
  /// score(train().row(i)) for every training row, computed while fitting.
  const std::vector<double>& self_scores() const noexcept { return self_scores_; }
  /// k-distance of each training row (k-th nearest other row).
  const std::vector<double>& k_distances() const noexcept { return k_distance_; }
  /// Local reachability density of each training row; +inf when every
  /// reachability distance in its neighborhood is zero.
  const std::vector<double>& lrd() const noexcept { return lrd_; }

 private:
  friend FittedDetector calibrate_threshold(const DetectorSpec& spec, const Dataset& data);
  friend double knn_score(const FittedDetector& fitted, PointView query);
  friend double lof_score(const FittedDetector& fitted, PointView query);

  FittedDetector(DetectorSpec spec, std::shared_ptr<const Dataset> train)
      : spec_(spec), train_(std::move(train)) {}

  DetectorSpec spec_;
  std::shared_ptr<const Dataset> train_;
  double threshold_ = 0.0;
  std::vector<double> training_scores_;
  std::vector<double> self_scores_;
  std::vector<double> k_distance_;
  std::vector<double> lrd_;
};

/// Distance from query to its k-th nearest training row.
double knn_score(const FittedDetector& fitted, PointView query);

/// Local outlier factor of query against the training set.
double lof_score(const FittedDetector& fitted, PointView query);

/// Fits the detector on data and sets the threshold to the (1 - contamination)
/// linear-interpolation quantile of the leave-self-out training scores.
/// Throws InsufficientDataError when k >= n.
FittedDetector calibrate_threshold(const DetectorSpec& spec, const Dataset& data);

inline bool classify(const BinaryDetector& detector, PointView query) {
  return detector.classify(query);
}

/// Detector given by an arbitrary scoring function and a threshold.
class FunctionDetector final : public ScoringDetector {
 public:
  using ScoreFn = std::function<double(PointView)>;

  FunctionDetector(std::size_t dim, ScoreFn fn, double threshold)
      : dim_(dim), fn_(std::move(fn)), threshold_(threshold) {}

  std::size_t dim() const override { return dim_; }
  double score(PointView query) const override { return fn_(query); }
  double threshold() const override { return threshold_; }

 private:
  std::size_t dim_;
  ScoreFn fn_;
  double threshold_;
};

}  // namespace hiddenout
