#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hiddenout/errors.hpp"

namespace hiddenout {

using Point = std::vector<double>;
using PointView = std::span<const double>;
using Labels = std::vector<std::uint8_t>;

/// Dense row-major n x d matrix of finite reals with optional 0/1 outlier
/// labels. Immutable once built; every accessor is const.
class Dataset {
 public:
  Dataset(std::size_t rows, std::size_t cols, std::vector<double> values,
          std::optional<Labels> labels = std::nullopt,
          std::vector<std::string> feature_names = {});

  static Dataset from_rows(const std::vector<Point>& rows,
                           std::optional<Labels> labels = std::nullopt,
                           std::vector<std::string> feature_names = {});

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  PointView row(std::size_t i) const {
    return PointView(values_.data() + i * cols_, cols_);
  }
  double at(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
  const std::vector<double>& values() const noexcept { return values_; }

  bool has_labels() const noexcept { return labels_.has_value(); }
  /// Throws ConfigError when the dataset carries no labels.
  const Labels& labels() const;
  std::size_t count_label(std::uint8_t value) const;

  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }

  Dataset select_rows(std::span<const std::size_t> indices) const;
  Dataset with_labels(Labels labels) const;
  Dataset without_labels() const;

  std::vector<Point> to_rows() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
  std::optional<Labels> labels_;
  std::vector<std::string> feature_names_;
};

/// Row-wise concatenation; both sides must agree on column count and on
/// whether labels are present.
Dataset concat(const Dataset& top, const Dataset& bottom);

/// A strictly increasing, non-empty list of feature indices.
class Subspace {
 public:
  explicit Subspace(std::vector<std::size_t> dims);

  static Subspace full(std::size_t d);

  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return dims_.size(); }

  /// Throws InvalidSubspaceError if any index is >= d.
  void validate_for(std::size_t d) const;
  bool is_full(std::size_t d) const noexcept { return dims_.size() == d; }

  friend bool operator==(const Subspace&, const Subspace&) = default;
  friend auto operator<=>(const Subspace&, const Subspace&) = default;

 private:
  std::vector<std::size_t> dims_;
};

/// Codomain of the disagreement indicator.
enum class TriState : std::int8_t {
  kBothInlier = -1,
  kDisagree = 0,
  kBothOutlier = 1,
};

inline int to_int(TriState s) noexcept { return static_cast<int>(s); }

Dataset project(const Dataset& data, const Subspace& s);

/// Writes query|s into out (resized to |s|).
void project_point(PointView query, const Subspace& s, Point& out);
Point project_point(PointView query, const Subspace& s);

double max_norm(const Dataset& data);

/// t*y + (1-t)*x.
Point convex_point(PointView x, PointView y, double t);

double euclidean_distance(PointView a, PointView b);
double squared_distance(PointView a, PointView b);
double norm(PointView a);

}  // namespace hiddenout
