#include "hiddenout/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hiddenout {

Dataset::Dataset(std::size_t rows, std::size_t cols, std::vector<double> values,
                 std::optional<Labels> labels, std::vector<std::string> feature_names)
    : rows_(rows),
      cols_(cols),
      values_(std::move(values)),
      labels_(std::move(labels)),
      feature_names_(std::move(feature_names)) {
  if (rows_ == 0 || cols_ == 0) {
    throw EmptyInputError("dataset needs at least one row and one column");
  }
  if (values_.size() != rows_ * cols_) {
    throw ShapeError("dataset values size does not match rows*cols");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      std::ostringstream msg;
      msg << "non-finite value at row " << i / cols_ << ", column " << i % cols_;
      throw DomainError(msg.str());
    }
  }
  if (labels_) {
    if (labels_->size() != rows_) throw ShapeError("labels length differs from row count");
    for (auto l : *labels_) {
      if (l > 1) throw DomainError("labels must be 0 or 1");
    }
  }
  if (!feature_names_.empty() && feature_names_.size() != cols_) {
    throw ShapeError("feature_names length differs from column count");
  }
}

Dataset Dataset::from_rows(const std::vector<Point>& rows, std::optional<Labels> labels,
                           std::vector<std::string> feature_names) {
  if (rows.empty()) throw EmptyInputError("no rows");
  const std::size_t d = rows.front().size();
  std::vector<double> values;
  values.reserve(rows.size() * d);
  for (const auto& r : rows) {
    if (r.size() != d) throw ShapeError("ragged rows");
    values.insert(values.end(), r.begin(), r.end());
  }
  return Dataset(rows.size(), d, std::move(values), std::move(labels),
                 std::move(feature_names));
}

const Labels& Dataset::labels() const {
  if (!labels_) throw ConfigError("dataset has no labels");
  return *labels_;
}

std::size_t Dataset::count_label(std::uint8_t value) const {
  const auto& l = labels();
  return static_cast<std::size_t>(std::count(l.begin(), l.end(), value));
}

Dataset Dataset::select_rows(std::span<const std::size_t> indices) const {
  if (indices.empty()) throw EmptyInputError("row selection is empty");
  std::vector<double> values;
  values.reserve(indices.size() * cols_);
  std::optional<Labels> labels;
  if (labels_) labels.emplace().reserve(indices.size());
  for (auto i : indices) {
    if (i >= rows_) throw ShapeError("row index out of range");
    auto r = row(i);
    values.insert(values.end(), r.begin(), r.end());
    if (labels) labels->push_back((*labels_)[i]);
  }
  return Dataset(indices.size(), cols_, std::move(values), std::move(labels), feature_names_);
}

Dataset Dataset::with_labels(Labels labels) const {
  return Dataset(rows_, cols_, values_, std::move(labels), feature_names_);
}

Dataset Dataset::without_labels() const {
  return Dataset(rows_, cols_, values_, std::nullopt, feature_names_);
}

std::vector<Point> Dataset::to_rows() const {
  std::vector<Point> out;
  out.reserve(rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    auto r = row(i);
    out.emplace_back(r.begin(), r.end());
  }
  return out;
}

Dataset concat(const Dataset& top, const Dataset& bottom) {
  if (top.cols() != bottom.cols()) throw ShapeError("concat: column count differs");
  if (top.has_labels() != bottom.has_labels()) {
    throw ShapeError("concat: label presence differs");
  }
  std::vector<double> values = top.values();
  values.insert(values.end(), bottom.values().begin(), bottom.values().end());
  std::optional<Labels> labels;
  if (top.has_labels()) {
    labels = top.labels();
    labels->insert(labels->end(), bottom.labels().begin(), bottom.labels().end());
  }
  return Dataset(top.rows() + bottom.rows(), top.cols(), std::move(values), std::move(labels),
                 top.feature_names());
}

Subspace::Subspace(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw InvalidSubspaceError("subspace must not be empty");
  for (std::size_t i = 1; i < dims_.size(); ++i) {
    if (dims_[i] <= dims_[i - 1]) {
      throw InvalidSubspaceError("subspace dims must be strictly increasing");
    }
  }
}

Subspace Subspace::full(std::size_t d) {
  std::vector<std::size_t> dims(d);
  for (std::size_t i = 0; i < d; ++i) dims[i] = i;
  return Subspace(std::move(dims));
}

void Subspace::validate_for(std::size_t d) const {
  if (dims_.back() >= d) {
    std::ostringstream msg;
    msg << "subspace index " << dims_.back() << " out of range for d=" << d;
    throw InvalidSubspaceError(msg.str());
  }
}

Dataset project(const Dataset& data, const Subspace& s) {
  s.validate_for(data.cols());
  const std::size_t k = s.size();
  std::vector<double> values(data.rows() * k);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < k; ++j) values[i * k + j] = data.at(i, s.dims()[j]);
  }
  std::vector<std::string> names;
  if (!data.feature_names().empty()) {
    for (auto dim : s.dims()) names.push_back(data.feature_names()[dim]);
  }
  std::optional<Labels> labels;
  if (data.has_labels()) labels = data.labels();
  return Dataset(data.rows(), k, std::move(values), std::move(labels), std::move(names));
}

void project_point(PointView query, const Subspace& s, Point& out) {
  out.resize(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) out[j] = query[s.dims()[j]];
}

Point project_point(PointView query, const Subspace& s) {
  s.validate_for(query.size());
  Point out;
  project_point(query, s, out);
  return out;
}

double squared_distance(PointView a, PointView b) {
  if (a.size() != b.size()) throw ShapeError("distance: dimension mismatch");
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    acc += diff * diff;
  }
  return acc;
}

double euclidean_distance(PointView a, PointView b) { return std::sqrt(squared_distance(a, b)); }

double norm(PointView a) {
  double acc = 0.0;
  for (double v : a) acc += v * v;
  return std::sqrt(acc);
}

double max_norm(const Dataset& data) {
  double best = 0.0;
  for (std::size_t i = 0; i < data.rows(); ++i) best = std::max(best, norm(data.row(i)));
  return best;
}

Point convex_point(PointView x, PointView y, double t) {
  if (x.size() != y.size()) throw ShapeError("convex_point: dimension mismatch");
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("convex_point: t must lie in [0, 1]");
  Point out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = t * y[j] + (1.0 - t) * x[j];
  return out;
}

}  // namespace hiddenout
