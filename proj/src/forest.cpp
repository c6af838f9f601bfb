#include "hiddenout/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hiddenout/parallel.hpp"
#include "hiddenout/random.hpp"

namespace hiddenout {

namespace {

struct Candidate {
  std::uint32_t feature = RandomForest::Node::kLeaf;
  double threshold = 0.0;
  double score = -1.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const ForestSpec& spec, std::size_t mtry, Rng rng)
      : data_(data), labels_(data.labels()), spec_(spec), mtry_(mtry), rng_(std::move(rng)) {}

  RandomForest::Tree build() {
    const std::size_t n = data_.rows();
    std::vector<std::size_t> sample(n);
    for (auto& s : sample) s = uniform_int<std::size_t>(rng_, 0, n - 1);

    RandomForest::Tree tree;
    tree.emplace_back();
    struct Work {
      std::uint32_t node;
      std::size_t begin;
      std::size_t end;
    };
    std::vector<Work> stack{{0, 0, n}};
    features_.resize(data_.cols());
    while (!stack.empty()) {
      const Work w = stack.back();
      stack.pop_back();
      std::size_t ones = 0;
      for (std::size_t i = w.begin; i < w.end; ++i) ones += labels_[sample[i]];
      const std::size_t size = w.end - w.begin;
      const bool pure = ones == 0 || ones == size;
      Candidate best;
      if (!pure && size >= 2 * spec_.min_leaf) best = best_split(sample, w.begin, w.end);
      if (best.feature == RandomForest::Node::kLeaf) {
        tree[w.node].vote = leaf_vote(ones, size);
        continue;
      }
      const auto mid = std::partition(
          sample.begin() + static_cast<std::ptrdiff_t>(w.begin),
          sample.begin() + static_cast<std::ptrdiff_t>(w.end),
          [&](std::size_t r) { return data_.at(r, best.feature) <= best.threshold; });
      const auto split = static_cast<std::size_t>(mid - sample.begin());
      const auto left = static_cast<std::uint32_t>(tree.size());
      tree.emplace_back();
      tree.emplace_back();
      tree[w.node].feature = best.feature;
      tree[w.node].threshold = best.threshold;
      tree[w.node].left = left;
      tree[w.node].right = left + 1;
      stack.push_back({left + 1, split, w.end});
      stack.push_back({left, w.begin, split});
    }
    return tree;
  }

 private:
  std::uint8_t leaf_vote(std::size_t ones, std::size_t size) {
    if (2 * ones > size) return 1;
    if (2 * ones < size) return 0;
    return static_cast<std::uint8_t>(uniform_int<int>(rng_, 0, 1));
  }

  Candidate best_split(const std::vector<std::size_t>& sample, std::size_t begin,
                       std::size_t end) {
    std::iota(features_.begin(), features_.end(), std::size_t{0});
    for (std::size_t i = 0; i < mtry_; ++i) {
      const auto j = uniform_int<std::size_t>(rng_, i, features_.size() - 1);
      std::swap(features_[i], features_[j]);
    }
    const std::size_t n = end - begin;
    Candidate best;
    for (std::size_t f = 0; f < mtry_; ++f) {
      const auto feature = features_[f];
      column_.clear();
      for (std::size_t i = begin; i < end; ++i) {
        column_.emplace_back(data_.at(sample[i], feature), labels_[sample[i]]);
      }
      std::sort(column_.begin(), column_.end());
      double total1 = 0.0;
      for (const auto& c : column_) total1 += c.second;
      const double total0 = static_cast<double>(n) - total1;
      double left1 = 0.0;
      for (std::size_t i = 1; i < n; ++i) {
        left1 += column_[i - 1].second;
        if (i < spec_.min_leaf || n - i < spec_.min_leaf) continue;
        if (!(column_[i - 1].first < column_[i].first)) continue;
        const double nl = static_cast<double>(i);
        const double nr = static_cast<double>(n - i);
        const double left0 = nl - left1;
        const double right1 = total1 - left1;
        const double right0 = total0 - left0;
        // Maximizing this is equivalent to minimizing weighted Gini impurity.
        const double score =
            (left0 * left0 + left1 * left1) / nl + (right0 * right0 + right1 * right1) / nr;
        if (score > best.score) {
          double thr = 0.5 * (column_[i - 1].first + column_[i].first);
          if (!(thr < column_[i].first)) thr = column_[i - 1].first;
          best = {static_cast<std::uint32_t>(feature), thr, score};
        }
      }
    }
    return best;
  }

  const Dataset& data_;
  const Labels& labels_;
  const ForestSpec& spec_;
  std::size_t mtry_;
  Rng rng_;
  std::vector<std::size_t> features_;
  std::vector<std::pair<double, std::uint8_t>> column_;
};

}  // namespace

std::size_t ForestSpec::resolved_mtry(std::size_t d) const {
  if (mtry != 0) return mtry;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(d)))));
}

void ForestSpec::validate(std::size_t d) const {
  if (n_trees < 1) throw ConfigError("forest n_trees must be >= 1");
  if (min_leaf < 1) throw ConfigError("forest min_leaf must be >= 1");
  const auto m = resolved_mtry(d);
  if (m < 1 || m > d) throw ConfigError("forest mtry must lie in [1, d]");
}

RandomForest RandomForest::train(const Dataset& data, const ForestSpec& spec, unsigned threads) {
  spec.validate(data.cols());
  if (!data.has_labels()) throw TrainingError("forest training needs labels");
  const auto ones = data.count_label(1);
  if (ones == 0 || ones == data.rows()) throw TrainingError("forest training needs both classes");
  const auto mtry = spec.resolved_mtry(data.cols());
  std::vector<Tree> trees(spec.n_trees);
  parallel_for(spec.n_trees, threads, [&](std::size_t t) {
    TreeBuilder builder(data, spec, mtry, make_rng(spec.seed, t));
    trees[t] = builder.build();
  });
  return RandomForest(data.cols(), std::move(trees));
}

std::uint8_t RandomForest::tree_vote(std::size_t tree, PointView query) const {
  const Tree& nodes = trees_[tree];
  std::uint32_t at = 0;
  while (nodes[at].feature != Node::kLeaf) {
    at = query[nodes[at].feature] <= nodes[at].threshold ? nodes[at].left : nodes[at].right;
  }
  return nodes[at].vote;
}

double RandomForest::proba(PointView query) const {
  if (query.size() != d_) throw ShapeError("forest query dimension mismatch");
  std::size_t votes = 0;
  for (std::size_t t = 0; t < trees_.size(); ++t) votes += tree_vote(t, query);
  return static_cast<double>(votes) / static_cast<double>(trees_.size());
}

RandomForest forest_train(const Dataset& train, const ForestSpec& spec, unsigned threads) {
  return RandomForest::train(train, spec, threads);
}

double forest_proba(const RandomForest& model, PointView query) { return model.proba(query); }

}  // namespace hiddenout
