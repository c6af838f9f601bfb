#pragma once

#include <cstdint>
#include <vector>

#include "hiddenout/core.hpp"

namespace hiddenout {

struct ForestSpec {
  std::size_t n_trees = 500;
  /// Features tried per split; 0 selects floor(sqrt(d)).
  std::size_t mtry = 0;
  std::size_t min_leaf = 1;
  std::uint64_t seed = 0;

  std::size_t resolved_mtry(std::size_t d) const;
  void validate(std::size_t d) const;
};

/// Binary random forest of CART trees: bootstrap of n rows per tree, best Gini
/// split over mtry features drawn per node, grown to purity or min_leaf.
class RandomForest {
 public:
  struct Node {
    // Internal: go left iff x[feature] <= threshold. Leaf: feature == kLeaf.
    static constexpr std::uint32_t kLeaf = 0xffffffffu;
    std::uint32_t feature = kLeaf;
    double threshold = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::uint8_t vote = 0;
  };
  using Tree = std::vector<Node>;

  static RandomForest train(const Dataset& data, const ForestSpec& spec, unsigned threads = 1);

  /// Fraction of trees voting for class 1.
  double proba(PointView query) const;
  std::uint8_t tree_vote(std::size_t tree, PointView query) const;

  std::size_t n_trees() const noexcept { return trees_.size(); }
  std::size_t dim() const noexcept { return d_; }
  const std::vector<Tree>& trees() const noexcept { return trees_; }

 private:
  RandomForest(std::size_t d, std::vector<Tree> trees) : d_(d), trees_(std::move(trees)) {}

  std::size_t d_;
  std::vector<Tree> trees_;
};

/// Throws TrainingError unless both classes are present.
RandomForest forest_train(const Dataset& train, const ForestSpec& spec, unsigned threads = 1);
double forest_proba(const RandomForest& model, PointView query);

}  // namespace hiddenout
