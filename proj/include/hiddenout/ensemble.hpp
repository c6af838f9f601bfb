#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hiddenout/core.hpp"
#include "hiddenout/detectors.hpp"

namespace hiddenout {

/// Which side of the hidden region a point falls on.
///   H1: full-space inlier, ensemble outlier.
///   H2: full-space outlier, ensemble inlier.
enum class Side { kH1, kH2 };

std::string to_string(Side side);

/// Subspaces for the ensemble. Exhaustive (all non-empty proper subsets,
/// ordered by size then lexicographically) when 2^d - 2 <= budget; otherwise
/// `budget` distinct subsets drawn by feature bagging.
std::vector<Subspace> select_subspaces(std::size_t d, std::size_t budget, std::uint64_t seed);

/// Max-aggregated ensemble of per-subspace detectors. A point is an ensemble
/// outlier iff at least one member flags its projection.
class SubspaceEnsemble final : public BinaryDetector {
 public:
  struct Member {
    Subspace subspace;
    std::shared_ptr<const BinaryDetector> detector;
  };

  SubspaceEnsemble(std::size_t d, std::vector<Member> members, std::size_t budget);

  std::size_t dim() const override { return d_; }
  /// Short-circuits on the first member that returns 1.
  bool classify(PointView query) const override;

  const std::vector<Member>& members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  std::size_t budget() const noexcept { return budget_; }

 private:
  std::size_t d_;
  std::vector<Member> members_;
  std::size_t budget_;
};

/// Fits calibrate_threshold(spec, project(data, s)) for every subspace.
SubspaceEnsemble fit_ensemble(const Dataset& data, std::span<const Subspace> subspaces,
                              const DetectorSpec& spec, unsigned threads = 1);

inline bool ensemble_classify(const SubspaceEnsemble& e, PointView query) {
  return e.classify(query);
}

struct Indication {
  TriState state = TriState::kBothInlier;
  bool full_verdict = false;
  bool ensemble_verdict = false;

  /// Set iff state == kDisagree.
  std::optional<Side> side() const;
};

/// Tri-state disagreement indicator between a full-space detector and an
/// ensemble: +1 both outlier, 0 disagreement, -1 both inlier.
Indication indicator_f(const BinaryDetector& full, const BinaryDetector& ensemble,
                       PointView query);

}  // namespace hiddenout
