#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hiddenout {

/// Rank-based ROC AUC (Mann-Whitney U / (n1 * n0)) with mid-ranks for ties.
/// Labels are 0/1 with 1 the positive (outlier) class.
double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

enum class Alternative { kGreater, kLess, kTwoSided };

std::string to_string(Alternative a);

struct WilcoxonResult {
  /// Sum of ranks of the positive differences x - y.
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_effective = 0;
  bool exact = false;
};

/// Paired Wilcoxon signed-rank test on x - y. Zero differences are dropped;
/// tied |differences| get mid-ranks. Exact null distribution (conditional on
/// the observed ranks) for n_effective <= 20, tie-corrected normal
/// approximation above. With no non-zero difference the p-value is 1.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y,
                                    Alternative alternative = Alternative::kGreater);

}  // namespace hiddenout
