#pragma once

#include <cstdint>
#include <vector>

#include "hiddenout/bisect.hpp"

namespace hiddenout {

struct HiddenConfig {
  double epsilon = 0.1;
  double timeout_seconds = 1800.0;

  void validate() const;
};

/// Largest per-dimension range (column max - column min) of the data.
double max_range(const Dataset& data);

/// Rejection sampler: each candidate is uniform in the axis-aligned cube of
/// side epsilon * max_range centered at a uniformly chosen training row and
/// is accepted iff the full-space detector and the ensemble disagree.
GenerationReport hidden_generate(const Dataset& data, const BinaryDetector& full,
                                 const BinaryDetector& ensemble, std::size_t n_samp,
                                 const HiddenConfig& cfg, std::uint64_t seed,
                                 unsigned threads = 1);

struct HyperboxResult {
  std::vector<Point> points;
  std::vector<long> candidates;
  double wall_seconds = 0.0;
  bool timed_out = false;

  long total_candidates() const;
};

/// Uniform samples from the bounding box of the data, kept iff the full-space
/// detector flags them as outliers.
HyperboxResult hyperbox_generate(const Dataset& data, const BinaryDetector& full,
                                 std::size_t n_samp, std::uint64_t seed,
                                 double timeout_seconds = 1800.0, unsigned threads = 1);

}  // namespace hiddenout
