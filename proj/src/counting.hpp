#pragma once

#include <atomic>

#include "hiddenout/detectors.hpp"

namespace hiddenout::detail {

// Pass-through wrappers that count classify calls made by a generator.

class CountingScoring final : public ScoringDetector {
 public:
  explicit CountingScoring(const ScoringDetector& inner) : inner_(inner) {}

  std::size_t dim() const override { return inner_.dim(); }
  double score(PointView q) const override { return inner_.score(q); }
  double threshold() const override { return inner_.threshold(); }
  bool classify(PointView q) const override {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return inner_.classify(q);
  }
  long calls() const { return calls_.load(); }

 private:
  const ScoringDetector& inner_;
  mutable std::atomic<long> calls_{0};
};

class CountingBinary final : public BinaryDetector {
 public:
  explicit CountingBinary(const BinaryDetector& inner) : inner_(inner) {}

  std::size_t dim() const override { return inner_.dim(); }
  bool classify(PointView q) const override {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return inner_.classify(q);
  }
  long calls() const { return calls_.load(); }

 private:
  const BinaryDetector& inner_;
  mutable std::atomic<long> calls_{0};
};

}  // namespace hiddenout::detail
