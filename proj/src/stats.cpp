#include "hiddenout/stats.hpp"

#include <algorithm>
#include <cmath>

#include "hiddenout/errors.hpp"

namespace hiddenout {

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw EmptyInputError("quantile of empty range");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0 || sorted[lo] == sorted[hi]) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double quantile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, p);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

FiveNumber five_number(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  FiveNumber out;
  out.min = quantile_sorted(values, 0.0);
  out.q1 = quantile_sorted(values, 0.25);
  out.q2 = quantile_sorted(values, 0.5);
  out.q3 = quantile_sorted(values, 0.75);
  out.max = quantile_sorted(values, 1.0);
  return out;
}

}  // namespace hiddenout
