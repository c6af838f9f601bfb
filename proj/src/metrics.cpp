#include "hiddenout/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hiddenout/errors.hpp"

namespace hiddenout {

namespace {

constexpr std::size_t kExactLimit = 20;

// Mid-ranks (1-based) of values, doubled so they stay integral.
std::vector<long> doubled_midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<long> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // positions i+1 .. j share rank (i+1+j)/2; doubled: i+1+j
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = static_cast<long>(i + 1 + j);
    i = j;
  }
  return ranks;
}

double normal_upper(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

std::string to_string(Alternative a) {
  switch (a) {
    case Alternative::kGreater:
      return "greater";
    case Alternative::kLess:
      return "less";
    case Alternative::kTwoSided:
      return "two_sided";
  }
  return "unknown";
}

double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw ShapeError("roc_auc: length mismatch");
  std::size_t n1 = 0;
  for (auto l : labels) {
    if (l > 1) throw DomainError("roc_auc: labels must be 0 or 1");
    n1 += l;
  }
  const std::size_t n0 = labels.size() - n1;
  if (n1 == 0 || n0 == 0) throw UndefinedMetricError("roc_auc needs both classes");
  const auto ranks = doubled_midranks(scores);
  long double rank_sum2 = 0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (labels[i]) rank_sum2 += ranks[i];
  }
  const long double u = rank_sum2 / 2.0L - static_cast<long double>(n1) * (n1 + 1) / 2.0L;
  return static_cast<double>(u / (static_cast<long double>(n1) * static_cast<long double>(n0)));
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y,
                                    Alternative alternative) {
  if (x.size() != y.size()) throw ShapeError("wilcoxon: length mismatch");
  if (x.empty()) throw EmptyInputError("wilcoxon needs at least one pair");
  std::vector<double> abs_diff;
  std::vector<bool> positive;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    if (d == 0.0) continue;
    abs_diff.push_back(std::fabs(d));
    positive.push_back(d > 0.0);
  }
  WilcoxonResult out;
  out.n_effective = abs_diff.size();
  if (abs_diff.empty()) return out;

  const auto ranks2 = doubled_midranks(abs_diff);
  long w2 = 0;
  for (std::size_t i = 0; i < ranks2.size(); ++i) {
    if (positive[i]) w2 += ranks2[i];
  }
  out.statistic = static_cast<double>(w2) / 2.0;
  const std::size_t n = abs_diff.size();

  double p_greater = 0.0;
  double p_less = 0.0;
  if (n <= kExactLimit) {
    out.exact = true;
    // Counts of each attainable doubled rank sum over the 2^n sign patterns.
    const long total2 = std::accumulate(ranks2.begin(), ranks2.end(), 0L);
    std::vector<double> count(static_cast<std::size_t>(total2) + 1, 0.0);
    count[0] = 1.0;
    long reach = 0;
    for (auto r : ranks2) {
      for (long s = reach; s >= 0; --s) {
        if (count[static_cast<std::size_t>(s)] != 0.0) {
          count[static_cast<std::size_t>(s + r)] += count[static_cast<std::size_t>(s)];
        }
      }
      reach += r;
    }
    const double patterns = std::ldexp(1.0, static_cast<int>(n));
    double ge = 0.0;
    double le = 0.0;
    for (long s = 0; s <= total2; ++s) {
      if (s >= w2) ge += count[static_cast<std::size_t>(s)];
      if (s <= w2) le += count[static_cast<std::size_t>(s)];
    }
    p_greater = ge / patterns;
    p_less = le / patterns;
  } else {
    const double nn = static_cast<double>(n);
    const double mean = nn * (nn + 1.0) / 4.0;
    double tie_term = 0.0;
    std::vector<double> sorted = abs_diff;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i + 1;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i);
      tie_term += t * t * t - t;
      i = j;
    }
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    const double z = var > 0.0 ? (out.statistic - mean) / std::sqrt(var) : 0.0;
    p_greater = normal_upper(z);
    p_less = 1.0 - p_greater;
  }

  switch (alternative) {
    case Alternative::kGreater:
      out.p_value = p_greater;
      break;
    case Alternative::kLess:
      out.p_value = p_less;
      break;
    case Alternative::kTwoSided:
      out.p_value = std::min(1.0, 2.0 * std::min(p_greater, p_less));
      break;
  }
  out.p_value = std::clamp(out.p_value, 0.0, 1.0);
  return out;
}

}  // namespace hiddenout
