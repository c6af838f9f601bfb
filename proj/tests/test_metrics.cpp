#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hiddenout/errors.hpp"
#include "hiddenout/metrics.hpp"
#include "oracles.hpp"

using namespace hiddenout;

TEST(Auc, Examples) {
  const std::vector<double> s = {0.1, 0.4, 0.35, 0.8};
  const Labels y = {0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(roc_auc(s, y), 0.75);
  EXPECT_DOUBLE_EQ(roc_auc(std::vector<double>{1, 2, 3, 4}, Labels{0, 0, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(roc_auc(std::vector<double>{5, 5, 5, 5}, Labels{0, 1, 0, 1}), 0.5);
}

TEST(Auc, Errors) {
  EXPECT_THROW(roc_auc(std::vector<double>{1, 2}, Labels{1, 1}), UndefinedMetricError);
  EXPECT_THROW(roc_auc(std::vector<double>{1, 2}, Labels{1}), ShapeError);
}

TEST(Auc, MatchesPairCountingAndInvariances) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 60;
    std::vector<double> s(n);
    Labels y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng() % 12);  // coarse values give ties
      y[i] = rng() % 3 == 0;
    }
    y[0] = 0;
    y[1] = 1;
    const double auc = roc_auc(s, y);
    EXPECT_NEAR(auc, oracle::auc_pairs(s, y), 1e-12);
    std::vector<double> mono(n), neg(n);
    for (std::size_t i = 0; i < n; ++i) {
      mono[i] = std::exp(0.3 * s[i]) - 7.0;
      neg[i] = -s[i];
    }
    EXPECT_NEAR(roc_auc(mono, y), auc, 1e-12);
    EXPECT_NEAR(roc_auc(neg, y) + auc, 1.0, 1e-12);
  }
}

TEST(Wilcoxon, AllPositiveSevenPairs) {
  const std::vector<double> x = {0.9, 0.8, 0.85, 0.7, 0.95, 0.75, 0.88};
  const std::vector<double> y = {0.5, 0.55, 0.6, 0.52, 0.51, 0.58, 0.57};
  const auto r = wilcoxon_signed_rank(x, y, Alternative::kGreater);
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(r.n_effective, 7u);
  EXPECT_DOUBLE_EQ(r.statistic, 28.0);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0 / 128.0);
  EXPECT_DOUBLE_EQ(wilcoxon_signed_rank(x, y, Alternative::kLess).p_value, 1.0);
  EXPECT_DOUBLE_EQ(wilcoxon_signed_rank(x, y, Alternative::kTwoSided).p_value, 2.0 / 128.0);
}

TEST(Wilcoxon, IdenticalSamples) {
  const std::vector<double> x = {1, 2, 3};
  const auto r = wilcoxon_signed_rank(x, x);
  EXPECT_EQ(r.n_effective, 0u);
  EXPECT_EQ(r.p_value, 1.0);
}

TEST(Wilcoxon, ExactMatchesEnumeration) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 10;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng() % 7);
      y[i] = static_cast<double>(rng() % 7);
    }
    // Oracle: drop zeros, mid-rank |d|, enumerate all sign patterns.
    std::vector<double> d;
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i] != y[i]) d.push_back(x[i] - y[i]);
    }
    if (d.empty()) continue;
    std::vector<double> ranks(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      double less = 0, equal = 0;
      for (double e : d) {
        less += std::fabs(e) < std::fabs(d[i]);
        equal += std::fabs(e) == std::fabs(d[i]);
      }
      ranks[i] = less + (equal + 1.0) / 2.0;
    }
    double w = 0;
    for (std::size_t i = 0; i < d.size(); ++i) w += d[i] > 0 ? ranks[i] : 0.0;
    const double pg = oracle::wilcoxon_enum(ranks, w, true);
    const double pl = oracle::wilcoxon_enum(ranks, w, false);
    const auto g = wilcoxon_signed_rank(x, y, Alternative::kGreater);
    EXPECT_TRUE(g.exact);
    EXPECT_DOUBLE_EQ(g.statistic, w);
    EXPECT_NEAR(g.p_value, pg, 1e-12);
    EXPECT_NEAR(wilcoxon_signed_rank(x, y, Alternative::kLess).p_value, pl, 1e-12);
    EXPECT_NEAR(wilcoxon_signed_rank(x, y, Alternative::kTwoSided).p_value,
                std::min(1.0, 2.0 * std::min(pg, pl)), 1e-12);
  }
}

TEST(Wilcoxon, NormalApproximationForLargeSamples) {
  std::vector<double> x, y;
  for (int i = 1; i <= 30; ++i) {
    x.push_back(i + (i % 3 == 0 ? -0.5 : 0.5) * i);
    y.push_back(i);
  }
  const auto r = wilcoxon_signed_rank(x, y);
  EXPECT_FALSE(r.exact);
  EXPECT_EQ(r.n_effective, 30u);
  // Tie-free normal approximation computed independently.
  double w = 0;
  for (int i = 1; i <= 30; ++i) w += i % 3 == 0 ? 0.0 : i;
  const double mean = 30.0 * 31.0 / 4.0;
  const double sd = std::sqrt(30.0 * 31.0 * 61.0 / 24.0);
  EXPECT_DOUBLE_EQ(r.statistic, w);
  const double z_cc = (w - mean - 0.5) / sd;
  const double z = (w - mean) / sd;
  const double p_cc = 0.5 * std::erfc(z_cc / std::sqrt(2.0));
  const double p = 0.5 * std::erfc(z / std::sqrt(2.0));
  // Accept with or without continuity correction.
  EXPECT_TRUE(std::fabs(r.p_value - p_cc) < 1e-9 || std::fabs(r.p_value - p) < 1e-9) << r.p_value;
}
