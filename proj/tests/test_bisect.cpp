#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "hiddenout/bisect.hpp"
#include "hiddenout/data.hpp"
#include "oracles.hpp"

using namespace hiddenout;

namespace {

// 1-D detector flagging x above `bound`.
std::shared_ptr<FunctionDetector> above(double bound) {
  return std::make_shared<FunctionDetector>(1, [](PointView x) { return x[0]; }, bound);
}

// 1-D detector flagging points in any of the given open intervals.
std::shared_ptr<FunctionDetector> flag_in(std::vector<std::pair<double, double>> intervals) {
  return std::make_shared<FunctionDetector>(
      1,
      [intervals](PointView x) {
        for (auto [lo, hi] : intervals) {
          if (x[0] > lo && x[0] < hi) return 1.0;
        }
        return 0.0;
      },
      0.5);
}

Ray line_ray(double origin, double length) { return Ray{{origin}, {1.0}, length}; }

// Upper 1% critical values of chi-square for small degrees of freedom.
double chi2_crit_01(int df) {
  static const std::map<int, double> table = {{1, 6.635}, {2, 9.210}, {3, 11.345}, {4, 13.277},
                                              {9, 21.666}};
  return table.at(df);
}

}  // namespace

TEST(WorstCaseIters, Examples) {
  EXPECT_EQ(worst_case_iters(1.0 / 5.0, 0.05), 1);
  EXPECT_EQ(worst_case_iters(0.3, 0.15), 0);
  EXPECT_EQ(worst_case_iters(1.0, 1.0 / 64.0), 5);
  EXPECT_THROW(worst_case_iters(0.0, 0.05), DomainError);
  EXPECT_THROW(worst_case_iters(1.0, 0.0), DomainError);
  EXPECT_THROW(worst_case_iters(0.05, 0.1), DomainError);
  EXPECT_THROW(worst_case_iters(-1.0, 0.1), DomainError);
}

TEST(BisectInterval, HandTraceOneIteration) {
  // R(M) = [0, 1], R(E) = [0, 1.5]; ray from 0.5 toward 2.
  const auto m = oracle::box_stub(1, 0.0, 1.0);
  const auto e = oracle::box_stub(1, 0.0, 1.5);
  const auto ray = line_ray(0.5, 1.5);
  const auto hit = bisect_interval(ray, {0.0, 1.5}, *m, *e, 100);
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->point, (Point{1.25}));
  EXPECT_EQ(hit->side, Side::kH2);
  EXPECT_EQ(hit->iterations, 1);
}

TEST(BisectInterval, CapBreachReturnsNothing) {
  const auto m = oracle::box_stub(1, 0.0, 1.0);
  const auto ray = line_ray(0.5, 1.5);
  EXPECT_FALSE(bisect_interval(ray, {0.0, 1.5}, *m, *m, 20));
}

TEST(BisectInterval, TerminationBoundProperty) {
  // f along the ray is -1, then 0 on a hidden band of width >= 2 err, then +1.
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const double err = 0.001 + 0.1 * u(rng);
    const double m_bound = 1.0 + 5.0 * u(rng);
    const double width = err * (2.0 + 8.0 * u(rng));
    const bool h2 = trial % 2 == 0;
    // H2: M flags first; H1: the ensemble flags first.
    const auto m = above(h2 ? m_bound : m_bound + width);
    const auto e = above(h2 ? m_bound + width : m_bound);
    const double a = m_bound * u(rng);
    const double b = m_bound + width + 3.0 * u(rng) + 1e-6;
    const auto ray = line_ray(0.0, b);
    const int bound = worst_case_iters(b - a, err) + 1;
    const auto hit = bisect_interval(ray, {a, b}, *m, *e, 1000);
    ASSERT_TRUE(hit);
    EXPECT_LE(hit->iterations, bound) << "trial " << trial;
    EXPECT_EQ(hit->side, h2 ? Side::kH2 : Side::kH1);
    EXPECT_EQ(indicator_f(*m, *e, hit->point).state, TriState::kDisagree);
  }
}

TEST(CutTrick, SingleChange) {
  // R(M) = {t <= 0.45 L} with L = 10.
  const auto m = above(4.5);
  Rng rng(1);
  const auto iv = cut_trick_interval(line_ray(0.0, 10.0), *m, 5, rng);
  ASSERT_TRUE(iv);
  EXPECT_DOUBLE_EQ(iv->a, 4.0);
  EXPECT_DOUBLE_EQ(iv->b, 6.0);
}

TEST(CutTrick, PatternChoosesUniformly) {
  // Verdicts (0,0,1,0,1,1) at t = 0..5.
  const auto m = flag_in({{1.5, 2.5}, {3.5, 100.0}});
  Rng rng(2);
  std::map<std::pair<double, double>, int> counts;
  const int draws = 6000;
  for (int i = 0; i < draws; ++i) {
    const auto iv = cut_trick_interval(line_ray(0.0, 5.0), *m, 5, rng);
    ASSERT_TRUE(iv);
    ++counts[{iv->a, iv->b}];
  }
  ASSERT_EQ(counts.size(), 3u);
  EXPECT_TRUE(counts.count({1.0, 2.0}) && counts.count({2.0, 3.0}) && counts.count({3.0, 4.0}));
  double chi2 = 0.0;
  for (const auto& [iv, c] : counts) chi2 += std::pow(c - draws / 3.0, 2) / (draws / 3.0);
  EXPECT_LT(chi2, chi2_crit_01(2));
}

TEST(CutTrick, NoChangeIsEmpty) {
  Rng rng(3);
  EXPECT_FALSE(cut_trick_interval(line_ray(0.0, 5.0), *above(100.0), 5, rng));
  EXPECT_FALSE(cut_trick_interval(line_ray(0.0, 5.0), *above(-100.0), 5, rng));
  EXPECT_THROW(cut_trick_interval(line_ray(0.0, 5.0), *above(1.0), 0, rng), ConfigError);
}

TEST(CutTrick, EvaluatesExactEndpoint) {
  // Only the very end of the ray is flagged.
  const auto m = above(9.999999);
  Rng rng(4);
  const auto iv = cut_trick_interval(line_ray(0.0, 10.0), *m, 3, rng);
  ASSERT_TRUE(iv);
  EXPECT_EQ(iv->b, 10.0);
}

TEST(CutTrick, EndpointsDifferProperty) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Rng rng(6);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t d = 1 + gen() % 5;
    const auto m = oracle::ball_stub(d, 0.5 + 2.0 * u(gen));
    Point origin(d);
    for (auto& v : origin) v = u(gen) - 0.5;
    const Ray ray{origin, sample_direction(d, rng), 0.1 + 5.0 * u(gen)};
    const int cuts = 1 + static_cast<int>(gen() % 8);
    const auto iv = cut_trick_interval(ray, *m, cuts, rng);
    if (!iv) continue;
    EXPECT_LT(iv->a, iv->b);
    EXPECT_NE(m->classify(ray.at(iv->a)), m->classify(ray.at(iv->b)));
  }
}

TEST(Direction, UnitNormAndSphere) {
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    const auto v = sample_direction(1, rng);
    EXPECT_TRUE(v[0] == 1.0 || v[0] == -1.0);
  }
  for (int i = 0; i < 1000; ++i) {
    const auto v = sample_direction(1 + i % 30, rng);
    EXPECT_NEAR(norm(v), 1.0, 1e-12);
  }
  EXPECT_THROW(sample_direction(0, rng), DegenerateDimensionError);
}

TEST(Direction, CoordinateMeansVanish) {
  Rng rng(8);
  double sum[3] = {0, 0, 0};
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto v = sample_direction(3, rng);
    for (int j = 0; j < 3; ++j) sum[j] += v[j];
  }
  for (double s : sum) {
    EXPECT_GT(s / n, -0.02);
    EXPECT_LT(s / n, 0.02);
  }
}

TEST(MakeRay, LengthRange) {
  const auto everything_out = oracle::constant_stub(2, true);
  Rng rng(9);
  for (int i = 0; i < 5000; ++i) {
    const auto ray = make_ray(Point{0, 0}, 2.0, *everything_out, rng, 1);
    ASSERT_TRUE(ray);
    EXPECT_GE(ray->length, 1.0);
    EXPECT_LT(ray->length, 4.0);
    EXPECT_NEAR(norm(ray->direction), 1.0, 1e-12);
  }
  // From data: max norm of {(2,0),(0,1)} is 2.
  const auto data = Dataset::from_rows({{2, 0}, {0, 1}});
  const auto ray = make_ray(Point{0, 0}, data, *everything_out, rng, 1);
  ASSERT_TRUE(ray);
  EXPECT_GE(ray->length, 1.0);
  EXPECT_LT(ray->length, 4.0);
}

TEST(MakeRay, UnitBallStub) {
  const auto m = oracle::ball_stub(3, 1.0);
  Rng rng(10);
  // With l = 1 the length is uniform on [0.5, 2): a single attempt succeeds
  // exactly when L > 1, i.e. with probability 2/3.
  int ok = 0;
  const int n = 6000;
  for (int i = 0; i < n; ++i) {
    const auto ray = make_ray(Point{0, 0, 0}, 1.0, *m, rng, 1);
    if (ray) {
      ++ok;
      EXPECT_GT(ray->length, 1.0);
    }
  }
  EXPECT_NEAR(static_cast<double>(ok) / n, 2.0 / 3.0, 0.03);
  for (int i = 0; i < 100; ++i) EXPECT_TRUE(make_ray(Point{0, 0, 0}, 2.5, *m, rng, 1));
}

TEST(MakeRay, AcceptEverythingNeedsNewOrigin) {
  const auto m = oracle::constant_stub(2, false);
  Rng rng(11);
  EXPECT_FALSE(make_ray(Point{0, 0}, 3.0, *m, rng, 10));
  EXPECT_THROW(make_ray(Point{0}, 3.0, *m, rng, 10), ShapeError);
}

TEST(OriginSampler, EqualScoresUniform) {
  const auto data = Dataset(10, 1, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  FunctionDetector flat(1, [](PointView) { return 0.0; }, 1.0);
  const OriginSampler sampler(data, flat);
  Rng rng(12);
  std::vector<int> counts(10, 0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) ++counts[sampler.sample(rng)];
  double chi2 = 0.0;
  for (int c : counts) chi2 += std::pow(c - draws / 10.0, 2) / (draws / 10.0);
  EXPECT_LT(chi2, chi2_crit_01(9));
}

TEST(OriginSampler, ShiftedScoresFavourHigher) {
  const auto data = Dataset(2, 1, {0.0, 1.0});
  FunctionDetector ident(1, [](PointView x) { return x[0]; }, 2.0);
  const OriginSampler sampler(data, ident);
  EXPECT_NEAR(sampler.weights()[0], OriginSampler::kDelta, 1e-18);
  EXPECT_NEAR(sampler.weights()[1], 1.0 + OriginSampler::kDelta, 1e-15);
  Rng rng(13);
  for (int i = 0; i < 10000; ++i) EXPECT_EQ(sampler.sample(rng), 1u);
}

TEST(OriginSampler, WeightingVariants) {
  const auto data = Dataset(3, 1, {0.0, 1.0, 3.0});
  FunctionDetector ident(1, [](PointView x) { return x[0]; }, 2.0);
  const OriginSampler dec(data, ident, OriginWeighting::kDecreasing);
  ASSERT_EQ(dec.inlier_rows(), (std::vector<std::size_t>{0, 1}));
  EXPECT_NEAR(dec.weights()[0], 1.0, 1e-8);
  EXPECT_NEAR(dec.weights()[1], 0.0, 1e-8);
  const OriginSampler uni(data, ident, OriginWeighting::kUniform);
  EXPECT_EQ(uni.weights(), (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(parse_origin_weighting("decreasing"), OriginWeighting::kDecreasing);
  EXPECT_THROW(parse_origin_weighting("sideways"), ConfigError);
}

TEST(OriginSampler, FringeInlierOverRepresented) {
  // Dense cluster plus one fringe row that still passes the LOF threshold.
  std::vector<double> xs;
  for (int i = 0; i < 30; ++i) xs.push_back(0.1 * i);
  xs.push_back(3.3);
  // Two far rows take the flagged slots.
  xs.push_back(10.0);
  xs.push_back(20.0);
  const auto data = Dataset(xs.size(), 1, xs);
  const auto det = calibrate_threshold(DetectorSpec::lof(5, 0.05), data);
  const OriginSampler sampler(data, det);
  const auto& rows = sampler.inlier_rows();
  const auto it = std::find(rows.begin(), rows.end(), std::size_t{30});
  ASSERT_NE(it, rows.end()) << "fringe row should be an inlier";
  const std::size_t pos = static_cast<std::size_t>(it - rows.begin());
  double total = 0.0;
  for (double w : sampler.weights()) total += w;
  const double expected = sampler.weights()[pos] / total;
  EXPECT_GT(expected, 1.0 / static_cast<double>(rows.size()));
  Rng rng(14);
  int hits = 0;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) hits += sampler.sample(rng) == 30;
  const double freq = static_cast<double>(hits) / draws;
  EXPECT_NEAR(freq, expected, 4.0 * std::sqrt(expected * (1 - expected) / draws));
  EXPECT_GT(freq, 1.0 / static_cast<double>(rows.size()));
}

TEST(OriginSampler, NoInliers) {
  const auto data = Dataset(3, 1, {0.0, 1.0, 2.0});
  const auto all_out = oracle::constant_stub(1, true);
  EXPECT_THROW(OriginSampler(data, *all_out), NoOriginError);
  Rng rng(15);
  EXPECT_THROW(select_origin(data, *all_out, rng), NoOriginError);
}

TEST(BisectOne, EmptyHiddenRegionFails) {
  const auto data = Dataset(4, 2, {0, 0, 0.5, 0, 0, 0.5, 0.2, 0.2});
  const auto m = oracle::ball_stub(2, 1.0);
  BisectConfig cfg;
  cfg.max_restarts = 5;
  Rng rng(16);
  try {
    bisect_one(data, *m, *m, cfg, rng);
    FAIL() << "expected GenerationFailure";
  } catch (const GenerationFailure& e) {
    EXPECT_EQ(e.restarts(), 5);
    EXPECT_EQ(e.iteration_cap_hits() + e.empty_intervals() + e.ray_failures(), 6);
  }
}

TEST(BisectOne, StubBallsProduceHiddenOutliers) {
  // M accepts the ball of radius 1, E the ball of radius 1.3: H2 is the shell.
  std::mt19937_64 gen(17);
  const auto data = oracle::random_dataset(gen, 50, 3);
  const auto m = oracle::ball_stub(3, 1.0);
  const auto e = oracle::ball_stub(3, 1.3);
  const auto scaled = Dataset::from_rows([&] {
    auto rows = data.to_rows();
    for (auto& r : rows) {
      const double n = norm(r);
      for (auto& v : r) v *= 0.9 / std::max(n, 1.0);
    }
    return rows;
  }());
  Rng rng(18);
  for (int i = 0; i < 200; ++i) {
    const auto h = bisect_one(scaled, *m, *e, BisectConfig{}, rng);
    EXPECT_EQ(h.side, Side::kH2);
    const double r = norm(h.point);
    EXPECT_GT(r, 1.0);
    EXPECT_LE(r, 1.3);
  }
}

class GenerateBatchTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    data_ = std::make_unique<Dataset>(gen_gaussian_clusters({2, 5, 300, 21}));
    full_ = std::make_unique<FittedDetector>(calibrate_threshold(DetectorSpec::lof(), *data_));
    ens_ = std::make_unique<SubspaceEnsemble>(
        fit_ensemble(*data_, select_subspaces(5, 2048, 1), DetectorSpec::lof()));
  }
  static void TearDownTestSuite() {
    ens_.reset();
    full_.reset();
    data_.reset();
  }
  static std::unique_ptr<Dataset> data_;
  static std::unique_ptr<FittedDetector> full_;
  static std::unique_ptr<SubspaceEnsemble> ens_;
};

std::unique_ptr<Dataset> GenerateBatchTest::data_;
std::unique_ptr<FittedDetector> GenerateBatchTest::full_;
std::unique_ptr<SubspaceEnsemble> GenerateBatchTest::ens_;

TEST_F(GenerateBatchTest, EveryPointIsHidden) {
  const auto rep = generate_batch(*data_, *full_, *ens_, 100, BisectConfig{}, 3);
  ASSERT_EQ(rep.size(), 100u);
  EXPECT_FALSE(rep.timed_out);
  ASSERT_EQ(rep.sides.size(), rep.size());
  ASSERT_EQ(rep.iterations.size(), rep.size());
  for (std::size_t i = 0; i < rep.size(); ++i) {
    const auto f = indicator_f(*full_, *ens_, rep.points[i]);
    ASSERT_EQ(f.state, TriState::kDisagree);
    EXPECT_EQ(*f.side(), rep.sides[i]);
  }
  EXPECT_GT(rep.full_calls, 0);
  EXPECT_GT(rep.ensemble_calls, 0);
  EXPECT_GT(rep.adversary_inference_cost, 0.0);
}

TEST_F(GenerateBatchTest, DeterministicAndThreadIndependent) {
  const auto a = generate_batch(*data_, *full_, *ens_, 40, BisectConfig{}, 9, 1800.0, 1);
  const auto b = generate_batch(*data_, *full_, *ens_, 40, BisectConfig{}, 9, 1800.0, 1);
  const auto c = generate_batch(*data_, *full_, *ens_, 40, BisectConfig{}, 9, 1800.0, 3);
  EXPECT_EQ(a.points, b.points);
  EXPECT_EQ(a.points, c.points);
  EXPECT_EQ(a.sides, c.sides);
  EXPECT_EQ(a.iterations, c.iterations);
  const auto d = generate_batch(*data_, *full_, *ens_, 40, BisectConfig{}, 10, 1800.0, 1);
  EXPECT_NE(a.points, d.points);
}

TEST_F(GenerateBatchTest, TinyTimeoutGivesPartialReport) {
  const auto rep = generate_batch(*data_, *full_, *ens_, 100000, BisectConfig{}, 4, 0.001);
  EXPECT_TRUE(rep.timed_out);
  EXPECT_LT(rep.size(), 100000u);
  for (const auto& p : rep.points) {
    EXPECT_EQ(indicator_f(*full_, *ens_, p).state, TriState::kDisagree);
  }
}

TEST_F(GenerateBatchTest, RejectsBadConfig) {
  EXPECT_THROW(generate_batch(*data_, *full_, *ens_, 0, BisectConfig{}, 1), ConfigError);
  BisectConfig bad;
  bad.n_cuts = 0;
  EXPECT_THROW(generate_batch(*data_, *full_, *ens_, 1, bad, 1), ConfigError);
}
