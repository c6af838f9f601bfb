#include <gtest/gtest.h>

#include <atomic>
#include <random>
#include <set>

#include "hiddenout/ensemble.hpp"
#include "oracles.hpp"

using namespace hiddenout;

namespace {

std::shared_ptr<const BinaryDetector> fixed(std::size_t dim, bool verdict) {
  return oracle::constant_stub(dim, verdict);
}

// Counts calls so short-circuiting can be observed.
class Probe final : public BinaryDetector {
 public:
  Probe(std::size_t dim, bool verdict, std::atomic<int>& calls)
      : dim_(dim), verdict_(verdict), calls_(calls) {}
  std::size_t dim() const override { return dim_; }
  bool classify(PointView) const override {
    ++calls_;
    return verdict_;
  }

 private:
  std::size_t dim_;
  bool verdict_;
  std::atomic<int>& calls_;
};

}  // namespace

TEST(SelectSubspaces, ExhaustiveSmall) {
  const auto s = select_subspaces(3, 2048, 0);
  const std::vector<Subspace> want = {Subspace({0}),    Subspace({1}),    Subspace({2}),
                                      Subspace({0, 1}), Subspace({0, 2}), Subspace({1, 2})};
  EXPECT_EQ(s, want);
  EXPECT_EQ(select_subspaces(2, 10, 5), (std::vector<Subspace>{Subspace({0}), Subspace({1})}));
}

TEST(SelectSubspaces, ExhaustiveIgnoresSeed) {
  EXPECT_EQ(select_subspaces(7, 126, 1), select_subspaces(7, 126, 999));
  EXPECT_EQ(select_subspaces(7, 126, 1).size(), 126u);
}

TEST(SelectSubspaces, BaggingBudget) {
  const auto s = select_subspaces(30, 2048, 3);
  ASSERT_EQ(s.size(), 2048u);
  std::set<Subspace> unique(s.begin(), s.end());
  EXPECT_EQ(unique.size(), 2048u);
  for (const auto& sub : s) {
    EXPECT_FALSE(sub.is_full(30));
    EXPECT_NO_THROW(sub.validate_for(30));
  }
}

TEST(SelectSubspaces, NearExhaustiveBudgetTerminates) {
  // 2^8 - 2 = 254 proper subsets; asking for 253 forces the stall fallback
  // or a long rejection run, and must still produce distinct subsets.
  const auto s = select_subspaces(8, 253, 4);
  std::set<Subspace> unique(s.begin(), s.end());
  EXPECT_EQ(unique.size(), 253u);
}

TEST(SelectSubspaces, Deterministic) {
  EXPECT_EQ(select_subspaces(15, 100, 7), select_subspaces(15, 100, 7));
  EXPECT_NE(select_subspaces(15, 100, 7), select_subspaces(15, 100, 8));
}

TEST(SelectSubspaces, Errors) {
  EXPECT_THROW(select_subspaces(1, 10, 0), DegenerateDimensionError);
  EXPECT_THROW(select_subspaces(3, 0, 0), ConfigError);
}

TEST(SubspaceEnsemble, Invariants) {
  using M = SubspaceEnsemble::Member;
  EXPECT_THROW(SubspaceEnsemble(3, {}, 5), ConfigError);
  EXPECT_THROW(SubspaceEnsemble(3, {M{Subspace({0, 1, 2}), fixed(3, false)}}, 5),
               InvalidSubspaceError);
  EXPECT_THROW(SubspaceEnsemble(3, {M{Subspace({0}), fixed(1, false)}, M{Subspace({0}), fixed(1, false)}}, 5),
               InvalidSubspaceError);
  EXPECT_THROW(SubspaceEnsemble(3, {M{Subspace({0}), fixed(1, false)}, M{Subspace({1}), fixed(1, false)}}, 1),
               ConfigError);
  EXPECT_THROW(SubspaceEnsemble(3, {M{Subspace({0, 1}), fixed(1, false)}}, 5), ShapeError);
  EXPECT_THROW(SubspaceEnsemble(3, {M{Subspace({3}), fixed(1, false)}}, 5), InvalidSubspaceError);
}

TEST(SubspaceEnsemble, MaxAggregationExhaustive) {
  // Every verdict pattern over 4 members.
  const std::vector<Subspace> subs = {Subspace({0}), Subspace({1}), Subspace({2}), Subspace({0, 1})};
  for (int mask = 0; mask < 16; ++mask) {
    std::vector<SubspaceEnsemble::Member> members;
    for (int i = 0; i < 4; ++i) members.push_back({subs[i], fixed(subs[i].size(), (mask >> i) & 1)});
    const SubspaceEnsemble e(3, members, 4);
    EXPECT_EQ(ensemble_classify(e, Point{0, 0, 0}), mask != 0);
  }
}

TEST(SubspaceEnsemble, ShortCircuits) {
  std::atomic<int> calls{0};
  std::vector<SubspaceEnsemble::Member> members = {
      {Subspace({0}), std::make_shared<Probe>(1, true, calls)},
      {Subspace({1}), std::make_shared<Probe>(1, true, calls)},
  };
  const SubspaceEnsemble e(2, members, 2);
  EXPECT_TRUE(e.classify(Point{0, 0}));
  EXPECT_EQ(calls.load(), 1);
  EXPECT_THROW(e.classify(Point{0}), ShapeError);
}

TEST(SubspaceEnsemble, ProjectsQueries) {
  // Member on axis 1 flags values outside [0, 1].
  const SubspaceEnsemble e(2, {{Subspace({1}), oracle::box_stub(1, 0.0, 1.0)}}, 1);
  EXPECT_FALSE(e.classify(Point{100.0, 0.5}));
  EXPECT_TRUE(e.classify(Point{0.5, 2.0}));
}

TEST(FitEnsemble, MembersMatchDirectCalibration) {
  std::mt19937_64 rng(5);
  const auto data = oracle::random_dataset(rng, 60, 3, true);
  const auto subs = select_subspaces(3, 2048, 0);
  const auto e = fit_ensemble(data, subs, DetectorSpec::lof(5), 2);
  ASSERT_EQ(e.size(), 6u);
  for (std::size_t i = 0; i < subs.size(); ++i) {
    const auto direct = calibrate_threshold(DetectorSpec::lof(5), project(data, subs[i]));
    const auto& member = dynamic_cast<const FittedDetector&>(*e.members()[i].detector);
    EXPECT_EQ(member.threshold(), direct.threshold());
    EXPECT_TRUE(std::isfinite(member.threshold()));
  }
}

TEST(FitEnsemble, SingleAxisMemberUsesMarginal) {
  std::mt19937_64 rng(6);
  const auto data = oracle::random_dataset(rng, 50, 2);
  const std::vector<Subspace> subs = {Subspace({0})};
  const auto e = fit_ensemble(data, subs, DetectorSpec::knn(3));
  // Changing axis 1 never changes the verdict.
  for (double x : {-3.0, 0.0, 0.5, 4.0}) {
    EXPECT_EQ(e.classify(Point{x, -100.0}), e.classify(Point{x, 100.0}));
  }
}

TEST(FitEnsemble, MarginalOutlierHiddenFromFullSpace) {
  // Strongly correlated 2-D Gaussian: a point on the diagonal far along axis
  // 1 is dense along the diagonal yet extreme in the axis-1 marginal.
  std::mt19937_64 rng(12);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Point> rows;
  for (int i = 0; i < 400; ++i) {
    const double z = normal(rng);
    rows.push_back({z, z + 0.05 * normal(rng)});
  }
  const auto data = Dataset::from_rows(rows);
  const auto spec = DetectorSpec::knn(5, 0.05);
  const auto full = calibrate_threshold(spec, data);
  const auto e = fit_ensemble(data, select_subspaces(2, 10, 0), spec);
  // Scan along the diagonal for a point the full detector accepts but some
  // marginal rejects.
  bool found = false;
  for (double t = 0.0; t < 5.0 && !found; t += 0.01) {
    const Point p = {t, t};
    if (!full.classify(p) && e.classify(p)) found = true;
  }
  EXPECT_TRUE(found);
}

TEST(Indicator, CaseTable) {
  const Point q = {0.0};
  const auto m1 = fixed(1, true);
  const auto m0 = fixed(1, false);
  auto f = indicator_f(*m1, *m1, q);
  EXPECT_EQ(f.state, TriState::kBothOutlier);
  EXPECT_FALSE(f.side());
  f = indicator_f(*m0, *m0, q);
  EXPECT_EQ(f.state, TriState::kBothInlier);
  f = indicator_f(*m0, *m1, q);
  EXPECT_EQ(f.state, TriState::kDisagree);
  EXPECT_EQ(*f.side(), Side::kH1);
  f = indicator_f(*m1, *m0, q);
  EXPECT_EQ(f.state, TriState::kDisagree);
  EXPECT_EQ(*f.side(), Side::kH2);
  EXPECT_EQ(to_string(Side::kH1), "H1");
}
