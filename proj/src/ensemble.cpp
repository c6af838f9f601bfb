#include "hiddenout/ensemble.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "hiddenout/parallel.hpp"
#include "hiddenout/random.hpp"

namespace hiddenout {

namespace {

// Consecutive duplicate draws tolerated before switching to enumeration.
constexpr std::size_t kStallLimit = 1000;

std::vector<Subspace> enumerate_proper_subsets(std::size_t d) {
  std::vector<Subspace> out;
  const std::uint64_t full = (std::uint64_t{1} << d) - 1;
  out.reserve(static_cast<std::size_t>(full - 1));
  for (std::uint64_t mask = 1; mask < full; ++mask) {
    std::vector<std::size_t> dims;
    for (std::size_t j = 0; j < d; ++j) {
      if (mask & (std::uint64_t{1} << j)) dims.push_back(j);
    }
    out.emplace_back(std::move(dims));
  }
  std::sort(out.begin(), out.end(), [](const Subspace& a, const Subspace& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a.dims() < b.dims();
  });
  return out;
}

bool exhaustive_fits(std::size_t d, std::size_t budget) {
  if (d >= 63) return false;
  return (std::uint64_t{1} << d) - 2 <= budget;
}

}  // namespace

std::string to_string(Side side) { return side == Side::kH1 ? "H1" : "H2"; }

std::vector<Subspace> select_subspaces(std::size_t d, std::size_t budget, std::uint64_t seed) {
  if (d < 2) throw DegenerateDimensionError("subspace selection needs d >= 2");
  if (budget < 1) throw ConfigError("subspace budget must be >= 1");
  if (exhaustive_fits(d, budget)) return enumerate_proper_subsets(d);

  Rng rng = make_rng(seed, 0x5b);
  std::set<Subspace> seen;
  std::vector<Subspace> out;
  out.reserve(budget);
  std::vector<std::size_t> pool(d);
  std::size_t stalled = 0;
  while (out.size() < budget && stalled < kStallLimit) {
    const auto size = uniform_int<std::size_t>(rng, 1, d - 1);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < size; ++i) {
      const auto j = uniform_int<std::size_t>(rng, i, d - 1);
      std::swap(pool[i], pool[j]);
    }
    std::vector<std::size_t> dims(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(size));
    std::sort(dims.begin(), dims.end());
    Subspace s(std::move(dims));
    if (seen.insert(s).second) {
      out.push_back(std::move(s));
      stalled = 0;
    } else {
      ++stalled;
    }
  }
  if (out.size() < budget) {
    // Rejection stalled; only reachable when 2^d - 2 is close to the budget,
    // so d is small enough to enumerate.
    auto rest = enumerate_proper_subsets(d);
    std::erase_if(rest, [&](const Subspace& s) { return seen.count(s) > 0; });
    std::shuffle(rest.begin(), rest.end(), rng);
    for (auto& s : rest) {
      if (out.size() == budget) break;
      out.push_back(std::move(s));
    }
  }
  return out;
}

SubspaceEnsemble::SubspaceEnsemble(std::size_t d, std::vector<Member> members, std::size_t budget)
    : d_(d), members_(std::move(members)), budget_(budget) {
  if (members_.empty()) throw ConfigError("ensemble needs at least one member");
  if (members_.size() > budget_) throw ConfigError("ensemble has more members than its budget");
  std::set<Subspace> seen;
  for (const auto& m : members_) {
    m.subspace.validate_for(d_);
    if (m.subspace.is_full(d_)) {
      throw InvalidSubspaceError("ensemble members must be proper subspaces");
    }
    if (!seen.insert(m.subspace).second) throw InvalidSubspaceError("duplicate ensemble subspace");
    if (!m.detector || m.detector->dim() != m.subspace.size()) {
      throw ShapeError("member detector dimension differs from its subspace size");
    }
  }
}

bool SubspaceEnsemble::classify(PointView query) const {
  if (query.size() != d_) throw ShapeError("ensemble query dimension mismatch");
  thread_local Point projected;
  for (const auto& m : members_) {
    project_point(query, m.subspace, projected);
    if (m.detector->classify(projected)) return true;
  }
  return false;
}

SubspaceEnsemble fit_ensemble(const Dataset& data, std::span<const Subspace> subspaces,
                              const DetectorSpec& spec, unsigned threads) {
  std::vector<std::shared_ptr<const BinaryDetector>> fitted(subspaces.size());
  parallel_for(subspaces.size(), threads, [&](std::size_t i) {
    fitted[i] = std::make_shared<const FittedDetector>(
        calibrate_threshold(spec, project(data, subspaces[i])));
  });
  std::vector<SubspaceEnsemble::Member> members;
  members.reserve(subspaces.size());
  for (std::size_t i = 0; i < subspaces.size(); ++i) {
    members.push_back({subspaces[i], std::move(fitted[i])});
  }
  return SubspaceEnsemble(data.cols(), std::move(members), subspaces.size());
}

std::optional<Side> Indication::side() const {
  if (state != TriState::kDisagree) return std::nullopt;
  return full_verdict ? Side::kH2 : Side::kH1;
}

Indication indicator_f(const BinaryDetector& full, const BinaryDetector& ensemble,
                       PointView query) {
  Indication out;
  out.full_verdict = full.classify(query);
  out.ensemble_verdict = ensemble.classify(query);
  if (out.full_verdict != out.ensemble_verdict) {
    out.state = TriState::kDisagree;
  } else {
    out.state = out.full_verdict ? TriState::kBothOutlier : TriState::kBothInlier;
  }
  return out;
}

}  // namespace hiddenout
