#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hiddenout/core.hpp"

namespace hiddenout {

struct GaussianSpec {
  std::size_t clusters = 1;
  std::size_t d = 2;
  std::size_t n = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Mixture of `clusters` unit-covariance Gaussians with means uniform in
/// [-10, 10]^d; rows are split across clusters as evenly as possible (the
/// first n % clusters clusters get one extra row). No labels.
Dataset gen_gaussian_clusters(const GaussianSpec& spec);

/// The cluster means gen_gaussian_clusters(spec) draws.
std::vector<Point> gaussian_cluster_means(const GaussianSpec& spec);

/// Cluster counts x dimensionalities x repetitions, n observations each.
/// Seeds are derived from base_seed and the cell position.
std::vector<GaussianSpec> gaussian_grid(const std::vector<std::size_t>& clusters,
                                        const std::vector<std::size_t>& dims,
                                        std::size_t repetitions, std::size_t n,
                                        std::uint64_t base_seed);

/// Clusters {1,2,5} x features {7,15,30,50,100,150} x 5 repetitions, n = 1000.
std::vector<GaussianSpec> table1_grid(std::uint64_t base_seed = 0);

/// Reduced grid for desk runs: clusters {1,2,5} x features {7,15,30},
/// n = 1000, one repetition.
std::vector<GaussianSpec> desk_grid(std::uint64_t base_seed = 0);

std::vector<std::string> read_csv_header(const std::filesystem::path& path);

/// Reads a headered numeric CSV. When label_column is set it must exist and
/// hold only 0/1; it becomes the label vector and is not a feature.
Dataset load_csv(const std::filesystem::path& path,
                 const std::optional<std::string>& label_column = std::nullopt);

/// Writes features (plus the label column when present) and optional extra
/// string columns. Numbers use the shortest round-trip representation.
void write_csv(const std::filesystem::path& path, const Dataset& data,
               const std::string& label_column = "outlier",
               const std::vector<std::pair<std::string, std::vector<std::string>>>& extra = {});

/// Keeps every inlier and a seeded uniform subset of k outliers, where k is
/// the smallest count with k = ceil(target_fraction * (inliers + k)).
Dataset downsample_outliers(const Dataset& data, double target_fraction, std::uint64_t seed);

struct Split {
  Dataset train;
  Dataset test;
};

/// Train: 80% of inliers, no outliers. Test: remaining inliers and all outliers.
Split split_occ(const Dataset& data, std::uint64_t seed);

struct SodSplit {
  Dataset train;
  Dataset test;
  /// Outliers of the full set that were added to the test side.
  std::size_t added_outliers = 0;
};

/// Stratified 20/80 split of the downsampled set: round(0.2 n) train rows, of
/// which ceil(0.2 outliers) (at least one) are outliers. The test side is
/// extended with every outlier of the full set whose feature vector is not in
/// d_small.
SodSplit split_sod(const Dataset& d_small, const Dataset& d_full, std::uint64_t seed);

}  // namespace hiddenout
