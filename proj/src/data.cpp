#include "hiddenout/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "hiddenout/random.hpp"

namespace hiddenout {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

std::string unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Byte image of a row, used as an exact identity key.
std::string row_key(PointView r) {
  std::string key(r.size() * sizeof(double), '\0');
  std::memcpy(key.data(), r.data(), key.size());
  return key;
}

std::vector<std::size_t> rows_with_label(const Dataset& data, std::uint8_t value) {
  std::vector<std::size_t> out;
  const auto& l = data.labels();
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (l[i] == value) out.push_back(i);
  }
  return out;
}

// First `count` entries of a seeded shuffle, returned in ascending order.
std::vector<std::size_t> take_random(std::vector<std::size_t> pool, std::size_t count, Rng& rng) {
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::vector<std::size_t> complement(const std::vector<std::size_t>& all,
                                    const std::vector<std::size_t>& taken) {
  std::vector<std::size_t> out;
  std::set_difference(all.begin(), all.end(), taken.begin(), taken.end(),
                      std::back_inserter(out));
  return out;
}

std::vector<std::size_t> merged(std::vector<std::size_t> a, const std::vector<std::size_t>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  return a;
}

}  // namespace

void GaussianSpec::validate() const {
  if (clusters < 1) throw ConfigError("clusters must be >= 1");
  if (d < 1) throw ConfigError("d must be >= 1");
  if (n < clusters) throw ConfigError("n must be >= clusters");
}

namespace {

std::vector<Point> draw_means(const GaussianSpec& spec, Rng& rng) {
  std::vector<Point> means(spec.clusters, Point(spec.d));
  for (auto& m : means) {
    for (auto& x : m) x = uniform_real(rng, -10.0, 10.0);
  }
  return means;
}

}  // namespace

std::vector<Point> gaussian_cluster_means(const GaussianSpec& spec) {
  spec.validate();
  Rng rng = make_rng(spec.seed, 0x6a05);
  return draw_means(spec, rng);
}

Dataset gen_gaussian_clusters(const GaussianSpec& spec) {
  spec.validate();
  Rng rng = make_rng(spec.seed, 0x6a05);
  const auto means = draw_means(spec, rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> values;
  values.reserve(spec.n * spec.d);
  const std::size_t base = spec.n / spec.clusters;
  const std::size_t extra = spec.n % spec.clusters;
  for (std::size_t c = 0; c < spec.clusters; ++c) {
    const std::size_t rows = base + (c < extra ? 1 : 0);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < spec.d; ++j) values.push_back(means[c][j] + normal(rng));
    }
  }
  return Dataset(spec.n, spec.d, std::move(values));
}

std::vector<GaussianSpec> gaussian_grid(const std::vector<std::size_t>& clusters,
                                        const std::vector<std::size_t>& dims,
                                        std::size_t repetitions, std::size_t n,
                                        std::uint64_t base_seed) {
  std::vector<GaussianSpec> grid;
  std::uint64_t cell = 0;
  for (auto c : clusters) {
    for (auto d : dims) {
      for (std::size_t r = 0; r < repetitions; ++r) {
        grid.push_back({c, d, n, derive_seed(base_seed, cell++)});
      }
    }
  }
  return grid;
}

std::vector<GaussianSpec> table1_grid(std::uint64_t base_seed) {
  return gaussian_grid({1, 2, 5}, {7, 15, 30, 50, 100, 150}, 5, 1000, base_seed);
}

std::vector<GaussianSpec> desk_grid(std::uint64_t base_seed) {
  return gaussian_grid({1, 2, 5}, {7, 15, 30}, 1, 1000, base_seed);
}

std::vector<std::string> read_csv_header(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty CSV file '" + path.string() + "'", 0, 0);
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  std::vector<std::string> names;
  for (auto cell : split_line(line)) names.push_back(unquote(cell));
  return names;
}

Dataset load_csv(const std::filesystem::path& path, const std::optional<std::string>& label_column) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty CSV file '" + path.string() + "'", 0, 0);
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);

  std::vector<std::string> header;
  for (auto cell : split_line(line)) header.push_back(unquote(cell));
  std::optional<std::size_t> label_idx;
  if (label_column) {
    auto it = std::find(header.begin(), header.end(), *label_column);
    if (it == header.end()) {
      throw ConfigError("label column '" + *label_column + "' not found in '" + path.string() +
                        "'");
    }
    label_idx = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<std::string> names;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (!label_idx || j != *label_idx) names.push_back(header[j]);
  }
  if (names.empty()) throw ConfigError("CSV has no feature columns");

  std::vector<double> values;
  Labels labels;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      std::ostringstream msg;
      msg << "line " << line_no << ": expected " << header.size() << " cells, got "
          << cells.size();
      throw ParseError(msg.str(), rows, cells.size());
    }
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const auto cell = cells[j];
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size() ||
          !std::isfinite(v)) {
        std::ostringstream msg;
        msg << "line " << line_no << ", column '" << header[j] << "': cannot parse '" << cell
            << "' as a finite number";
        throw ParseError(msg.str(), rows, j);
      }
      if (label_idx && j == *label_idx) {
        if (v != 0.0 && v != 1.0) {
          std::ostringstream msg;
          msg << "line " << line_no << ", column '" << header[j] << "': label must be 0 or 1";
          throw ParseError(msg.str(), rows, j);
        }
        labels.push_back(static_cast<std::uint8_t>(v));
      } else {
        values.push_back(v);
      }
    }
    ++rows;
  }
  if (rows == 0) throw EmptyInputError("CSV '" + path.string() + "' has no data rows");
  std::optional<Labels> maybe_labels;
  if (label_idx) maybe_labels = std::move(labels);
  const std::size_t cols = names.size();
  return Dataset(rows, cols, std::move(values), std::move(maybe_labels), std::move(names));
}

void write_csv(const std::filesystem::path& path, const Dataset& data,
               const std::string& label_column,
               const std::vector<std::pair<std::string, std::vector<std::string>>>& extra) {
  for (const auto& [name, column] : extra) {
    if (column.size() != data.rows()) throw ShapeError("extra column '" + name + "' has wrong length");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  std::vector<std::string> header;
  for (std::size_t j = 0; j < data.cols(); ++j) {
    header.push_back(data.feature_names().empty() ? "x" + std::to_string(j)
                                                  : data.feature_names()[j]);
  }
  if (data.has_labels()) header.push_back(label_column);
  for (const auto& e : extra) header.push_back(e.first);
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto r = data.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) out << (j ? "," : "") << format_double(r[j]);
    if (data.has_labels()) out << ',' << static_cast<int>(data.labels()[i]);
    for (const auto& e : extra) out << ',' << e.second[i];
    out << '\n';
  }
  if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

Dataset downsample_outliers(const Dataset& data, double target_fraction, std::uint64_t seed) {
  if (!data.has_labels()) throw ConfigError("downsampling needs labels");
  const auto inliers = rows_with_label(data, 0);
  const auto outliers = rows_with_label(data, 1);
  const double current =
      static_cast<double>(outliers.size()) / static_cast<double>(data.rows());
  if (!(target_fraction > 0.0) || target_fraction > current + 1e-12) {
    throw ConfigError("target fraction must lie in (0, current outlier fraction]");
  }
  std::size_t keep = 0;
  for (;; ++keep) {
    const double wanted = target_fraction * static_cast<double>(inliers.size() + keep);
    const auto needed = static_cast<std::size_t>(std::ceil(wanted - 1e-9));
    if (needed == keep || keep == outliers.size()) break;
  }
  Rng rng = make_rng(seed, 0xd05);
  const auto kept = take_random(outliers, keep, rng);
  return data.select_rows(merged(inliers, kept));
}

Split split_occ(const Dataset& data, std::uint64_t seed) {
  if (!data.has_labels()) throw ConfigError("split_occ needs labels");
  const auto inliers = rows_with_label(data, 0);
  const auto outliers = rows_with_label(data, 1);
  if (inliers.size() < 2 || outliers.empty()) {
    throw ConfigError("split_occ needs at least two inliers and one outlier");
  }
  auto n_train = static_cast<std::size_t>(std::floor(0.8 * static_cast<double>(inliers.size()) + 0.5));
  n_train = std::clamp<std::size_t>(n_train, 1, inliers.size() - 1);
  Rng rng = make_rng(seed, 0x0cc);
  const auto train = take_random(inliers, n_train, rng);
  const auto test = merged(complement(inliers, train), outliers);
  return {data.select_rows(train), data.select_rows(test)};
}

SodSplit split_sod(const Dataset& d_small, const Dataset& d_full, std::uint64_t seed) {
  if (!d_small.has_labels() || !d_full.has_labels()) throw ConfigError("split_sod needs labels");
  if (d_small.cols() != d_full.cols()) throw ConfigError("split_sod: column counts differ");
  const auto inliers = rows_with_label(d_small, 0);
  const auto outliers = rows_with_label(d_small, 1);
  if (inliers.size() < 2 || outliers.empty()) {
    throw ConfigError("split_sod needs at least two inliers and one outlier");
  }

  std::unordered_map<std::string, std::size_t> full_rows;
  for (std::size_t i = 0; i < d_full.rows(); ++i) ++full_rows[row_key(d_full.row(i))];
  std::unordered_map<std::string, std::size_t> small_rows;
  for (std::size_t i = 0; i < d_small.rows(); ++i) {
    const auto key = row_key(d_small.row(i));
    auto it = full_rows.find(key);
    if (it == full_rows.end()) {
      std::ostringstream msg;
      msg << "split_sod: row " << i << " of the downsampled set has no exact match in the full set";
      throw ConfigError(msg.str());
    }
    ++small_rows[key];
  }

  const auto n_total =
      static_cast<std::size_t>(std::floor(0.2 * static_cast<double>(d_small.rows()) + 0.5));
  const auto n_out = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(0.2 * static_cast<double>(outliers.size()) - 1e-9)), 1,
      outliers.size());
  const auto n_in = std::clamp<std::size_t>(n_total > n_out ? n_total - n_out : 0, 1,
                                            inliers.size() - 1);

  Rng rng = make_rng(seed, 0x50d);
  const auto train_in = take_random(inliers, n_in, rng);
  const auto train_out = take_random(outliers, n_out, rng);
  const auto train_idx = merged(train_in, train_out);
  const auto test_idx = merged(complement(inliers, train_in), complement(outliers, train_out));

  SodSplit out{d_small.select_rows(train_idx), d_small.select_rows(test_idx), 0};
  std::vector<std::size_t> extra;
  for (std::size_t i = 0; i < d_full.rows(); ++i) {
    if (d_full.labels()[i] == 1 && small_rows.count(row_key(d_full.row(i))) == 0) {
      extra.push_back(i);
    }
  }
  if (!extra.empty()) {
    out.test = concat(out.test, d_full.select_rows(extra));
    out.added_outliers = extra.size();
  }
  return out;
}

}  // namespace hiddenout
