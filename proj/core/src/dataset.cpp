#include "rlp/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include "rlp/error.hpp"
#include "rlp/random.hpp"

namespace rlp {
namespace {

constexpr std::uint64_t kLinearStream = 0;
constexpr std::uint64_t kNonlinearStream = 1;
constexpr std::uint64_t kMoonsStream = 2;

template <typename Target>
Dataset gen_uniform(std::size_t n, std::size_t d, std::uint64_t seed, std::uint64_t substream, Target target,
                    std::string source) {
  Rng rng(seed, Stream::dataset, substream);
  Matrix x(n, d);
  Matrix y(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = x.row(i);
    for (double& v : row) v = rng.uniform();
    y(i, 0) = target(row);
  }
  return {std::move(x), std::move(y), DatasetMeta{.source = std::move(source), .seed = seed}};
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\"'");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"'");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string_view> split_line(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(delim, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_cell(std::string_view cell, std::size_t row, const std::string& column) {
  const std::string t = trim(cell);
  double v = 0.0;
  const auto* begin = t.data();
  const auto* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (t.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ParseError("non-numeric cell '" + t + "' in column '" + column + "'", row);
  }
  return v;
}

std::pair<double, double> column_moments(const Matrix& m, std::size_t col) {
  double mean = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) mean += m(i, col);
  mean /= static_cast<double>(m.rows());
  double var = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double dv = m(i, col) - mean;
    var += dv * dv;
  }
  var /= static_cast<double>(m.rows());
  return {mean, std::sqrt(var)};
}

Split make_split(const Dataset& ds, std::vector<std::size_t> train_idx, std::vector<std::size_t> test_idx) {
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  Split s;
  s.train = ds.subset(train_idx);
  s.test = ds.subset(test_idx);
  s.train_indices = std::move(train_idx);
  s.test_indices = std::move(test_idx);
  return s;
}

}  // namespace

Dataset::Dataset(Matrix f, Matrix l, DatasetMeta m) : features(std::move(f)), labels(std::move(l)), meta(std::move(m)) {
  if (features.rows() != labels.rows()) {
    throw ShapeError("dataset has " + std::to_string(features.rows()) + " feature rows but " +
                     std::to_string(labels.rows()) + " label rows");
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  return {features.select_rows(indices), labels.select_rows(indices), meta};
}

double linear_target(std::span<const double> x) {
  return 0.5 * x[0] + 1.5 * x[1] + 2.5 * x[2] + 3.5 * x[3] + 4.5 * x[4];
}

double nonlinear_target(std::span<const double> x) {
  return x[0] + std::pow(x[1], 2) + std::pow(x[2], 3) + std::pow(x[3], 4) + std::pow(x[4], 5) + std::exp(x[5]) +
         std::sin(x[6]);
}

Dataset gen_linear(std::size_t n, std::uint64_t seed) {
  return gen_uniform(n, 5, seed, kLinearStream, linear_target, "linear");
}

Dataset gen_nonlinear(std::size_t n, std::uint64_t seed) {
  return gen_uniform(n, 7, seed, kNonlinearStream, nonlinear_target, "nonlinear");
}

Dataset gen_moons(std::size_t n, double noise_level, std::uint64_t seed) {
  const std::size_t n_outer = n / 2;
  const std::size_t n_inner = n - n_outer;
  Rng rng(seed, Stream::dataset, kMoonsStream);

  auto arc = [](std::size_t count, std::size_t i) {
    return count <= 1 ? 0.0 : std::numbers::pi * static_cast<double>(i) / static_cast<double>(count - 1);
  };

  Matrix x(n, 2);
  Matrix y(n, 2);
  for (std::size_t i = 0; i < n_outer; ++i) {
    const double t = arc(n_outer, i);
    x(i, 0) = std::cos(t);
    x(i, 1) = std::sin(t);
    y(i, 0) = 1.0;
  }
  for (std::size_t i = 0; i < n_inner; ++i) {
    const double t = arc(n_inner, i);
    x(n_outer + i, 0) = 1.0 - std::cos(t);
    x(n_outer + i, 1) = 1.0 - std::sin(t) - 0.5;
    y(n_outer + i, 1) = 1.0;
  }
  if (noise_level > 0.0) {
    for (double& v : x.values()) v += noise_level * rng.normal();
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span(order));
  return {x.select_rows(order), y.select_rows(order), DatasetMeta{.source = "moons", .seed = seed}};
}

Dataset load_table(std::span<const std::filesystem::path> paths, std::span<const std::string> feature_columns,
                   const std::string& label_column) {
  if (paths.empty()) throw DataError("load_table: no input files");
  std::vector<double> feats;
  std::vector<double> labels;
  std::size_t rows = 0;
  std::string source;

  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open table " + path.string());
    std::string header;
    if (!std::getline(in, header)) throw DataError("empty table " + path.string());
    const char delim = (header.find(',') == std::string::npos && header.find(';') != std::string::npos) ? ';' : ',';

    std::vector<std::string> names;
    for (auto cell : split_line(header, delim)) names.push_back(trim(cell));
    auto index_of = [&](const std::string& name) {
      const auto it = std::find(names.begin(), names.end(), name);
      if (it == names.end()) throw SchemaError("column '" + name + "' missing from " + path.string());
      return static_cast<std::size_t>(it - names.begin());
    };
    std::vector<std::size_t> feature_idx;
    for (const auto& name : feature_columns) feature_idx.push_back(index_of(name));
    const std::size_t label_idx = index_of(label_column);

    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      const auto cells = split_line(line, delim);
      if (cells.size() != names.size()) {
        throw ParseError("expected " + std::to_string(names.size()) + " cells, found " +
                             std::to_string(cells.size()) + " in " + path.string(),
                         line_no);
      }
      for (std::size_t k = 0; k < feature_idx.size(); ++k) {
        feats.push_back(parse_cell(cells[feature_idx[k]], line_no, feature_columns[k]));
      }
      labels.push_back(parse_cell(cells[label_idx], line_no, label_column));
      ++rows;
    }
    if (!source.empty()) source += "+";
    source += path.filename().string();
  }

  return {Matrix(rows, feature_columns.size(), std::move(feats)), Matrix(rows, 1, std::move(labels)),
          DatasetMeta{.source = source}};
}

Dataset load_table(const std::filesystem::path& path, std::span<const std::string> feature_columns,
                   const std::string& label_column) {
  return load_table(std::span(&path, 1), feature_columns, label_column);
}

void write_table(std::ostream& os, const Dataset& ds) {
  const std::size_t d = ds.feature_dim();
  const std::size_t c = ds.label_dim();
  for (std::size_t j = 0; j < d; ++j) os << (j ? "," : "") << 'x' << (j + 1);
  for (std::size_t j = 0; j < c; ++j) {
    os << (d + j ? "," : "") << 'y';
    if (c > 1) os << (j + 1);
  }
  os << '\n';
  char buf[32];
  auto put = [&](double v) {
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    os.write(buf, ptr - buf);
  };
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (j) os << ',';
      put(ds.features(i, j));
    }
    for (std::size_t j = 0; j < c; ++j) {
      if (d + j) os << ',';
      put(ds.labels(i, j));
    }
    os << '\n';
  }
}

void write_table(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_table(out, ds);
}

Standardized standardize(const Dataset& train, std::span<const Dataset> others) {
  if (train.empty()) throw DataError("standardize: empty training set");
  const std::size_t d = train.feature_dim();
  std::vector<double> mean(d);
  std::vector<double> stddev(d);
  for (std::size_t j = 0; j < d; ++j) {
    const auto [m, s] = column_moments(train.features, j);
    mean[j] = m;
    stddev[j] = s < 1e-12 ? 1.0 : s;
  }

  auto apply = [&](const Dataset& ds) {
    if (ds.feature_dim() != d) throw ShapeError("standardize: feature dimension mismatch");
    Dataset out = ds;
    for (std::size_t i = 0; i < out.size(); ++i) {
      auto row = out.features.row(i);
      for (std::size_t j = 0; j < d; ++j) row[j] = (row[j] - mean[j]) / stddev[j];
    }
    out.meta.standardized = true;
    out.meta.feature_mean = mean;
    out.meta.feature_stddev = stddev;
    return out;
  };

  Standardized result{apply(train), {}};
  result.others.reserve(others.size());
  for (const auto& o : others) result.others.push_back(apply(o));
  return result;
}

Matrix unstandardize_features(const Dataset& ds) {
  if (!ds.meta.standardized) return ds.features;
  Matrix out = ds.features;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto row = out.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = row[j] * ds.meta.feature_stddev[j] + ds.meta.feature_mean[j];
  }
  return out;
}

Split split_random(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("split fraction must lie in [0, 1]");
  const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ds.size())));
  return split_count(ds, count, seed);
}

Split split_count(const Dataset& ds, std::size_t train_count, std::uint64_t seed) {
  if (train_count > ds.size()) {
    throw ConfigError("train count " + std::to_string(train_count) + " exceeds dataset size " +
                      std::to_string(ds.size()));
  }
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed, Stream::split);
  rng.shuffle(std::span(order));
  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_count));
  std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(train_count), order.end());
  return make_split(ds, std::move(train), std::move(test));
}

std::vector<bool> roi_mask(const Matrix& features) {
  const std::size_t d = features.cols();
  std::vector<double> mean(d);
  std::vector<double> eps(d);
  for (std::size_t j = 0; j < d; ++j) {
    const auto [m, s] = column_moments(features, j);
    mean[j] = m;
    eps[j] = 0.5 * s;
  }
  std::vector<bool> mask(features.rows());
  for (std::size_t i = 0; i < features.rows(); ++i) {
    bool inside = true;
    for (std::size_t j = 0; j < d && inside; ++j) {
      const double x = features(i, j);
      inside = (x - mean[j] < eps[j]) && (mean[j] - x < eps[j]);
    }
    mask[i] = inside;
  }
  return mask;
}

Split split_biased(const Dataset& ds, double gamma, std::uint64_t seed) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (ds.empty()) throw DegenerateSplitError("biased split of an empty dataset");
  const auto mask = roi_mask(ds.features);
  Rng rng(seed, Stream::split, 1);
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double p = mask[i] ? gamma : 1.0 - gamma;
    // One draw per row regardless of p keeps the stream aligned across gammas.
    const double u = rng.uniform();
    (u < p ? train : test).push_back(i);
  }
  if (train.empty() || test.empty()) {
    throw DegenerateSplitError("biased split with gamma=" + std::to_string(gamma) + " left the " +
                               (train.empty() ? "train" : "test") + " side empty");
  }
  return make_split(ds, std::move(train), std::move(test));
}

Dataset add_noise(const Dataset& train, double beta, std::uint64_t seed) {
  Dataset out = train;
  if (beta == 0.0) return out;
  Rng rng(seed, Stream::noise);
  for (double& v : out.features.values()) v += beta * rng.normal();
  return out;
}

}  // namespace rlp
