#include "rlp/metrics.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "rlp/error.hpp"

namespace rlp {
namespace {

std::string real(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, end};
}

double parse_real(std::string_view s, std::size_t row) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError("bad number '" + std::string(s) + "'", row);
  return v;
}

}  // namespace

std::string format_metrics_row(const MetricsRecord& r) {
  std::string row = std::to_string(r.epoch) + ',' + real(r.train_loss) + ',' + real(r.test_mse) + ',' +
                    real(r.test_rlp) + ',';
  if (r.accuracy) row += real(*r.accuracy);
  row += ',';
  if (r.macro_f1) row += real(*r.macro_f1);
  row += ',' + real(r.wall_seconds) + ',' + r.config_hash;
  return row;
}

void write_metrics(std::ostream& os, const std::vector<MetricsRecord>& records) {
  os << kMetricsHeader << '\n';
  for (const auto& r : records) os << format_metrics_row(r) << '\n';
}

void write_metrics(const std::filesystem::path& path, const std::vector<MetricsRecord>& records) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_metrics(out, records);
}

std::vector<MetricsRecord> read_metrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) throw SchemaError(path.string() + " is not a metrics file");
  std::vector<MetricsRecord> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (cells.size() != 8) throw ParseError("expected 8 columns", row);
    MetricsRecord r;
    r.epoch = static_cast<std::size_t>(parse_real(cells[0], row));
    r.train_loss = parse_real(cells[1], row);
    r.test_mse = parse_real(cells[2], row);
    r.test_rlp = parse_real(cells[3], row);
    if (!cells[4].empty()) r.accuracy = parse_real(cells[4], row);
    if (!cells[5].empty()) r.macro_f1 = parse_real(cells[5], row);
    r.wall_seconds = parse_real(cells[6], row);
    r.config_hash = cells[7];
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::size_t> argmax_rows(const Matrix& m) {
  std::vector<std::size_t> out(m.rows(), 0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    for (std::size_t j = 1; j < row.size(); ++j)
      if (row[j] > row[out[i]]) out[i] = j;
  }
  return out;
}

double accuracy(const Matrix& predictions, const Matrix& one_hot) {
  if (predictions.rows() != one_hot.rows() || predictions.rows() == 0) {
    throw ShapeError("accuracy: need matching, non-empty prediction and label rows");
  }
  const auto p = argmax_rows(predictions);
  const auto t = argmax_rows(one_hot);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < p.size(); ++i) hits += p[i] == t[i];
  return static_cast<double>(hits) / static_cast<double>(p.size());
}

double macro_f1(const Matrix& predictions, const Matrix& one_hot) {
  if (predictions.rows() != one_hot.rows() || predictions.cols() != one_hot.cols() || predictions.rows() == 0) {
    throw ShapeError("macro_f1: need matching, non-empty prediction and label matrices");
  }
  const auto p = argmax_rows(predictions);
  const auto t = argmax_rows(one_hot);
  double sum = 0.0;
  std::size_t classes = 0;
  for (std::size_t c = 0; c < one_hot.cols(); ++c) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      tp += p[i] == c && t[i] == c;
      fp += p[i] == c && t[i] != c;
      fn += p[i] != c && t[i] == c;
    }
    if (tp + fp + fn == 0) continue;
    sum += 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
    ++classes;
  }
  return classes == 0 ? 0.0 : sum / static_cast<double>(classes);
}

std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) s[static_cast<std::size_t>(i)] = kDigits[h & 0xf];
  return s;
}

}  // namespace rlp
