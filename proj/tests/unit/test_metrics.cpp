#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rlp/error.hpp"
#include "rlp/metrics.hpp"

using namespace rlp;
namespace fs = std::filesystem;

TEST_CASE("metrics files round-trip exactly") {
  const std::vector<MetricsRecord> recs = {
      {1, 0.1, 1.0 / 3.0, 2e-300, std::nullopt, std::nullopt, 0.5, "00ff"},
      {2, 1e10, 0.0, 5.5, 0.75, 0.6666666666666666, 12.25, "00ff"},
  };
  const fs::path path = fs::temp_directory_path() / "rlp_unit_metrics.csv";
  write_metrics(path, recs);
  CHECK(read_metrics(path) == recs);
  std::ostringstream os;
  write_metrics(os, recs);
  CHECK(os.str().substr(0, kMetricsHeader.size()) == kMetricsHeader);
  CHECK(format_metrics_row(recs[0]) == "1,0.1,0.3333333333333333,2e-300,,,0.5,00ff");
}

TEST_CASE("metrics reader errors") {
  const fs::path path = fs::temp_directory_path() / "rlp_unit_metrics_bad.csv";
  std::ofstream(path) << "not,a,header\n";
  CHECK_THROWS_AS(read_metrics(path), SchemaError);
  std::ofstream(path) << kMetricsHeader << "\n1,2,3\n";
  CHECK_THROWS_AS(read_metrics(path), ParseError);
  std::ofstream(path) << kMetricsHeader << "\n1,x,3,4,,,5,ab\n";
  CHECK_THROWS_AS(read_metrics(path), ParseError);
}

TEST_CASE("classification scores") {
  const Matrix truth{{1, 0}, {1, 0}, {0, 1}, {0, 1}};
  const Matrix all_zero{{1, 0}, {1, 0}, {1, 0}, {1, 0}};
  CHECK(accuracy(all_zero, truth) == 0.5);
  // Class 0: precision 1/2, recall 1, F1 2/3; class 1 never predicted, F1 0.
  CHECK(macro_f1(all_zero, truth) == doctest::Approx(1.0 / 3.0));
  CHECK(accuracy(truth, truth) == 1.0);
  CHECK(macro_f1(truth, truth) == 1.0);
  const Matrix mixed{{0.2, 0.9}, {0.8, 0.1}, {0.1, 0.4}, {0.7, 0.3}};
  CHECK(argmax_rows(mixed) == std::vector<std::size_t>{1, 0, 1, 0});
  CHECK(accuracy(mixed, truth) == 0.5);
  CHECK(macro_f1(mixed, truth) == doctest::Approx(0.5));
}

TEST_CASE("fnv-1a reference vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK(hash_hex(0xabcULL) == "0000000000000abc");
}
