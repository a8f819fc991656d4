// Acceptance suite. Prints one line per criterion:
//   criterion N: PASS|FAIL|SKIP <details>
// With an argument, runs only that criterion and exits 0 (pass), 1 (fail) or
// 77 (skip: a required dataset is absent).

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "batch_contract.hpp"
#include "gradcheck.hpp"
#include "rlp/cli.hpp"
#include "rlp/experiment.hpp"
#include "rlp/theory.hpp"

using namespace rlp;
namespace fs = std::filesystem;

namespace {

enum class Outcome { pass, fail, skip };

struct Verdict {
  Outcome outcome;
  std::string details;
};

fs::path data_root() {
  if (const char* env = std::getenv("RLP_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return "data";
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

ExperimentConfig base(const std::string& dataset, LossKind loss) {
  ExperimentConfig c;
  c.name = "acceptance";
  c.seed = 0;
  c.dataset.name = dataset;
  c.loss = loss;
  c.update = UpdateMode::per_batch;
  c.data_dir = data_root();
  return c;
}

double final_test_mse(const ExperimentConfig& c) { return run_experiment(c).run.records.back().test_mse; }

Verdict c1() {
  auto cfg = [](LossKind k) {
    ExperimentConfig c = base("linear", k);
    c.split.train_count = 3000;
    c.batch_size = 7;
    c.batch_count = 1000;
    c.epochs = 200;
    c.eval_every = 200;
    return c;
  };
  const double rlp = final_test_mse(cfg(LossKind::rlp));
  const double mse = final_test_mse(cfg(LossKind::mse));
  const bool ok = rlp < 1e-4 && mse > 0.05;
  return {ok ? Outcome::pass : Outcome::fail,
          "linear |J|=3000: rlp test_mse " + fmt(rlp) + " (need < 1e-4), mse test_mse " + fmt(mse) + " (need > 0.05)"};
}

Verdict c2() {
  auto cfg = [](LossKind k) {
    ExperimentConfig c = base("linear", k);
    c.split.train_count = 50;
    c.eval_every = 200;
    return c;
  };
  const double rlp = final_test_mse(cfg(LossKind::rlp));
  const double mse = final_test_mse(cfg(LossKind::mse));
  const bool ok = rlp < 5e-3 && mse > 0.3;
  return {ok ? Outcome::pass : Outcome::fail,
          "linear |J|=50: rlp test_mse " + fmt(rlp) + " (need < 5e-3), mse test_mse " + fmt(mse) + " (need > 0.3)"};
}

Verdict c3() {
  if (!fs::exists(data_root() / "cal_housing" / "cal_housing.csv")) {
    return {Outcome::skip, "cal_housing/cal_housing.csv not found under " + data_root().string()};
  }
  auto cfg = [](LossKind k) {
    ExperimentConfig c = base("cal_housing", k);
    c.epochs = 500;
    c.eval_every = 500;
    return c;
  };
  const double rlp = final_test_mse(cfg(LossKind::rlp));
  const double mse = final_test_mse(cfg(LossKind::mse));
  const bool ok = rlp >= 0.3 && rlp <= 0.9 && rlp < mse;
  return {ok ? Outcome::pass : Outcome::fail,
          "california housing: rlp test_mse " + fmt(rlp) + " (need in [0.3, 0.9]), mse test_mse " + fmt(mse)};
}

// First epoch whose test MSE is at or below the threshold, 0 if none.
std::size_t first_reaching(const std::vector<MetricsRecord>& records, double threshold) {
  for (const auto& r : records) {
    if (r.test_mse <= threshold) return r.epoch;
  }
  return 0;
}

Verdict c4() {
  const std::string red = "wine/winequality-red.csv";
  if (!fs::exists(data_root() / red)) return {Outcome::skip, red + " not found under " + data_root().string()};
  auto cfg = [&](LossKind k, std::size_t epochs) {
    ExperimentConfig c = base("wine", k);
    c.dataset.paths = {red};
    c.dataset.standardize = false;
    c.batch_size = 40;
    c.epochs = epochs;
    return c;
  };
  const auto rlp = run_experiment(cfg(LossKind::rlp, 20)).run.records;
  const auto mse = run_experiment(cfg(LossKind::mse, 100)).run.records;
  const std::size_t rlp_hit = first_reaching(rlp, 0.6);
  const std::size_t mse_hit = first_reaching(mse, 0.6);
  double mse_best = std::numeric_limits<double>::infinity();
  for (const auto& r : mse) mse_best = std::min(mse_best, r.test_mse);
  const bool ok = rlp_hit != 0 && (mse_hit == 0 || mse_hit >= 100);
  return {ok ? Outcome::pass : Outcome::fail,
          "red wine: rlp reaches 0.6 at epoch " + (rlp_hit ? std::to_string(rlp_hit) : std::string("never")) +
              " of 20 (test_mse " + fmt(rlp.back().test_mse) + "), mse best over 100 epochs " + fmt(mse_best) +
              (mse_hit ? " first <= 0.6 at epoch " + std::to_string(mse_hit) : std::string(", never <= 0.6"))};
}

Verdict c5() {
  using namespace rlp::testing;
  double worst = 0.0;
  std::size_t pairs = 0;
  std::string worst_case = "none";
  for (const Arch a : kArchs) {
    for (const GateLoss l : kGateLosses) {
      if (!applicable(a, l)) continue;
      ++pairs;
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const GateResult r = gradient_gate(a, l, seed);
        if (r.worst > worst) {
          worst = r.worst;
          worst_case = name_of(a) + "/" + name_of(l) + " seed " + std::to_string(seed);
        }
      }
    }
  }
  return {worst < 1e-5 ? Outcome::pass : Outcome::fail,
          std::to_string(pairs) + " architecture x loss pairs x 3 seeds, worst relative error " + fmt(worst) + " (" +
              worst_case + ")"};
}

Verdict c6() {
  const auto r = rlp::testing::check_batch_contract(100, 2024);
  return {r.failures == 0 ? Outcome::pass : Outcome::fail,
          std::to_string(r.triples) + " triples, " + std::to_string(r.coverage_checked) + " with coverage checked, " +
              std::to_string(r.failures) + " failures" + (r.failures ? " (" + r.first_failure + ")" : "")};
}

Verdict c7() {
  const std::size_t trials = 2000;
  const CheckReport a = check_nonnegativity_and_zero(trials, 0);
  const CheckReport b = check_convexity_linear(trials, 0);
  const bool ok = a.status == CheckStatus::pass && b.status == CheckStatus::pass && a.violations == 0 &&
                  b.violations == 0 && a.instances >= 1000 && b.instances >= 1000;
  return {ok ? Outcome::pass : Outcome::fail,
          a.name + " " + std::to_string(a.violations) + "/" + std::to_string(a.instances) + " violations, " + b.name +
              " " + std::to_string(b.violations) + "/" + std::to_string(b.instances) + " violations"};
}

// Runs rlp and mse on the nonlinear dataset for each axis value and checks
// rlp <= mse everywhere.
Verdict ordering(const std::string& axis, const std::vector<double>& values,
                 const std::function<void(ExperimentConfig&, double)>& set) {
  bool ok = true;
  std::string details = "nonlinear";
  for (const double v : values) {
    ExperimentConfig r = base("nonlinear", LossKind::rlp);
    r.eval_every = 200;
    set(r, v);
    ExperimentConfig m = r;
    m.loss = LossKind::mse;
    const double rlp = final_test_mse(r);
    const double mse = final_test_mse(m);
    ok = ok && rlp <= mse;
    details += ", " + axis + "=" + fmt(v) + ": rlp " + fmt(rlp) + (rlp <= mse ? " <= " : " > ") + "mse " + fmt(mse);
  }
  return {ok ? Outcome::pass : Outcome::fail, details};
}

Verdict c8() {
  return ordering("beta", {0.1, 0.5, 0.9}, [](ExperimentConfig& c, double b) { c.noise_beta = b; });
}

Verdict c9() {
  return ordering("gamma", {0.1, 0.5, 0.9}, [](ExperimentConfig& c, double g) {
    c.split.mode = SplitMode::biased;
    c.split.gamma = g;
  });
}

Verdict c10() {
  const fs::path train = data_root() / "mnist" / "train-images-idx3-ubyte";
  const fs::path test = data_root() / "mnist" / "t10k-images-idx3-ubyte";
  if (!fs::exists(train) || !fs::exists(test)) return {Outcome::skip, "mnist IDX files not found under " + data_root().string()};
  auto cfg = [](LossKind k) {
    ExperimentConfig c = base("mnist", k);
    c.split.train_count = 50;
    c.epochs = 50;
    c.eval_every = 50;
    c.checkpoint_epochs = {5, 10, 50};
    return c;
  };
  const fs::path out = fs::temp_directory_path() / "rlp_acceptance_mnist";
  fs::remove_all(out);
  const double rlp = cli::cmd_train(cfg(LossKind::rlp), out / "rlp").run.records.back().test_mse;
  const double mse = cli::cmd_train(cfg(LossKind::mse), out / "mse").run.records.back().test_mse;
  const auto strips = cli::cmd_reconstruct(out / "rlp", cfg(LossKind::rlp), out / "recon", {5, 10, 50});
  bool dumps = strips.size() == 3;
  for (const auto& p : strips) dumps = dumps && fs::file_size(p) > 0;
  const bool ok = rlp < 0.5 * mse && dumps;
  return {ok ? Outcome::pass : Outcome::fail,
          "mnist |J|=50: rlp test_mse " + fmt(rlp) + ", mse test_mse " + fmt(mse) + " (need rlp < " + fmt(0.5 * mse) +
              "), P2 dumps " + (dumps ? "written to " + (out / "recon").string() : std::string("missing"))};
}

const std::vector<std::function<Verdict()>> kCriteria = {c1, c2, c3, c4, c5, c6, c7, c8, c9, c10};

int run(std::size_t n) {
  Verdict v;
  try {
    v = kCriteria.at(n - 1)();
  } catch (const std::exception& e) {
    v = {Outcome::fail, std::string("error: ") + e.what()};
  }
  const char* tag = v.outcome == Outcome::pass ? "PASS" : v.outcome == Outcome::fail ? "FAIL" : "SKIP";
  std::cout << "criterion " << n << ": " << tag << " " << v.details << std::endl;
  return v.outcome == Outcome::pass ? 0 : v.outcome == Outcome::fail ? 1 : 77;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 2) {
    std::cerr << "usage: acceptance [criterion 1-" << kCriteria.size() << "]\n";
    return 2;
  }
  if (argc == 2) {
    const long n = std::strtol(argv[1], nullptr, 10);
    if (n < 1 || n > static_cast<long>(kCriteria.size())) {
      std::cerr << "criterion must be 1-" << kCriteria.size() << "\n";
      return 2;
    }
    return run(static_cast<std::size_t>(n));
  }
  int worst = 0;
  for (std::size_t n = 1; n <= kCriteria.size(); ++n) {
    const int rc = run(n);
    if (rc == 1) worst = 1;
  }
  return worst;
}
