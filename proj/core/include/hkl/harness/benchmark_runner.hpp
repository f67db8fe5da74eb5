#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hkl/harness/cross_validation.hpp"

namespace hkl::harness {

/// Synthetic comparison protocol. Replicate k of every setting uses seed + k
/// for data generation and fold assignment.
struct BenchConfig {
  std::vector<Method> methods{Method::hkl, Method::l2, Method::greedy};
  std::vector<int> p_values{8, 16, 32};
  int n = 400;
  int r = 2;
  double snr = 4.0;
  int replicates = 10;
  /// Rows drawn for the test set of each replicate.
  int n_test = 1000;
  std::uint64_t seed = 1;
  std::vector<double> lambda_grid = default_lambda_grid();
  std::vector<double> beta_grid = default_beta_grid();
  int folds = 10;
  int max_folds = 0;
  KernelKind kernel = KernelKind::hermite;
  KernelParams kernel_params;
  Loss loss;
  double eps_gap = 1e-3;
  std::size_t q_max = 100;
  /// Concurrent (method, p, replicate) jobs; 0 means hardware concurrency.
  std::size_t threads = 0;

  void validate() const;
  static BenchConfig from_toml_file(const std::filesystem::path& path);
  static BenchConfig from_toml_string(const std::string& text);
};

struct ResultRow {
  Method method = Method::hkl;
  int p = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double test_mse = 0.0;  // misclassification rate for classification losses
  double cv_score = 0.0;
  double lambda = 0.0;
  double beta = 0.0;
  std::size_t w_size = 0;
  /// Seconds; reported in the log only, so result files stay reproducible.
  double wall_time = 0.0;
};

struct SummaryRow {
  Method method = Method::hkl;
  int p = 0;
  std::size_t count = 0;
  double median = 0.0;
  double lower_quartile = 0.0;
  double upper_quartile = 0.0;
};

struct ResultsTable {
  std::vector<ResultRow> rows;  // ordered by (method, p, replicate) as configured

  bool all_ok() const;
  std::vector<SummaryRow> summary() const;
  std::string to_csv() const;
  std::string to_json() const;
  std::string summary_csv() const;
};

/// Quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double prob);

/// One (method, p, replicate) run: generate data, cross-validate, score on the test rows.
ResultRow run_single(const BenchConfig& config, Method method, int p, int replicate);

/// Runs every job on a bounded pool and merges rows by key. When `out_dir`
/// is nonempty, writes results.csv, results.json, summary.csv and bench.log
/// there; completed rows are written even if some runs fail.
ResultsTable run_benchmark(const BenchConfig& config, const std::filesystem::path& out_dir = {},
                           std::ostream* progress = nullptr);

}  // namespace hkl::harness
