// Command line front end: fit, predict, gen, cv and bench.

#include <cmath>
#include <cstdio>
#include <exception>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hkl/engine.hpp"
#include "hkl/error.hpp"
#include "hkl/harness/benchmark_runner.hpp"
#include "hkl/harness/csv.hpp"
#include "hkl/harness/cross_validation.hpp"
#include "hkl/harness/synthetic.hpp"
#include "hkl/model_io.hpp"

namespace {

using hkl::harness::Method;

struct FitFlags {
  std::string data;
  std::string target;
  bool header = false;
  double lambda = 1e-2;
  double eps_gap = 1e-3;
  std::size_t q_max = 100;
  double beta = 2.0;
  double d_r = 1.0;
  std::string loss = "ls";
  double epsilon = 0.1;
  std::string kernel = "hermite";
  int q = 3;
  double kernel_a = std::numeric_limits<double>::quiet_NaN();
  double kernel_b = std::numeric_limits<double>::quiet_NaN();
  double kernel_alpha = std::numeric_limits<double>::quiet_NaN();
  double eps_smooth = 1e-3;
  double inner_tol = 0.0;
  int max_inner_iter = 500;
  std::string out;
};

void add_fit_flags(CLI::App* cmd, FitFlags& f, bool with_lambda) {
  cmd->add_option("--data", f.data, "Input matrix CSV, one row per sample")->required()->check(CLI::ExistingFile);
  cmd->add_option("--target", f.target, "Single-column target CSV")->required()->check(CLI::ExistingFile);
  cmd->add_flag("--header", f.header, "Skip the first line of every CSV");
  if (with_lambda) cmd->add_option("--lambda", f.lambda, "Regularization parameter")->capture_default_str();
  cmd->add_option("--eps-gap", f.eps_gap, "Target duality gap epsilon")->capture_default_str();
  cmd->add_option("--q-max", f.q_max, "Maximal number of active kernels")->capture_default_str();
  if (with_lambda) cmd->add_option("--beta", f.beta, "Depth weight base, d_v = beta^depth")->capture_default_str();
  cmd->add_option("--dr", f.d_r, "Weight of the source vertices")->capture_default_str();
  cmd->add_option("--loss", f.loss, "Loss function")
      ->check(CLI::IsMember({"ls", "logistic", "svr1", "svr2", "huber", "svm1", "svm2"}))
      ->capture_default_str();
  cmd->add_option("--epsilon", f.epsilon, "Insensitivity (svr) or threshold (huber)")->capture_default_str();
  cmd->add_option("--kernel", f.kernel, "Kernel family")
      ->check(CLI::IsMember({"poly", "hermite", "gauss-hermite", "all-subset-gauss", "spline"}))
      ->capture_default_str();
  cmd->add_option("--q", f.q, "Maximal per-variable order")->capture_default_str();
  cmd->add_option("--kernel-a", f.kernel_a, "Gauss-Hermite parameter a");
  cmd->add_option("--kernel-b", f.kernel_b, "Kernel parameter b");
  cmd->add_option("--kernel-alpha", f.kernel_alpha, "Kernel parameter alpha");
  cmd->add_option("--eps-smooth", f.eps_smooth, "Initial smoothing of the weight problem")->capture_default_str();
  cmd->add_option("--inner-tol", f.inner_tol, "Gap tolerance of the reduced problems (0: eps-gap)")
      ->capture_default_str();
  cmd->add_option("--max-inner-iter", f.max_inner_iter, "Iteration cap of the reduced problems")
      ->capture_default_str();
  cmd->add_option("--out", f.out, "Output model JSON")->required();
}

hkl::FitConfig make_config(const FitFlags& f) {
  hkl::FitConfig c;
  c.lambda = f.lambda;
  c.eps_gap = f.eps_gap;
  c.q_max = f.q_max;
  c.weights.beta = f.beta;
  c.weights.d_r = f.d_r;
  c.loss = hkl::Loss(hkl::parse_loss_kind(f.loss), f.epsilon);
  c.kernel = hkl::parse_kernel_kind(f.kernel);
  c.kernel_params.q = f.q;
  c.kernel_params.a = f.kernel_a;
  c.kernel_params.b = f.kernel_b;
  c.kernel_params.alpha = f.kernel_alpha;
  c.inner.eps_smooth = f.eps_smooth;
  c.inner.tol = f.inner_tol;
  c.inner.max_iter = f.max_inner_iter;
  return c;
}

void report_model(const hkl::HklModel& m) {
  std::printf("|W| = %zu (active %zu), objective = %.10g, gap bound = %.3g, certified = %s\n", m.w.size(),
              m.w_active.size(), m.objective, m.gap, m.gap_certified ? "yes" : "no");
  if (!m.gap_certified)
    std::fprintf(stderr, "warning: the duality gap is not certified below 2 eps-gap (raise --q-max or lambda)\n");
}

std::vector<double> parse_grid(const std::string& text, const char* name) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find(',', start);
    const std::string item = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw hkl::InvalidArgument(std::string("cannot parse ") + name + " entry '" + item + "'");
    }
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical kernel learning"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "hkl 0.1.0");

  FitFlags fit_flags;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit a model at one lambda");
  add_fit_flags(fit_cmd, fit_flags, true);

  std::string model_path, predict_data, predict_out;
  bool predict_header = false;
  CLI::App* predict_cmd = app.add_subcommand("predict", "Predict with a saved model");
  predict_cmd->add_option("--model", model_path, "Model JSON")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--data", predict_data, "Input matrix CSV")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--out", predict_out, "Output CSV of predictions")->required();
  predict_cmd->add_flag("--header", predict_header, "Skip the first line of the input CSV");

  hkl::harness::SyntheticSpec gen_spec;
  std::string gen_x, gen_y, gen_x_test, gen_y_test;
  CLI::App* gen_cmd = app.add_subcommand("gen", "Generate synthetic interaction data");
  gen_cmd->add_option("--p", gen_spec.p, "Input dimension")->capture_default_str();
  gen_cmd->add_option("--r", gen_spec.r, "Number of interacting variables")->capture_default_str();
  gen_cmd->add_option("--n", gen_spec.n, "Number of samples")->capture_default_str();
  gen_cmd->add_option("--snr", gen_spec.snr, "Signal to noise ratio")->capture_default_str();
  gen_cmd->add_option("--seed", gen_spec.seed, "Random seed")->capture_default_str();
  gen_cmd->add_option("--n-test", gen_spec.n_test, "Extra test rows from the same distribution");
  gen_cmd->add_option("--out-x", gen_x, "Output input matrix CSV")->required();
  gen_cmd->add_option("--out-y", gen_y, "Output target CSV")->required();
  gen_cmd->add_option("--out-x-test", gen_x_test, "Output test inputs (with --n-test)");
  gen_cmd->add_option("--out-y-test", gen_y_test, "Output test targets (with --n-test)");

  FitFlags cv_flags;
  std::string cv_method = "hkl", lambda_grid, beta_grid;
  int folds = 10;
  std::uint64_t cv_seed = 0;
  std::size_t cv_threads = 0;
  CLI::App* cv_cmd = app.add_subcommand("cv", "Select lambda and beta by cross-validation, then refit");
  add_fit_flags(cv_cmd, cv_flags, false);
  cv_cmd->add_option("--method", cv_method, "Method to tune")
      ->check(CLI::IsMember({"hkl", "greedy"}))
      ->capture_default_str();
  cv_cmd->add_option("--lambda-grid", lambda_grid, "Comma separated lambda values (default 1 .. 1e-4)");
  cv_cmd->add_option("--beta-grid", beta_grid, "Comma separated beta values (default 1.5,2,4)");
  cv_cmd->add_option("--folds", folds, "Number of folds")->capture_default_str();
  cv_cmd->add_option("--seed", cv_seed, "Fold assignment seed")->capture_default_str();
  cv_cmd->add_option("--threads", cv_threads, "Worker threads (0: all cores)")->capture_default_str();

  std::string bench_config, bench_out;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Run a benchmark described by a TOML file");
  bench_cmd->add_option("--config", bench_config, "Benchmark TOML")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("--out-dir", bench_out, "Directory for results.csv, results.json and the log")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit_cmd) {
      const hkl::Matrix x = hkl::harness::read_matrix_csv(fit_flags.data, fit_flags.header);
      const hkl::Vector y = hkl::harness::read_vector_csv(fit_flags.target, fit_flags.header);
      const hkl::HklModel model = hkl::fit(x, y, make_config(fit_flags));
      hkl::save_model(model, fit_flags.out);
      report_model(model);
    } else if (*predict_cmd) {
      const hkl::HklModel model = hkl::load_model(model_path);
      const hkl::Matrix x = hkl::harness::read_matrix_csv(predict_data, predict_header);
      hkl::harness::write_vector_csv(predict_out, hkl::predict(model, x));
    } else if (*gen_cmd) {
      if (gen_spec.n_test > 0 && (gen_x_test.empty() || gen_y_test.empty()))
        throw hkl::InvalidArgument("--n-test needs --out-x-test and --out-y-test");
      const hkl::harness::SyntheticData data = hkl::harness::gen_synthetic(gen_spec);
      hkl::harness::write_matrix_csv(gen_x, data.x);
      hkl::harness::write_vector_csv(gen_y, data.y);
      if (gen_spec.n_test > 0) {
        hkl::harness::write_matrix_csv(gen_x_test, data.x_test);
        hkl::harness::write_vector_csv(gen_y_test, data.y_test);
      }
    } else if (*cv_cmd) {
      const hkl::Matrix x = hkl::harness::read_matrix_csv(cv_flags.data, cv_flags.header);
      const hkl::Vector y = hkl::harness::read_vector_csv(cv_flags.target, cv_flags.header);
      hkl::harness::CvOptions opts;
      if (!lambda_grid.empty()) opts.lambda_grid = parse_grid(lambda_grid, "lambda grid");
      if (!beta_grid.empty()) opts.beta_grid = parse_grid(beta_grid, "beta grid");
      opts.folds = folds;
      opts.seed = cv_seed;
      opts.threads = cv_threads;
      opts.greedy.seed = cv_seed;
      const hkl::FitConfig base = make_config(cv_flags);
      const auto res = hkl::harness::cross_validate(x, y, hkl::harness::parse_method(cv_method), base, opts);
      hkl::save_model(res.model, cv_flags.out);
      std::printf("selected lambda = %.6g, beta = %.6g, cv score = %.6g\n", res.lambda, res.beta, res.score);
      report_model(res.model);
    } else if (*bench_cmd) {
      const auto config = hkl::harness::BenchConfig::from_toml_file(bench_config);
      const auto table = hkl::harness::run_benchmark(config, bench_out, &std::cout);
      std::cout << table.summary_csv();
      return table.all_ok() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
