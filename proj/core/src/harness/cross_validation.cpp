#include "hkl/harness/cross_validation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "hkl/error.hpp"
#include "hkl/kernel_atlas.hpp"

namespace hkl::harness {
namespace {

std::vector<double> decreasing_unique(std::vector<double> grid, const char* name) {
  if (grid.empty()) throw InvalidArgument(std::string(name) + " grid is empty");
  for (double v : grid)
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(name) + " grid values must be positive");
  std::sort(grid.begin(), grid.end(), std::greater<>());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

Matrix rows_of(const Matrix& x, const std::vector<std::size_t>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t a = 0; a < idx.size(); ++a) out.row(static_cast<Eigen::Index>(a)) = x.row(static_cast<Eigen::Index>(idx[a]));
  return out;
}

Vector rows_of(const Vector& y, const std::vector<std::size_t>& idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t a = 0; a < idx.size(); ++a) out[static_cast<Eigen::Index>(a)] = y[static_cast<Eigen::Index>(idx[a])];
  return out;
}

// Runs jobs 0..count-1 on a bounded pool; the first failure is rethrown.
void run_jobs(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& job) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::hkl: return "hkl";
    case Method::l2: return "l2";
    case Method::greedy: return "greedy";
    case Method::mkl: return "mkl";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "hkl") return Method::hkl;
  if (name == "l2") return Method::l2;
  if (name == "greedy") return Method::greedy;
  if (name == "mkl") return Method::mkl;
  throw InvalidArgument("unknown method '" + name + "' (expected hkl, l2, greedy or mkl)");
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 8; ++k) grid.push_back(std::pow(10.0, -0.5 * k));
  return grid;
}

std::vector<double> default_beta_grid() { return {1.5, 2.0, 4.0}; }

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, int folds, std::uint64_t seed) {
  if (folds < 2) throw InvalidArgument("at least two folds are required");
  if (n < static_cast<std::size_t>(folds)) throw InvalidArgument("fewer rows than folds");
  const std::vector<std::size_t> perm = permutation(n, seed);
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < n; ++i) out[i % out.size()].push_back(perm[i]);
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

HklModel fit_method(Method method, const Matrix& x, const Vector& y, const FitConfig& config,
                    const GreedyOptions& greedy, const WarmStart* warm) {
  switch (method) {
    case Method::hkl: return fit(x, y, config, nullptr, warm);
    case Method::l2: return l2_full_fit(x, y, config);
    case Method::greedy: return greedy_forward_fit(x, y, config, greedy);
    case Method::mkl: return flat_mkl_fit(x, y, config, nullptr, warm);
  }
  throw InvalidArgument("unknown method");
}

CvResult cross_validate(const Matrix& x, const Vector& y, Method method, const FitConfig& base,
                        const CvOptions& options) {
  if (x.rows() != y.size()) throw InvalidArgument("X and y differ in the number of rows");
  const std::vector<double> lambdas = decreasing_unique(options.lambda_grid, "lambda");
  std::vector<double> betas = options.beta_grid;
  if (betas.empty()) throw InvalidArgument("beta grid is empty");
  // Deduplicate while keeping the given order of the outer loop.
  std::vector<double> unique_betas;
  for (double b : betas)
    if (std::find(unique_betas.begin(), unique_betas.end(), b) == unique_betas.end()) unique_betas.push_back(b);
  if (method != Method::hkl) unique_betas.resize(1);

  const auto folds = make_folds(static_cast<std::size_t>(x.rows()), options.folds, options.seed);
  std::size_t used = folds.size();
  if (options.max_folds > 0) used = std::min<std::size_t>(used, static_cast<std::size_t>(options.max_folds));

  // scores[(beta, fold)][lambda]
  std::vector<std::vector<double>> scores(unique_betas.size() * used, std::vector<double>(lambdas.size(), 0.0));
  std::vector<std::shared_ptr<const KernelAtlas>> atlases(used);
  std::vector<Standardizer> standardizers(used);
  std::vector<std::once_flag> atlas_once(used);

  run_jobs(unique_betas.size() * used, options.threads, [&](std::size_t job) {
    const std::size_t bi = job / used;
    const std::size_t fi = job % used;
    std::vector<std::size_t> train;
    for (std::size_t g = 0; g < folds.size(); ++g)
      if (g != fi) train.insert(train.end(), folds[g].begin(), folds[g].end());
    std::sort(train.begin(), train.end());
    const Matrix x_tr = rows_of(x, train);
    const Vector y_tr = rows_of(y, train);
    const Matrix x_val = rows_of(x, folds[fi]);
    const Vector y_val = rows_of(y, folds[fi]);

    FitConfig cfg = base;
    cfg.weights.beta = unique_betas[bi];
    std::unique_ptr<GridKernelSource> source;
    if (method == Method::hkl) {
      std::call_once(atlas_once[fi], [&] {
        standardizers[fi] = cfg.standardize ? Standardizer::fit(x_tr) : Standardizer::identity(static_cast<int>(x.cols()));
        KernelFamily family(cfg.kernel, cfg.kernel_params, static_cast<int>(x.cols()));
        atlases[fi] = std::make_shared<const KernelAtlas>(standardizers[fi].apply(x_tr), family);
      });
      source = std::make_unique<GridKernelSource>(atlases[fi], cfg.weights, cfg.dense_cap);
    }
    // The l2 Gram does not depend on lambda.
    std::optional<KernelFamily> l2_family;
    Standardizer l2_st;
    Matrix l2_z, l2_k;
    if (method == Method::l2) {
      l2_st = cfg.standardize ? Standardizer::fit(x_tr) : Standardizer::identity(static_cast<int>(x.cols()));
      l2_family.emplace(cfg.kernel, cfg.kernel_params, static_cast<int>(x.cols()));
      l2_z = l2_st.apply(x_tr);
      l2_k = full_kernel_gram(*l2_family, l2_z, l2_z);
    }
    std::optional<WarmStart> warm;
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
      cfg.lambda = lambdas[li];
      try {
        HklModel m;
        if (method == Method::hkl) {
          m = fit(*source, standardizers[fi], y_tr, cfg, nullptr, warm ? &*warm : nullptr);
        } else if (method == Method::l2) {
          m = l2_full_fit(*l2_family, l2_st, l2_z, l2_k, y_tr, cfg);
        } else {
          m = fit_method(method, x_tr, y_tr, cfg, options.greedy, warm ? &*warm : nullptr);
        }
        if (method == Method::hkl || method == Method::mkl) warm = m.warm_start();
        scores[job][li] = prediction_score(cfg.loss, y_val, decision_function(m, x_val));
      } catch (const std::exception& e) {
        std::ostringstream msg;
        msg << "cross-validation fit failed (method " << to_string(method) << ", fold " << fi << ", beta "
            << cfg.weights.beta << ", lambda " << cfg.lambda << "): " << e.what();
        throw SolverError(msg.str());
      }
    }
  });

  CvResult result;
  bool have = false;
  for (std::size_t bi = 0; bi < unique_betas.size(); ++bi) {
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
      double mean = 0.0;
      for (std::size_t fi = 0; fi < used; ++fi) mean += scores[bi * used + fi][li];
      mean /= static_cast<double>(used);
      result.table.push_back({unique_betas[bi], lambdas[li], mean});
      if (!have || mean < result.score) {
        have = true;
        result.score = mean;
        result.beta = unique_betas[bi];
        result.lambda = lambdas[li];
      }
    }
  }
  FitConfig best = base;
  best.weights.beta = result.beta;
  if (method == Method::hkl || method == Method::mkl) {
    // Refit along the same warm-started path: with a finite q_max the
    // selected set depends on the path, so a cold fit could differ from what
    // the folds validated.
    std::shared_ptr<const KernelAtlas> atlas;
    std::unique_ptr<GridKernelSource> source;
    Standardizer st;
    if (method == Method::hkl) {
      st = best.standardize ? Standardizer::fit(x) : Standardizer::identity(static_cast<int>(x.cols()));
      atlas = std::make_shared<const KernelAtlas>(st.apply(x),
                                                  KernelFamily(best.kernel, best.kernel_params, static_cast<int>(x.cols())));
      source = std::make_unique<GridKernelSource>(atlas, best.weights, best.dense_cap);
    }
    std::optional<WarmStart> warm;
    for (double lambda : lambdas) {
      best.lambda = lambda;
      result.model = method == Method::hkl ? fit(*source, st, y, best, nullptr, warm ? &*warm : nullptr)
                                           : fit_method(method, x, y, best, options.greedy, warm ? &*warm : nullptr);
      warm = result.model.warm_start();
      if (lambda == result.lambda) break;
    }
  } else {
    best.lambda = result.lambda;
    result.model = fit_method(method, x, y, best, options.greedy);
  }
  return result;
}

}  // namespace hkl::harness
