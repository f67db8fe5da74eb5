#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hkl/engine.hpp"
#include "hkl/harness/baselines.hpp"

namespace hkl::harness {

enum class Method { hkl, l2, greedy, mkl };

std::string to_string(Method method);
Method parse_method(const std::string& name);

/// Nine log-spaced values from 1 down to 1e-4.
std::vector<double> default_lambda_grid();
std::vector<double> default_beta_grid();

struct CvOptions {
  std::vector<double> lambda_grid = default_lambda_grid();
  /// Only HKL depends on beta; the other methods use the first entry.
  std::vector<double> beta_grid = default_beta_grid();
  int folds = 10;
  /// Evaluate only the first `max_folds` folds of the partition (0 means all).
  int max_folds = 0;
  std::uint64_t seed = 0;
  /// Worker threads for the (beta, fold) jobs; 0 means hardware concurrency.
  std::size_t threads = 1;
  GreedyOptions greedy;
};

struct CvPoint {
  double beta = 0.0;
  double lambda = 0.0;
  double score = 0.0;  // mean validation score over the evaluated folds
};

struct CvResult {
  double lambda = 0.0;
  double beta = 0.0;
  double score = 0.0;
  std::vector<CvPoint> table;
  /// Refit on all rows at the selected point.
  HklModel model;
};

/// Disjoint folds covering 0..n-1 with sizes differing by at most one.
std::vector<std::vector<std::size_t>> make_folds(std::size_t n, int folds, std::uint64_t seed);

/// Fits `method` once with the configuration as given.
HklModel fit_method(Method method, const Matrix& x, const Vector& y, const FitConfig& config,
                    const GreedyOptions& greedy = {}, const WarmStart* warm = nullptr);

/// Two loops of k-fold cross-validation: beta outside, lambda inside along a
/// decreasing path with warm starts. Returns the argmin of the mean
/// validation score (first in grid order on ties) and the model refitted on
/// all rows, along the same warm-started path for the path-dependent methods.
CvResult cross_validate(const Matrix& x, const Vector& y, Method method, const FitConfig& base,
                        const CvOptions& options);

}  // namespace hkl::harness
