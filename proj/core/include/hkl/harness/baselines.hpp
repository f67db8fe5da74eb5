#pragma once

#include <cstdint>
#include <vector>

#include "hkl/engine.hpp"

namespace hkl::harness {

/// Single kernel learning with the full kernel prod_i sum_j k_ij. The model
/// carries one node and predicts through its cross-gram hook.
HklModel l2_full_fit(const Matrix& x, const Vector& y, const FitConfig& config);
/// Same fit from precomputed pieces: `z` are the inputs standardized by `st`
/// and `k` = full_kernel_gram(family, z, z).
HklModel l2_full_fit(const KernelFamily& family, const Standardizer& st, const Matrix& z, const Matrix& k,
                     const Vector& y, const FitConfig& config);
/// prod_i k_i(za_i, zb_i) with k_i the closed-form univariate kernel.
Matrix full_kernel_gram(const KernelFamily& family, const Matrix& za, const Matrix& zb);

/// Sparse generalized additive model: kernel search on the edgeless DAG whose
/// vertex i carries sum_{j >= 1} of the univariate kernels of variable i.
HklModel flat_mkl_fit(const Matrix& x, const Vector& y, const FitConfig& config, FitReport* report = nullptr,
                      const WarmStart* warm = nullptr);

struct GreedyOptions {
  /// Share of the rows held out to decide whether a candidate helps.
  double validation_fraction = 0.2;
  std::uint64_t seed = 0;
  /// Scale each added kernel by d_w^{-2} (the weights of the configured
  /// scheme) instead of summing them with unit weights.
  bool depth_weighted = true;
};

struct GreedyTrace {
  std::vector<VertexSet> hull_trace;
  /// Held-out score of each accepted W, starting with the sources.
  std::vector<double> validation_trace;
};

/// Forward selection on the grid DAG under the hull constraint: starting from
/// the sources, add the frontier vertex whose kernel gives the best held-out
/// score for the sum over W, until no candidate improves it or |W| reaches
/// q_max. The final W is refitted on all rows.
HklModel greedy_forward_fit(const Matrix& x, const Vector& y, const FitConfig& config,
                            const GreedyOptions& options = {}, GreedyTrace* trace = nullptr);

/// Mean squared error, or the misclassification rate for classification losses.
double prediction_score(const Loss& loss, const Vector& truth, const Vector& scores);

/// Deterministic random permutation of 0..n-1.
std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed);

}  // namespace hkl::harness
