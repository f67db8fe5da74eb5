#pragma once

#include <cstdint>
#include <random>

#include "hkl/types.hpp"

namespace hkl::harness {

struct SyntheticSpec {
  int p = 16;
  int r = 2;
  int n = 400;
  double snr = 4.0;
  std::uint64_t seed = 1;
  /// Extra rows drawn from the same distribution for testing.
  int n_test = 0;

  void validate() const;
};

struct SyntheticData {
  Matrix sigma;
  Matrix x;
  Vector y;
  Vector f;
  Matrix x_test;
  Vector y_test;
  Vector f_test;
  double noise_std = 0.0;
};

/// Wishart(p, dof) draw with identity scale, by the Bartlett decomposition.
Matrix sample_wishart(int p, int dof, std::mt19937_64& rng);

/// Sum of all pairwise products of the first r columns.
Vector interaction_signal(const Matrix& x, int r);

/// Covariance from a Wishart(p, 2p) draw rescaled to unit diagonal, Gaussian
/// rows, y = f(X) + noise with Var(noise) = Var(f(X)) / snr. Deterministic in
/// the seed.
SyntheticData gen_synthetic(const SyntheticSpec& spec);

}  // namespace hkl::harness
