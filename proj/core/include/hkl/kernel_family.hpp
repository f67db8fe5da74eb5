#pragma once

#include <limits>
#include <string>
#include <vector>

#include "hkl/types.hpp"

namespace hkl {

enum class KernelKind { polynomial, gauss_hermite, all_subset_gaussian, spline, hermite };

std::string to_string(KernelKind kind);
/// Accepts the CLI names (poly, hermite, gauss-hermite, all-subset-gauss,
/// spline) as well as the enum spellings.
KernelKind parse_kernel_kind(const std::string& name);

/// Raw user parameters. NaN means "use the family default".
struct KernelParams {
  int q = 3;
  double b = std::numeric_limits<double>::quiet_NaN();
  double a = std::numeric_limits<double>::quiet_NaN();
  double alpha = std::numeric_limits<double>::quiet_NaN();
};

/// One-dimensional kernel decomposition k(x, x') = sum_{j=0}^{q} k_j(x, x').
///
/// Blocks j < q are rank one, k_j(x, x') = phi_j(x) phi_j(x'); the last block
/// is either rank one too (polynomial) or the closed form minus the partial
/// sum, so the decomposition is exact by construction.
class KernelFamily {
 public:
  /// `p` is only consulted for defaults that scale with the dimension.
  KernelFamily(KernelKind kind, KernelParams params, int p);

  KernelKind kind() const { return kind_; }
  /// Resolved parameters (defaults filled in, q forced for fixed-order kinds).
  const KernelParams& params() const { return params_; }
  int q() const { return params_.q; }

  /// Writes phi_0(x) .. phi_{q-1}(x) into `phi`.
  void features(double x, double* phi) const;
  /// True when block j factors as f_j(x) f_j(x'); see feature().
  bool rank_one_block(int j) const { return j < params_.q || kind_ == KernelKind::polynomial; }
  /// f_j(x) for a rank-one block j.
  double feature(int j, double x) const;
  /// k_q(x, x') given the precomputed features of both points.
  double last_block(double x, double xp, const double* phi_x, const double* phi_xp) const;
  /// All q+1 block values at (x, x').
  std::vector<double> blocks(double x, double xp) const;
  /// The undecomposed one-dimensional kernel.
  double closed_form(double x, double xp) const;

 private:
  KernelKind kind_;
  KernelParams params_;
  // gauss_hermite constants
  double gh_scale_ = 0, gh_gamma_ = 0, gh_ratio_ = 0, gh_arg_ = 0;
  std::vector<double> binom_sqrt_;
};

/// Per-column affine map to zero mean and unit (population) variance.
struct Standardizer {
  Vector mean;
  Vector scale;

  static Standardizer fit(const Matrix& x);
  static Standardizer identity(int p);
  Matrix apply(const Matrix& x) const;
};

}  // namespace hkl
