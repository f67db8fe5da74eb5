#pragma once

#include <string>
#include <vector>

#include "hkl/types.hpp"

namespace hkl {

enum class LossKind { least_squares, logistic, svr_1norm, svr_2norm, huber, svm_1norm, svm_2norm };

std::string to_string(LossKind kind);
/// Accepts both the CLI short names (ls, logistic, svr1, svr2, huber, svm1,
/// svm2) and the long enum spellings.
LossKind parse_loss_kind(const std::string& name);

/// A loss phi_i(u) = l(y_i, u) together with its Fenchel conjugate psi_i.
///
/// `smoothing` > 0 replaces the piecewise linear losses (svr_1norm,
/// svm_1norm) by their Moreau envelope with parameter `smoothing`; in the dual
/// this is the same as adding a ridge n*lambda*smoothing*I to the Gram matrix.
class Loss {
 public:
  explicit Loss(LossKind kind = LossKind::least_squares, double epsilon = 0.1,
                double smoothing = 0.0);

  LossKind kind() const { return kind_; }
  double epsilon() const { return epsilon_; }
  double smoothing() const { return smoothing_; }
  bool is_classification() const;
  bool has_epsilon() const;
  /// True when psi is strictly convex on its domain, rendering the dual
  /// solution unique. Smoothed 1-norm losses count as strictly convex.
  bool strictly_convex_conjugate() const;
  /// Returns a copy with Moreau smoothing `mu` (only meaningful for the
  /// 1-norm losses; other kinds are returned unchanged).
  Loss smoothed(double mu) const;

  void check_label(double y) const;

  double value(double y, double u) const;
  /// Right derivative of phi at u.
  double derivative(double y, double u) const;
  /// Left derivative of phi at u.
  double left_derivative(double y, double u) const;
  /// Generalized second derivative (right-sided at kinks).
  double curvature(double y, double u) const;
  /// psi(beta); +infinity outside the domain.
  double conjugate(double y, double beta) const;

  /// Kinks of phi(y, .) in u, appended to `out`. Empty for smooth losses.
  void kinks(double y, std::vector<double>& out) const;

 private:
  LossKind kind_;
  double epsilon_;
  double smoothing_;
};

/// (1/n) sum_i phi_i(u_i).
double empirical_risk(const Loss& loss, const Vector& y, const Vector& u);

/// b*(u) = argmin_b (1/n) sum_i phi_i(u_i + b).
///
/// Closed form for least squares, safeguarded Newton for logistic, and an
/// exact breakpoint search for the piecewise quadratic losses.
double intercept(const Loss& loss, const Vector& y, const Vector& u);

}  // namespace hkl
