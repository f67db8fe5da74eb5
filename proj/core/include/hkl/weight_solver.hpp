#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "hkl/dag.hpp"
#include "hkl/loss.hpp"
#include "hkl/single_solver.hpp"
#include "hkl/types.hpp"

namespace hkl {

/// A hull-closed vertex subset with its induced ancestor structure, indexed
/// 0..m-1 in a topological order.
struct ReducedDag {
  std::vector<Label> nodes;
  Vector d;
  std::vector<std::vector<std::size_t>> parents;
  std::vector<std::vector<std::size_t>> ancestors;    // includes self, ascending
  std::vector<std::vector<std::size_t>> descendants;  // includes self, ascending

  std::size_t size() const { return nodes.size(); }
  std::size_t index_of(const Label& v) const;

  /// Restriction of `dag` to `w`; ancestor sets are intersected with w.
  static ReducedDag from(const Dag& dag, const VertexSet& w, const WeightScheme& weights);
  /// Generic construction; parents must precede children in index order.
  static ReducedDag from_parents(std::vector<std::vector<std::size_t>> parents, Vector d);

 private:
  void close();
  std::map<Label, std::size_t> lookup_;
};

/// zeta_w^-1 = sum_{v in A(w)} eta_v^-1, and zeta_w = 0 once an ancestor has eta = 0.
Vector zeta_from_eta(const ReducedDag& dag, const Vector& eta);

/// eta_v = d_v^-1 ||f_D(v)|| / sum_w d_w ||f_D(w)||. All-zero norms give the
/// uniform point eta_v = d_v^-2 / m and set `degenerate`.
Vector optimal_eta_given_f(const Vector& norms, const Vector& d, bool* degenerate = nullptr);

/// Euclidean projection onto H = {eta >= 0, sum d_v^2 eta_v <= 1}.
Vector project_onto_H(const Vector& raw, const Vector& d);

/// Upper bound on the weight part of the duality gap, from two valid choices
/// of the split kappa_vw (sum_v kappa_vw = 1): the eta-proportional split
/// zeta_w / eta_v (falling back to the d-proportional split over zero-eta
/// ancestors) and the purely d-proportional split d_v / sum_{v' in A(w)} d_v'.
/// Returns min over both of [max_v d_v^-2 sum_{w in D(v)} kappa_vw^2 a_w]
/// minus sum_w zeta_w(eta) a_w.
double gap_weights_upper_bound(const Vector& a, const Vector& eta, const ReducedDag& dag);
/// The bracketed dual norm bound alone (the min over both splits).
double dual_norm_squared_bound(const Vector& a, const Vector& eta, const ReducedDag& dag);

struct WeightSolverOptions {
  double eps_smooth = 1e-3;
  double tol = 1e-3;
  int max_iter = 500;
  /// Divide eps_smooth by 10 whenever progress stalls above tol.
  bool continuation = true;
  double min_eps_smooth = 1e-9;
  /// Start each line search from a Barzilai-Borwein step instead of the
  /// doubled previous step.
  bool bb_steps = true;
  /// Also try the exact minimizer over eta of the variational bound at the
  /// current functions and keep whichever candidate is lower.
  bool block_steps = true;
  /// Skip the gradient step whenever the block step already decreased B.
  bool block_first = true;
  DualSolverOptions dual;
};

/// Value and eta-gradient of eta -> B(zeta((1-eps) eta + (eps/m) d^-2)).
struct BEvaluation {
  double value = 0.0;
  Vector gradient;
  Vector eta_smoothed;
  Vector zeta;
  Vector quadforms;  // a_w = alpha^T K~_w alpha
  DualSolution dual;
};

BEvaluation evaluate_B(const ReducedDag& dag, const std::vector<const Matrix*>& grams, const Vector& y,
                       double lambda, const Loss& loss, const Vector& eta, double eps_smooth,
                       const DualSolverOptions& dual_options = {}, const Vector* warm_alpha = nullptr);

struct WeightSolution {
  Vector eta;           // the optimization variable
  Vector eta_smoothed;  // where the dual was solved
  Vector zeta;          // zeta(eta_smoothed), the kernel weights in use
  Vector quadforms;
  DualSolution dual;
  double objective = 0.0;  // B at eta_smoothed
  double gap_kernel = 0.0;
  double gap_weights = 0.0;
  double gap = 0.0;        // gap_kernel + (lambda/2) gap_weights
  double eps_smooth = 0.0; // final smoothing level
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::vector<double> objective_trace;
  std::vector<double> eps_trace;
};

/// Projected gradient with Armijo backtracking over H.
WeightSolution minimize_B(const ReducedDag& dag, const std::vector<const Matrix*>& centered_grams,
                          const Vector& y, double lambda, const Loss& loss, const WeightSolverOptions& options,
                          const Vector* eta0 = nullptr);

/// argmin over eta in H of sum_v ||f_D(v)||^2 / eta~_v at fixed functions
/// f_w = zeta_w sum_i alpha_i Phi_w(x_i), with eta~ the smoothed weights.
Vector block_minimizer(const ReducedDag& dag, const Vector& zeta, const Vector& quadforms, double eps_smooth);

/// Sum over w of zeta_w K_w.
Matrix weighted_gram(const std::vector<const Matrix*>& grams, const Vector& zeta);

}  // namespace hkl
