#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "hkl/dag.hpp"
#include "hkl/kernel_family.hpp"
#include "hkl/kernel_source.hpp"
#include "hkl/loss.hpp"
#include "hkl/weight_solver.hpp"

namespace hkl {

inline WeightSolverOptions default_inner_options() {
  WeightSolverOptions o;
  o.tol = 0.0;
  return o;
}

struct FitConfig {
  double lambda = 1e-2;
  double eps_gap = 1e-3;
  std::size_t q_max = 100;
  Loss loss;
  WeightScheme weights;
  KernelKind kernel = KernelKind::hermite;
  KernelParams kernel_params;
  /// Reduced problems use inner.tol when positive, else eps_gap.
  WeightSolverOptions inner = default_inner_options();
  /// Ridge delta = ridge_factor * n * lambda for the piecewise linear losses,
  /// applied as the equivalent Moreau smoothing of the loss.
  double ridge_factor = 1e-6;
  /// Readout threshold: w is active when d_w^2 eta_w > active_threshold * eps_smooth.
  double active_threshold = 1e-2;
  bool standardize = true;
  std::size_t dense_cap = Dag::kDefaultDenseCap;
};

/// Previous solution used to seed a fit (e.g. along a decreasing lambda path).
struct WarmStart {
  VertexSet w;
  std::map<Label, double> eta;
};

struct Violator {
  Label t;
  double score = 0.0;
};

struct FitReport {
  std::vector<VertexSet> hull_trace;  // W after every change, starting with the initial set
  std::vector<double> objective_trace;  // primal objective after every reduced solve
  std::size_t reduced_solves_phase1 = 0;
  std::size_t reduced_solves_phase2 = 0;
  std::size_t max_frontier = 0;
  std::size_t max_out_degree = 0;
  std::size_t inner_iterations = 0;
  bool q_max_reached = false;
};

struct HklModel {
  DagKind dag_kind = DagKind::grid;
  int p = 0;
  int q = 0;
  WeightScheme weights;
  bool has_kernel_family = true;
  KernelKind kernel = KernelKind::hermite;
  KernelParams kernel_params;
  Standardizer standardizer;
  Matrix train_z;
  /// Prediction hook for explicit kernel sources (not serialized).
  CrossGramFn cross_gram;

  Loss loss;
  double lambda = 0.0;
  double eps_gap = 0.0;
  std::vector<Label> w;         // solved hull, topological order
  Vector eta;                   // smoothed eta used for the final solve, per w
  Vector zeta;                  // kernel weights, per w
  std::vector<Label> w_active;  // hull of the nodes above the readout threshold
  Vector alpha;
  double b = 0.0;
  Vector fitted;                // training scores
  double objective = 0.0;       // primal objective of the returned predictor
  double gap = 0.0;             // certified bound on the total duality gap
  bool gap_certified = false;

  WarmStart warm_start() const;
};

/// sum_{w in W} zeta_w alpha^T K~_w alpha.
double omega_squared(const Vector& zeta, const Vector& quadforms);

/// Frontier vertices t with alpha^T K~_t alpha / d_t^2 > omega2 (1 + 1e-8),
/// by decreasing score, ties to the smallest label.
std::vector<Violator> necessary_condition_violators(const KernelSource& source, const VertexSet& frontier,
                                                    const Vector& alpha, double omega2);
/// Frontier vertices t with alpha^T K-breve_t alpha > omega2 + 2 eps / lambda.
std::vector<Violator> sufficient_condition_violators(const KernelSource& source, const VertexSet& frontier,
                                                     const Vector& alpha, double omega2, double eps_gap,
                                                     double lambda);

/// Sandwich bounds on the dual norm of g: lower = max_w ||g_w|| / sum_{v in A(w) and K} d_v,
/// upper = max_w ||g_w|| / d_w.
std::pair<double, double> dual_norm_bounds(const Dag& dag, const std::map<Label, double>& g_norms,
                                           const VertexSet& k, const WeightScheme& weights);

/// Kernel search over the DAG of `source`.
HklModel fit(const KernelSource& source, const Vector& y, const FitConfig& config, FitReport* report = nullptr,
             const WarmStart* warm = nullptr);
/// Fits on a grid source whose atlas holds inputs standardized by `st`, and
/// attaches the feature map needed for prediction. Reusing one source across
/// calls keeps its Gram caches.
HklModel fit(const GridKernelSource& source, const Standardizer& st, const Vector& y, const FitConfig& config,
             FitReport* report = nullptr, const WarmStart* warm = nullptr);
/// Standardizes x, builds the atlas of config.kernel on the grid DAG and fits.
HklModel fit(const Matrix& x, const Vector& y, const FitConfig& config, FitReport* report = nullptr,
             const WarmStart* warm = nullptr);

/// Real-valued scores sum_w zeta_w k_w(x, X) alpha + b.
Vector decision_function(const HklModel& model, const Matrix& x_new);
/// Scores for regression, their signs for classification losses.
Vector predict(const HklModel& model, const Matrix& x_new);

/// Loss used internally for a configured loss: the 1-norm losses receive the
/// ridge-equivalent smoothing.
Loss effective_loss(const FitConfig& config);

}  // namespace hkl
