#include "hkl/engine.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "hkl/error.hpp"
#include "hkl/kernel_atlas.hpp"

namespace hkl {

namespace {

bool violator_before(const Violator& a, const Violator& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.t < b.t;
}

struct ReducedState {
  ReducedDag rdag;
  std::vector<Matrix> grams;  // centered, in rdag order
  WeightSolution sol;
};

}  // namespace

WarmStart HklModel::warm_start() const {
  WarmStart ws;
  for (std::size_t i = 0; i < w.size(); ++i) {
    ws.w.insert(w[i]);
    ws.eta.emplace(w[i], eta[static_cast<Eigen::Index>(i)]);
  }
  return ws;
}

Loss effective_loss(const FitConfig& config) {
  const LossKind k = config.loss.kind();
  if (k == LossKind::svr_1norm || k == LossKind::svm_1norm) {
    if (!(config.ridge_factor > 0.0))
      throw InvalidArgument("1-norm losses require a positive ridge factor");
    return config.loss.smoothed(config.ridge_factor);
  }
  return config.loss;
}

double omega_squared(const Vector& zeta, const Vector& quadforms) { return zeta.dot(quadforms); }

std::vector<Violator> necessary_condition_violators(const KernelSource& source, const VertexSet& frontier,
                                                    const Vector& alpha, double omega2) {
  std::vector<Violator> out;
  for (const Label& t : frontier) {
    const double d = source.weight(t);
    const double score = source.quadform(t, alpha) / (d * d);
    if (score > omega2 * (1.0 + 1e-8)) out.push_back({t, score});
  }
  std::sort(out.begin(), out.end(), violator_before);
  return out;
}

std::vector<Violator> sufficient_condition_violators(const KernelSource& source, const VertexSet& frontier,
                                                     const Vector& alpha, double omega2, double eps_gap,
                                                     double lambda) {
  std::vector<Violator> out;
  const double threshold = omega2 + 2.0 * eps_gap / lambda;
  for (const Label& t : frontier) {
    const double score = source.sufficient_quadform(t, alpha);
    if (score > threshold) out.push_back({t, score});
  }
  std::sort(out.begin(), out.end(), violator_before);
  return out;
}

std::pair<double, double> dual_norm_bounds(const Dag& dag, const std::map<Label, double>& g_norms,
                                           const VertexSet& k, const WeightScheme& weights) {
  double lower = 0.0, upper = 0.0;
  for (const auto& [w, g] : g_norms) {
    if (g < 0) throw InvalidArgument("norms must be nonnegative");
    if (g == 0.0) continue;
    double sum = 0.0;
    for (const Label& v : dag.ancestors(w))
      if (v == w || k.count(v) != 0) sum += dag.weight(v, weights);
    lower = std::max(lower, g / sum);
    upper = std::max(upper, g / dag.weight(w, weights));
  }
  return {lower, upper};
}

HklModel fit(const KernelSource& source, const Vector& y, const FitConfig& config, FitReport* report,
             const WarmStart* warm) {
  const Dag& dag = source.dag();
  const WeightScheme& weights = source.weights();
  if (y.size() != source.n()) throw InvalidArgument("target length does not match the kernel source");
  if (y.size() < 2) throw InvalidArgument("fit requires n >= 2");
  if (!(config.lambda > 0.0)) throw InvalidArgument("lambda must be positive");
  if (config.q_max < 1) throw InvalidArgument("q_max must be >= 1");
  if (!(config.eps_gap > 0.0)) throw InvalidArgument("eps_gap must be positive");
  const Loss loss = effective_loss(config);
  for (Eigen::Index i = 0; i < y.size(); ++i) loss.check_label(y[i]);

  WeightSolverOptions inner = config.inner;
  if (!(inner.tol > 0.0)) inner.tol = config.eps_gap;
  const double lambda = config.lambda;

  VertexSet w;
  for (const Label& r : dag.roots()) w.insert(r);
  if (warm != nullptr)
    for (const Label& v : warm->w)
      if (dag.contains(v)) w.insert(v);
  w = dag.hull(w);

  FitReport local_report;
  FitReport& rep = report != nullptr ? *report : local_report;
  rep = FitReport{};
  rep.max_out_degree = dag.max_out_degree();
  rep.hull_trace.push_back(w);

  std::map<Label, Matrix> gram_cache;
  std::map<Label, double> eta_prev;
  if (warm != nullptr) eta_prev = warm->eta;

  ReducedState state;
  auto solve_reduced = [&]() {
    state.rdag = ReducedDag::from(dag, w, weights);
    const std::size_t m = state.rdag.size();
    std::vector<const Matrix*> grams;
    grams.reserve(m);
    for (const Label& v : state.rdag.nodes) {
      auto it = gram_cache.find(v);
      if (it == gram_cache.end()) it = gram_cache.emplace(v, source.centered_gram(v)).first;
      grams.push_back(&it->second);
    }
    // Warm start: keep previous eta, give newcomers a small share, rescale
    // to the budget boundary.
    Vector eta0(static_cast<Eigen::Index>(m));
    bool any_prev = false;
    for (std::size_t i = 0; i < m; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const double d = state.rdag.d[ii];
      if (auto it = eta_prev.find(state.rdag.nodes[i]); it != eta_prev.end() && it->second > 0) {
        eta0[ii] = it->second;
        any_prev = true;
      } else {
        eta0[ii] = 0.1 / (d * d * static_cast<double>(m));
      }
    }
    const Vector* eta_start = nullptr;
    if (any_prev) {
      eta0 /= state.rdag.d.array().square().matrix().dot(eta0);
      eta_start = &eta0;
    }
    state.sol = minimize_B(state.rdag, grams, y, lambda, loss, inner, eta_start);
    rep.inner_iterations += static_cast<std::size_t>(state.sol.iterations);
    eta_prev.clear();
    for (std::size_t i = 0; i < m; ++i) eta_prev[state.rdag.nodes[i]] = state.sol.eta[static_cast<Eigen::Index>(i)];
    // Primal objective of the current predictor.
    double qsum = 0.0;
    for (std::size_t v = 0; v < m; ++v) {
      double s = 0.0;
      for (std::size_t x : state.rdag.descendants[v]) {
        const double z = state.sol.zeta[static_cast<Eigen::Index>(x)];
        s += z * z * state.sol.quadforms[static_cast<Eigen::Index>(x)];
      }
      qsum += state.rdag.d[static_cast<Eigen::Index>(v)] * std::sqrt(s);
    }
    const Matrix k = weighted_gram(grams, state.sol.zeta);
    const Vector u = k * state.sol.dual.alpha;
    const double b = intercept(loss, y, u);
    rep.objective_trace.push_back(empirical_risk(loss, y, u.array() + b) + 0.5 * lambda * qsum * qsum);
    return k;
  };

  solve_reduced();
  rep.reduced_solves_phase1 = 1;
  bool stopped = false;
  auto add_vertex = [&](const Label& t) {
    w.insert(t);
    rep.hull_trace.push_back(w);
    if (w.size() > config.q_max) {
      w.erase(t);
      rep.q_max_reached = true;
      stopped = true;
      return false;
    }
    solve_reduced();
    return true;
  };

  double s_max = 0.0;
  for (int phase = 1; phase <= 2 && !stopped; ++phase) {
    while (true) {
      const VertexSet frontier = dag.complement_sources(w);
      rep.max_frontier = std::max(rep.max_frontier, frontier.size());
      const Vector& alpha = state.sol.dual.alpha;
      const double omega2 = omega_squared(state.sol.zeta, state.sol.quadforms);
      std::vector<Violator> viol =
          phase == 1 ? necessary_condition_violators(source, frontier, alpha, omega2)
                     : sufficient_condition_violators(source, frontier, alpha, omega2, config.eps_gap, lambda);
      if (viol.empty()) {
        if (phase == 2) {
          for (const Label& t : frontier) s_max = std::max(s_max, source.sufficient_quadform(t, alpha));
        }
        break;
      }
      if (!add_vertex(viol.front().t)) break;
      (phase == 1 ? rep.reduced_solves_phase1 : rep.reduced_solves_phase2) += 1;
    }
  }
  if (stopped) {
    // The solution in `state` belongs to the last solved W; bound the gap
    // over the frontier of that W.
    const VertexSet frontier = dag.complement_sources(w);
    for (const Label& t : frontier) s_max = std::max(s_max, source.sufficient_quadform(t, state.sol.dual.alpha));
  }

  const WeightSolution& sol = state.sol;
  const double omega2 = omega_squared(sol.zeta, sol.quadforms);
  const double u_w = dual_norm_squared_bound(sol.quadforms, sol.eta_smoothed, state.rdag);
  const double certified = sol.gap_kernel + 0.5 * lambda * (std::max(u_w, s_max) - omega2);

  HklModel model;
  model.dag_kind = dag.kind();
  model.p = dag.p();
  model.q = dag.q();
  model.weights = weights;
  model.loss = config.loss;
  model.lambda = lambda;
  model.eps_gap = config.eps_gap;
  model.w = state.rdag.nodes;
  model.eta = sol.eta_smoothed;
  model.zeta = sol.zeta;
  model.alpha = sol.dual.alpha;
  model.gap = certified;
  model.gap_certified = !stopped && certified <= 2.0 * config.eps_gap * (1.0 + 1e-9);

  // Uncentered fitted scores: 1^T alpha = 0 makes them differ from the
  // centered ones by a constant absorbed into b.
  Vector u = Vector::Zero(y.size());
  for (std::size_t i = 0; i < model.w.size(); ++i) {
    const double z = model.zeta[static_cast<Eigen::Index>(i)];
    if (z != 0.0) u.noalias() += z * (source.gram(model.w[i]) * model.alpha);
  }
  model.b = intercept(loss, y, u);
  model.fitted = u.array() + model.b;
  model.objective = rep.objective_trace.back();

  VertexSet active;
  const double tau = config.active_threshold * std::max(sol.eps_smooth, 1e-12);
  for (std::size_t i = 0; i < model.w.size(); ++i) {
    const double d = state.rdag.d[static_cast<Eigen::Index>(i)];
    if (d * d * sol.eta[static_cast<Eigen::Index>(i)] > tau) active.insert(model.w[i]);
  }
  const VertexSet active_hull = dag.hull(active);
  for (const Label& v : model.w)
    if (active_hull.count(v) != 0) model.w_active.push_back(v);
  return model;
}

HklModel fit(const GridKernelSource& source, const Standardizer& st, const Vector& y, const FitConfig& config,
             FitReport* report, const WarmStart* warm) {
  if (source.weights().beta != config.weights.beta || source.weights().d_r != config.weights.d_r)
    throw InvalidArgument("source weights differ from the configured weights");
  HklModel model = fit(static_cast<const KernelSource&>(source), y, config, report, warm);
  model.has_kernel_family = true;
  model.kernel = source.atlas().family().kind();
  model.kernel_params = source.atlas().family().params();
  model.standardizer = st;
  model.train_z = source.atlas().data();
  return model;
}

HklModel fit(const Matrix& x, const Vector& y, const FitConfig& config, FitReport* report, const WarmStart* warm) {
  if (x.rows() != y.size()) throw InvalidArgument("X and y differ in the number of rows");
  if (x.cols() < 1) throw InvalidArgument("X must have at least one column");
  const Standardizer st = config.standardize ? Standardizer::fit(x) : Standardizer::identity(static_cast<int>(x.cols()));
  KernelFamily family(config.kernel, config.kernel_params, static_cast<int>(x.cols()));
  auto atlas = std::make_shared<const KernelAtlas>(st.apply(x), family);
  GridKernelSource source(atlas, config.weights, config.dense_cap);
  return fit(source, st, y, config, report, warm);
}

Vector decision_function(const HklModel& model, const Matrix& x_new) {
  if (model.alpha.size() == 0) throw InvalidArgument("model has not been fitted");
  Vector out = Vector::Constant(x_new.rows(), model.b);
  if (model.has_kernel_family) {
    if (x_new.cols() != model.train_z.cols()) throw InvalidArgument("prediction data has the wrong number of columns");
    const KernelFamily family(model.kernel, model.kernel_params, static_cast<int>(model.train_z.cols()));
    const BlockSet cross(family, model.standardizer.apply(x_new), model.train_z);
    for (std::size_t i = 0; i < model.w.size(); ++i) {
      const double z = model.zeta[static_cast<Eigen::Index>(i)];
      if (z != 0.0) out.noalias() += z * (cross.node(model.w[i]) * model.alpha);
    }
    return out;
  }
  if (!model.cross_gram) throw InvalidArgument("model has no kernel family and no cross-gram hook");
  for (std::size_t i = 0; i < model.w.size(); ++i) {
    const double z = model.zeta[static_cast<Eigen::Index>(i)];
    if (z != 0.0) out.noalias() += z * (model.cross_gram(x_new, model.w[i]) * model.alpha);
  }
  return out;
}

Vector predict(const HklModel& model, const Matrix& x_new) {
  Vector s = decision_function(model, x_new);
  if (model.loss.is_classification()) s = s.unaryExpr([](double v) { return v >= 0 ? 1.0 : -1.0; });
  return s;
}

}  // namespace hkl
