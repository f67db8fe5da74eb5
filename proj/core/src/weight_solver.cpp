#include "hkl/weight_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "hkl/error.hpp"

namespace hkl {

std::size_t ReducedDag::index_of(const Label& v) const {
  auto it = lookup_.find(v);
  if (it == lookup_.end()) throw InvalidArgument("vertex not in reduced DAG: " + to_string(v));
  return it->second;
}

void ReducedDag::close() {
  const std::size_t m = parents.size();
  ancestors.assign(m, {});
  descendants.assign(m, {});
  std::vector<char> mark(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    std::fill(mark.begin(), mark.end(), 0);
    mark[i] = 1;
    for (std::size_t par : parents[i]) {
      if (par >= i) throw InvalidArgument("reduced DAG: parents must precede children");
      for (std::size_t a : ancestors[par]) mark[a] = 1;
    }
    for (std::size_t a = 0; a <= i; ++a)
      if (mark[a]) ancestors[i].push_back(a);
  }
  for (std::size_t w = 0; w < m; ++w)
    for (std::size_t v : ancestors[w]) descendants[v].push_back(w);
  lookup_.clear();
  for (std::size_t i = 0; i < nodes.size(); ++i) lookup_.emplace(nodes[i], i);
}

ReducedDag ReducedDag::from(const Dag& dag, const VertexSet& w, const WeightScheme& weights) {
  ReducedDag r;
  r.nodes.assign(w.begin(), w.end());
  std::stable_sort(r.nodes.begin(), r.nodes.end(), [&](const Label& a, const Label& b) {
    return dag.topo_rank(a) < dag.topo_rank(b);
  });
  std::map<Label, std::size_t> pos;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) pos.emplace(r.nodes[i], i);
  r.d.resize(static_cast<Eigen::Index>(r.nodes.size()));
  r.parents.resize(r.nodes.size());
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    r.d[static_cast<Eigen::Index>(i)] = dag.weight(r.nodes[i], weights);
    for (const Label& par : dag.parents(r.nodes[i]))
      if (auto it = pos.find(par); it != pos.end()) r.parents[i].push_back(it->second);
    std::sort(r.parents[i].begin(), r.parents[i].end());
  }
  r.close();
  return r;
}

ReducedDag ReducedDag::from_parents(std::vector<std::vector<std::size_t>> parents, Vector d) {
  if (static_cast<Eigen::Index>(parents.size()) != d.size()) throw InvalidArgument("one weight per vertex");
  ReducedDag r;
  r.parents = std::move(parents);
  r.d = std::move(d);
  for (std::size_t i = 0; i < r.parents.size(); ++i) r.nodes.push_back(Label{static_cast<int>(i)});
  r.close();
  return r;
}

Vector zeta_from_eta(const ReducedDag& dag, const Vector& eta) {
  if (eta.size() != static_cast<Eigen::Index>(dag.size())) throw InvalidArgument("eta size mismatch");
  if ((eta.array() < 0).any()) throw InvalidArgument("eta must be nonnegative");
  Vector zeta(eta.size());
  for (std::size_t w = 0; w < dag.size(); ++w) {
    double inv = 0.0;
    bool zero = false;
    for (std::size_t v : dag.ancestors[w]) {
      const double e = eta[static_cast<Eigen::Index>(v)];
      if (e == 0.0) {
        zero = true;
        break;
      }
      inv += 1.0 / e;
    }
    zeta[static_cast<Eigen::Index>(w)] = zero ? 0.0 : 1.0 / inv;
  }
  return zeta;
}

Vector optimal_eta_given_f(const Vector& norms, const Vector& d, bool* degenerate) {
  if (norms.size() != d.size()) throw InvalidArgument("norms and weights differ in size");
  const double total = norms.dot(d);
  if (degenerate != nullptr) *degenerate = !(total > 0.0);
  if (!(total > 0.0)) return d.array().square().inverse() / static_cast<double>(d.size());
  return norms.array() / (d.array() * total);
}

Vector project_onto_H(const Vector& raw, const Vector& d) {
  if (raw.size() != d.size()) throw InvalidArgument("projection size mismatch");
  if (!raw.allFinite()) throw InvalidArgument("projection of a non-finite vector");
  const Vector w = d.array().square();
  Vector clamped = raw.cwiseMax(0.0);
  if (w.dot(clamped) <= 1.0) return clamped;
  // Boundary case: eta_i = max(0, raw_i - tau w_i) with sum w_i eta_i = 1.
  const auto m = static_cast<std::size_t>(raw.size());
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  auto ratio = [&](std::size_t i) { return raw[static_cast<Eigen::Index>(i)] / w[static_cast<Eigen::Index>(i)]; };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ratio(a) > ratio(b); });
  double swr = 0.0, sww = 0.0, tau = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const auto i = static_cast<Eigen::Index>(order[k]);
    swr += w[i] * raw[i];
    sww += w[i] * w[i];
    tau = (swr - 1.0) / sww;
    const double next = k + 1 < m ? ratio(order[k + 1]) : -std::numeric_limits<double>::infinity();
    if (tau >= next) break;
  }
  return (raw - tau * w).cwiseMax(0.0);
}

namespace {

double bound_for_split(const Vector& a, const Vector& eta, const Vector& zeta, const ReducedDag& dag,
                       bool use_eta) {
  double best = 0.0;
  for (std::size_t v = 0; v < dag.size(); ++v) {
    const double dv = dag.d[static_cast<Eigen::Index>(v)];
    const double ev = eta[static_cast<Eigen::Index>(v)];
    double sum = 0.0;
    for (std::size_t w : dag.descendants[v]) {
      const double aw = a[static_cast<Eigen::Index>(w)];
      if (aw == 0.0) continue;
      double kappa;
      const double zw = zeta[static_cast<Eigen::Index>(w)];
      if (use_eta && zw > 0.0) {
        kappa = zw / ev;
      } else {
        // d-proportional split, over the zero-eta ancestors when use_eta.
        double denom = 0.0;
        for (std::size_t u : dag.ancestors[w])
          if (!use_eta || eta[static_cast<Eigen::Index>(u)] == 0.0) denom += dag.d[static_cast<Eigen::Index>(u)];
        if (use_eta && ev != 0.0) continue;
        kappa = dv / denom;
      }
      sum += kappa * kappa * aw;
    }
    best = std::max(best, sum / (dv * dv));
  }
  return best;
}

}  // namespace

double dual_norm_squared_bound(const Vector& a, const Vector& eta, const ReducedDag& dag) {
  if (a.size() != static_cast<Eigen::Index>(dag.size()) || eta.size() != a.size())
    throw InvalidArgument("gap bound size mismatch");
  const Vector zeta = zeta_from_eta(dag, eta);
  return std::min(bound_for_split(a, eta, zeta, dag, true), bound_for_split(a, eta, zeta, dag, false));
}

double gap_weights_upper_bound(const Vector& a, const Vector& eta, const ReducedDag& dag) {
  const Vector zeta = zeta_from_eta(dag, eta);
  return dual_norm_squared_bound(a, eta, dag) - zeta.dot(a);
}

Matrix weighted_gram(const std::vector<const Matrix*>& grams, const Vector& zeta) {
  if (grams.empty()) throw InvalidArgument("weighted gram of an empty set");
  Matrix k = Matrix::Zero(grams.front()->rows(), grams.front()->cols());
  for (std::size_t w = 0; w < grams.size(); ++w) {
    const double z = zeta[static_cast<Eigen::Index>(w)];
    if (z != 0.0) k.noalias() += z * *grams[w];
  }
  return k;
}

BEvaluation evaluate_B(const ReducedDag& dag, const std::vector<const Matrix*>& grams, const Vector& y,
                       double lambda, const Loss& loss, const Vector& eta, double eps_smooth,
                       const DualSolverOptions& dual_options, const Vector* warm_alpha) {
  if (grams.size() != dag.size()) throw InvalidArgument("one Gram matrix per reduced vertex");
  const auto m = static_cast<double>(dag.size());
  BEvaluation ev;
  ev.eta_smoothed = (1.0 - eps_smooth) * eta.array() + (eps_smooth / m) * dag.d.array().square().inverse();
  ev.zeta = zeta_from_eta(dag, ev.eta_smoothed);
  const Matrix k = weighted_gram(grams, ev.zeta);
  ev.dual = solve_dual(k, y, lambda, loss, dual_options, warm_alpha);
  ev.value = ev.dual.dual_obj;
  ev.quadforms.resize(eta.size());
  for (std::size_t w = 0; w < grams.size(); ++w)
    ev.quadforms[static_cast<Eigen::Index>(w)] = std::max(0.0, ev.dual.alpha.dot(*grams[w] * ev.dual.alpha));
  // dB/dzeta_w = -(lambda/2) a_w; dzeta_w/deta~_v = zeta_w^2 / eta~_v^2 for v in A(w).
  ev.gradient = Vector::Zero(eta.size());
  for (std::size_t v = 0; v < dag.size(); ++v) {
    const double ev_v = ev.eta_smoothed[static_cast<Eigen::Index>(v)];
    double g = 0.0;
    for (std::size_t w : dag.descendants[v]) {
      const double z = ev.zeta[static_cast<Eigen::Index>(w)];
      g += ev.quadforms[static_cast<Eigen::Index>(w)] * z * z;
    }
    ev.gradient[static_cast<Eigen::Index>(v)] = -(1.0 - eps_smooth) * 0.5 * lambda * g / (ev_v * ev_v);
  }
  return ev;
}

Vector block_minimizer(const ReducedDag& dag, const Vector& zeta, const Vector& quadforms, double eps_smooth) {
  const auto m = static_cast<Eigen::Index>(dag.size());
  Vector norms_sq(m);
  for (std::size_t v = 0; v < dag.size(); ++v) {
    double s = 0.0;
    for (std::size_t w : dag.descendants[v]) {
      const double z = zeta[static_cast<Eigen::Index>(w)];
      s += z * z * quadforms[static_cast<Eigen::Index>(w)];
    }
    norms_sq[static_cast<Eigen::Index>(v)] = s;
  }
  const Vector norms = norms_sq.array().sqrt();
  if (eps_smooth == 0.0 || !(norms.maxCoeff() > 0.0)) return optimal_eta_given_f(norms, dag.d);
  // Stationarity: eta~_v = sqrt((1-eps) N_v / mu) / d_v wherever eta_v > 0;
  // mu is fixed by the budget, found by bisection on log mu.
  const Vector c = (eps_smooth / static_cast<double>(m)) * dag.d.array().square().inverse();
  const double keep = 1.0 - eps_smooth;
  auto eta_at = [&](double mu) {
    Vector e(m);
    for (Eigen::Index v = 0; v < m; ++v) {
      const double target = std::sqrt(keep * norms_sq[v] / mu) / dag.d[v];
      e[v] = std::max(0.0, (target - c[v]) / keep);
    }
    return e;
  };
  auto budget = [&](double mu) { return dag.d.array().square().matrix().dot(eta_at(mu)); };
  double lo = std::log(1e-300), hi = std::log(1e300);
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (budget(std::exp(mid)) > 1.0) lo = mid;
    else hi = mid;
  }
  return project_onto_H(eta_at(std::exp(hi)), dag.d);
}

WeightSolution minimize_B(const ReducedDag& dag, const std::vector<const Matrix*>& grams, const Vector& y,
                          double lambda, const Loss& loss, const WeightSolverOptions& options,
                          const Vector* eta0) {
  if (dag.size() == 0) throw InvalidArgument("minimize_B on an empty vertex set");
  if (!(options.eps_smooth >= 0.0 && options.eps_smooth < 1.0))
    throw InvalidArgument("eps_smooth must lie in [0, 1)");
  const auto m = static_cast<double>(dag.size());
  double eps = options.eps_smooth;
  Vector eta = (eta0 != nullptr && eta0->size() == dag.d.size())
                   ? project_onto_H(*eta0, dag.d)
                   : Vector(dag.d.array().square().inverse() / m);

  WeightSolution out;
  BEvaluation cur = evaluate_B(dag, grams, y, lambda, loss, eta, eps, options.dual);
  out.evaluations = 1;
  double step = 1.0;
  Vector prev_eta, prev_grad;
  std::vector<double> accepted_values;
  auto gap_of = [&](const BEvaluation& e, double& gw) {
    gw = gap_weights_upper_bound(e.quadforms, e.eta_smoothed, dag);
    return e.dual.gap + 0.5 * lambda * gw;
  };
  auto reduce_smoothing = [&]() {
    if (!options.continuation || eps <= options.min_eps_smooth) return false;
    eps = std::max(eps / 10.0, options.min_eps_smooth);
    cur = evaluate_B(dag, grams, y, lambda, loss, eta, eps, options.dual, &cur.dual.alpha);
    ++out.evaluations;
    step = 1.0;
    prev_eta.resize(0);
    accepted_values.clear();
    return true;
  };

  int it = 0;
  double gap = 0.0, gw = 0.0;
  for (; it < options.max_iter; ++it) {
    gap = gap_of(cur, gw);
    out.objective_trace.push_back(cur.value);
    out.eps_trace.push_back(eps);
    if (gap <= options.tol) {
      out.converged = true;
      break;
    }
    // Stalled: the last ten accepted steps removed less than 5% of the gap.
    const std::size_t na = accepted_values.size();
    if (options.continuation && na >= 10 && accepted_values[na - 10] - cur.value < 0.05 * gap) {
      if (reduce_smoothing()) continue;
    }

    if (options.bb_steps && prev_eta.size() == eta.size()) {
      const Vector s = eta - prev_eta;
      const Vector g = cur.gradient - prev_grad;
      const double sg = s.dot(g);
      if (sg > 0.0) step = std::clamp(s.squaredNorm() / sg, 1e-20, 1e20);
    }
    std::optional<BEvaluation> best;
    Vector best_eta;
    if (options.block_steps) {
      const Vector cand = block_minimizer(dag, cur.zeta, cur.quadforms, eps);
      BEvaluation next = evaluate_B(dag, grams, y, lambda, loss, cand, eps, options.dual, &cur.dual.alpha);
      ++out.evaluations;
      if (next.value < cur.value) {
        best = std::move(next);
        best_eta = cand;
      }
    }
    double pg_step = step;
    for (int ls = 0; ls < 60 && !(best && options.block_first); ++ls) {
      const Vector cand = project_onto_H(eta - pg_step * cur.gradient, dag.d);
      const Vector diff = cand - eta;
      if (diff.lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + eta.lpNorm<Eigen::Infinity>())) break;
      BEvaluation next = evaluate_B(dag, grams, y, lambda, loss, cand, eps, options.dual, &cur.dual.alpha);
      ++out.evaluations;
      if (next.value <= cur.value + 1e-4 * cur.gradient.dot(diff)) {
        if (!best || next.value < best->value) {
          best = std::move(next);
          best_eta = cand;
        }
        step = 2.0 * pg_step;
        break;
      }
      pg_step *= 0.5;
    }
    if (best) {
      accepted_values.push_back(cur.value);
      prev_eta = eta;
      prev_grad = cur.gradient;
      eta = best_eta;
      cur = std::move(*best);
      continue;
    }
    if (!reduce_smoothing()) break;
  }
  if (it >= options.max_iter) gap = gap_of(cur, gw);
  out.iterations = it;
  out.eta = eta;
  out.eta_smoothed = cur.eta_smoothed;
  out.zeta = cur.zeta;
  out.quadforms = cur.quadforms;
  out.objective = cur.value;
  out.gap_kernel = cur.dual.gap;
  out.gap_weights = gw;
  out.gap = gap;
  out.eps_smooth = eps;
  out.dual = std::move(cur.dual);
  return out;
}

}  // namespace hkl
