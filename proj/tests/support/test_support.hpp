#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "hkl/dag.hpp"
#include "hkl/engine.hpp"
#include "hkl/kernel_atlas.hpp"
#include "hkl/kernel_source.hpp"
#include "hkl/single_solver.hpp"
#include "hkl/weight_solver.hpp"

namespace hkl::testing {

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

inline Vector random_vector(Eigen::Index n, std::mt19937_64& rng, double sd = 1.0) {
  return random_matrix(n, 1, rng, sd).col(0);
}

/// Random PSD Gram matrix of rank at most `rank`.
inline Matrix random_gram(Eigen::Index n, Eigen::Index rank, std::mt19937_64& rng) {
  const Matrix f = random_matrix(n, rank, rng);
  return f * f.transpose() / static_cast<double>(rank);
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

inline double rel_max_error(const Matrix& a, const Matrix& b) {
  return max_abs(a - b) / std::max(max_abs(b), 1e-300);
}

/// Sum over w in D(t) of (sum over A(w) and D(t) of d_v)^-2 K~_w, by enumeration.
inline Matrix brute_force_sufficient(const Dag& dag, const KernelSource& source, const Label& t) {
  const VertexSet desc = dag.descendants(t);
  Matrix out = Matrix::Zero(source.n(), source.n());
  for (const Label& w : desc) {
    double s = 0.0;
    for (const Label& v : dag.ancestors(w))
      if (desc.count(v) != 0) s += source.weight(v);
    out += source.centered_gram(w) / (s * s);
  }
  return out;
}

/// Total duality gap bound of a fitted model recomputed over every vertex of
/// a dense DAG: eta is extended by zero outside W, every quadratic form is
/// evaluated explicitly.
inline double full_dag_gap(const KernelSource& source, const HklModel& model, const Vector& y, const Loss& loss) {
  const Dag& dag = source.dag();
  VertexSet all(dag.vertices().begin(), dag.vertices().end());
  const ReducedDag full = ReducedDag::from(dag, all, source.weights());
  Vector eta = Vector::Zero(static_cast<Eigen::Index>(full.size()));
  Vector a(static_cast<Eigen::Index>(full.size()));
  for (std::size_t i = 0; i < full.size(); ++i) a[static_cast<Eigen::Index>(i)] = source.quadform(full.nodes[i], model.alpha);
  for (std::size_t i = 0; i < model.w.size(); ++i)
    eta[static_cast<Eigen::Index>(full.index_of(model.w[i]))] = model.eta[static_cast<Eigen::Index>(i)];
  const Vector zeta = zeta_from_eta(full, eta);
  Matrix k = Matrix::Zero(source.n(), source.n());
  for (std::size_t i = 0; i < full.size(); ++i)
    if (zeta[static_cast<Eigen::Index>(i)] > 0) k += zeta[static_cast<Eigen::Index>(i)] * source.gram(full.nodes[i]);
  return gap_kernel(k, y, model.alpha, model.lambda, loss) +
         0.5 * model.lambda * gap_weights_upper_bound(a, eta, full);
}

/// Projection onto {eta >= 0, sum d^2 eta <= 1} by bisection on the multiplier.
inline Vector bisection_projection(const Vector& raw, const Vector& d) {
  const Vector d2 = d.array().square();
  auto at = [&](double mu) { return (raw.array() - mu * d2.array()).max(0.0).matrix().eval(); };
  if (d2.dot(at(0.0)) <= 1.0) return at(0.0);
  double lo = 0.0, hi = 1.0;
  while (d2.dot(at(hi)) > 1.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (d2.dot(at(mid)) > 1.0 ? lo : hi) = mid;
  }
  return at(hi);
}

struct FlatMklResult {
  Vector eta;
  double objective = 0.0;
};

/// Least squares multiple kernel learning, min over eta in H of
/// min_{f,b} (1/2n)|y - f - b|^2 + (lambda/2) |f|^2 under sum_v eta_v K_v,
/// by projected gradient with Armijo backtracking and an explicit ridge solve.
inline FlatMklResult reference_flat_mkl(const std::vector<Matrix>& grams, const Vector& d, const Vector& y,
                                        double lambda, int max_iter = 20000) {
  const Eigen::Index n = y.size();
  const auto m = static_cast<Eigen::Index>(grams.size());
  const Matrix p = Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
  std::vector<Matrix> centered;
  for (const Matrix& k : grams) centered.push_back(p * k * p);
  const Vector yc = y.array() - y.mean();

  struct Eval {
    double value;
    Vector grad;
  };
  auto evaluate = [&](const Vector& eta) {
    Matrix k = Matrix::Zero(n, n);
    for (Eigen::Index v = 0; v < m; ++v) k += eta[v] * centered[static_cast<std::size_t>(v)];
    const Matrix sys = k + static_cast<double>(n) * lambda * Matrix::Identity(n, n);
    const Vector alpha = sys.ldlt().solve(yc);
    const Vector r = yc - k * alpha;
    Eval e{0.5 * r.squaredNorm() / static_cast<double>(n) + 0.5 * lambda * alpha.dot(k * alpha), Vector(m)};
    for (Eigen::Index v = 0; v < m; ++v)
      e.grad[v] = -0.5 * lambda * alpha.dot(centered[static_cast<std::size_t>(v)] * alpha);
    return e;
  };

  Vector eta = d.array().square().inverse() / static_cast<double>(m);
  Eval cur = evaluate(eta);
  double step = 1.0;
  for (int it = 0; it < max_iter; ++it) {
    step *= 2.0;
    bool moved = false;
    while (step > 1e-20) {
      const Vector cand = bisection_projection(eta - step * cur.grad, d);
      const Eval next = evaluate(cand);
      if (next.value <= cur.value + 1e-4 * cur.grad.dot(cand - eta)) {
        moved = (cand - eta).norm() > 1e-15;
        eta = cand;
        cur = next;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return {eta, cur.value};
}

}  // namespace hkl::testing
