#include <doctest.h>

#include <random>

#include "hkl/error.hpp"
#include "hkl/weight_solver.hpp"
#include "oracle_data.hpp"
#include "test_support.hpp"

using namespace hkl;
using hkl::testing::random_gram;
using hkl::testing::random_vector;

namespace {

/// Random DAG on m vertices: each vertex after the first gets up to two
/// earlier parents.
ReducedDag random_reduced_dag(std::size_t m, std::mt19937_64& rng, bool tree = false) {
  std::vector<std::vector<std::size_t>> parents(m);
  for (std::size_t i = 1; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    parents[i].push_back(pick(rng));
    if (!tree && rng() % 2 == 0) {
      const std::size_t other = pick(rng);
      if (other != parents[i][0]) parents[i].push_back(other);
    }
    std::sort(parents[i].begin(), parents[i].end());
  }
  std::uniform_real_distribution<double> u(0.5, 3.0);
  Vector d(static_cast<Eigen::Index>(m));
  for (auto& x : d) x = u(rng);
  return ReducedDag::from_parents(parents, d);
}

Vector random_feasible_eta(const Vector& d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Vector e(d.size());
  for (auto& x : e) x = u(rng);
  return e / (d.array().square().matrix().dot(e) * (1.0 + u(rng)));
}

}  // namespace

TEST_SUITE("weight_solver") {
  TEST_CASE("zeta from eta") {
    const ReducedDag edgeless = ReducedDag::from_parents({{}, {}, {}}, Vector::Ones(3));
    Vector eta(3);
    eta << 0.2, 0.3, 0.1;
    CHECK((zeta_from_eta(edgeless, eta) - eta).norm() == 0.0);

    const ReducedDag chain = ReducedDag::from_parents({{}, {0}}, Vector::Ones(2));
    Vector half(2);
    half << 0.5, 0.5;
    const Vector z = zeta_from_eta(chain, half);
    CHECK(z[0] == doctest::Approx(0.5));
    CHECK(z[1] == doctest::Approx(0.25));
    Vector dead(2);
    dead << 0.0, 0.7;
    CHECK(zeta_from_eta(chain, dead).norm() == 0.0);
    CHECK_THROWS_AS(zeta_from_eta(chain, -half), InvalidArgument);
  }

  TEST_CASE("zeta is monotone along edges and concave") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
      const ReducedDag dag = random_reduced_dag(8, rng);
      const Vector e1 = random_feasible_eta(dag.d, rng), e2 = random_feasible_eta(dag.d, rng);
      const Vector z1 = zeta_from_eta(dag, e1), z2 = zeta_from_eta(dag, e2);
      for (std::size_t w = 0; w < dag.size(); ++w)
        for (std::size_t par : dag.parents[w]) CHECK(z1[static_cast<Eigen::Index>(w)] <= z1[static_cast<Eigen::Index>(par)]);
      const double t = std::uniform_real_distribution<double>(0.01, 0.99)(rng);
      const Vector zm = zeta_from_eta(dag, t * e1 + (1 - t) * e2);
      CHECK(((zm - t * z1 - (1 - t) * z2).array() >= -1e-12).all());
    }
  }

  TEST_CASE("optimal eta given the functions") {
    Vector d1(1);
    d1 << 0.5;
    Vector n1(1);
    n1 << 3.0;
    CHECK(optimal_eta_given_f(n1, d1)[0] == doctest::Approx(4.0));

    Vector d2 = Vector::Ones(2), n2 = Vector::Constant(2, 0.7);
    const Vector e2 = optimal_eta_given_f(n2, d2);
    CHECK(e2[0] == doctest::Approx(e2[1]));

    bool degenerate = false;
    const Vector e0 = optimal_eta_given_f(Vector::Zero(2), d2, &degenerate);
    CHECK(degenerate);
    CHECK(d2.array().square().matrix().dot(e0) == doctest::Approx(1.0));

    // Variational identity on a random 10-node DAG.
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 20; ++trial) {
      const ReducedDag dag = random_reduced_dag(10, rng);
      Vector f2(10);  // |f_w|^2
      for (auto& x : f2) x = std::uniform_real_distribution<double>(0.1, 2.0)(rng);
      Vector norms(10);
      for (std::size_t v = 0; v < 10; ++v) {
        double s = 0;
        for (std::size_t w : dag.descendants[v]) s += f2[static_cast<Eigen::Index>(w)];
        norms[static_cast<Eigen::Index>(v)] = std::sqrt(s);
      }
      const double omega = norms.dot(dag.d);
      const Vector eta = optimal_eta_given_f(norms, dag.d);
      CHECK(dag.d.array().square().matrix().dot(eta) == doctest::Approx(1.0));
      const Vector zeta = zeta_from_eta(dag, eta);
      CHECK((f2.array() / zeta.array()).sum() == doctest::Approx(omega * omega).epsilon(1e-10));
    }
  }

  TEST_CASE("projection onto H") {
    Vector d(3);
    d << 1.0, 2.0, 0.5;
    Vector inside(3);
    inside << 0.1, 0.05, 0.2;
    CHECK((project_onto_H(inside, d) - inside).norm() == 0.0);
    CHECK(project_onto_H(Vector::Constant(1, 5.0), Vector::Ones(1))[0] == doctest::Approx(1.0));
    for (int c = 0; c < oracle::kProjCases; ++c) {
      const Vector raw = Vector::Map(oracle::kProjRaw + c * oracle::kProjDim, oracle::kProjDim);
      const Vector dd = Vector::Map(oracle::kProjD + c * oracle::kProjDim, oracle::kProjDim);
      const Vector expected = Vector::Map(oracle::kProjExpected + c * oracle::kProjDim, oracle::kProjDim);
      CHECK((project_onto_H(raw, dd) - expected).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }

  TEST_CASE("gap bound special cases") {
    const ReducedDag edgeless = ReducedDag::from_parents({{}, {}, {}}, (Vector(3) << 1.0, 2.0, 0.5).finished());
    Vector a(3), eta(3);
    a << 0.4, 1.2, 0.1;
    eta << 0.3, 0.1, 0.4;
    const double classical = std::max({0.4, 1.2 / 4, 0.1 / 0.25}) - eta.dot(a);
    CHECK(gap_weights_upper_bound(a, eta, edgeless) == doctest::Approx(classical));
    CHECK(gap_weights_upper_bound(Vector::Zero(3), eta, edgeless) == 0.0);
  }

  TEST_CASE("single node solve is the single kernel problem") {
    std::mt19937_64 rng(33);
    const Matrix k = center(random_gram(20, 5, rng));
    const Vector y = random_vector(20, rng);
    Vector d(1);
    d << 0.5;
    const ReducedDag one = ReducedDag::from_parents({{}}, d);
    const WeightSolution s = minimize_B(one, {&k}, y, 0.1, Loss(), WeightSolverOptions{});
    CHECK(s.eta[0] == doctest::Approx(4.0));
    const DualSolution ref = solve_least_squares(4.0 * k, y, 0.1);
    CHECK(s.objective == doctest::Approx(ref.dual_obj).epsilon(1e-10));
  }

  TEST_CASE("identical disconnected kernels share the budget") {
    std::mt19937_64 rng(34);
    const Matrix k = center(random_gram(16, 4, rng));
    const Vector y = random_vector(16, rng);
    const ReducedDag two = ReducedDag::from_parents({{}, {}}, Vector::Ones(2));
    Vector start(2);
    start << 0.8, 0.1;
    WeightSolverOptions o;
    o.tol = 1e-10;
    const WeightSolution s = minimize_B(two, {&k, &k}, y, 0.05, Loss(), o, &start);
    // B depends on eta_0 + eta_1 only, so any split of the full budget is optimal
    CHECK(s.eta.sum() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(s.objective == doctest::Approx(solve_least_squares(k, y, 0.05).dual_obj).epsilon(1e-9));
  }

  TEST_CASE("smoothed gradient matches central differences") {
    std::mt19937_64 rng(35);
    const ReducedDag dag = random_reduced_dag(6, rng);
    std::vector<Matrix> grams;
    for (int i = 0; i < 6; ++i) grams.push_back(center(random_gram(12, 3, rng)));
    std::vector<const Matrix*> ptrs;
    for (const Matrix& g : grams) ptrs.push_back(&g);
    const Vector y = random_vector(12, rng);
    for (int trial = 0; trial < 5; ++trial) {
      const Vector eta = random_feasible_eta(dag.d, rng);
      const BEvaluation ev = evaluate_B(dag, ptrs, y, 0.1, Loss(), eta, 1e-2);
      Vector fd(6);
      for (Eigen::Index v = 0; v < 6; ++v) {
        const double h = 1e-6 * std::max(eta[v], 1e-3);
        Vector ep = eta, em = eta;
        ep[v] += h;
        em[v] -= h;
        fd[v] = (evaluate_B(dag, ptrs, y, 0.1, Loss(), ep, 1e-2).value - evaluate_B(dag, ptrs, y, 0.1, Loss(), em, 1e-2).value) / (2 * h);
      }
      CHECK((fd - ev.gradient).norm() <= 1e-5 * ev.gradient.norm());
    }
  }

  TEST_CASE("minimize_B converges with a small certified gap") {
    std::mt19937_64 rng(36);
    const ReducedDag chain = ReducedDag::from_parents({{}, {0}, {1}, {1}}, (Vector(4) << 1, 2, 4, 4).finished());
    std::vector<Matrix> grams;
    for (int i = 0; i < 4; ++i) grams.push_back(center(random_gram(25, 2, rng)));
    std::vector<const Matrix*> ptrs;
    for (const Matrix& g : grams) ptrs.push_back(&g);
    const Vector y = random_vector(25, rng);
    WeightSolverOptions o;
    o.tol = 1e-8;
    o.max_iter = 3000;
    const WeightSolution s = minimize_B(chain, ptrs, y, 0.05, Loss(), o);
    CHECK(s.converged);
    CHECK(s.gap <= 1e-8);
    CHECK(s.gap_weights >= -1e-10);
    CHECK(chain.d.array().square().matrix().dot(s.eta) <= 1.0 + 1e-12);
    CHECK((s.eta.array() >= 0).all());
    // accepted steps never increase the objective at a fixed smoothing level
    for (std::size_t i = 1; i < s.objective_trace.size(); ++i)
      if (s.eps_trace[i] == s.eps_trace[i - 1]) CHECK(s.objective_trace[i] <= s.objective_trace[i - 1] + 1e-12);
  }

  TEST_CASE("plain projected gradient also converges") {
    std::mt19937_64 rng(37);
    const ReducedDag dag = random_reduced_dag(5, rng);
    std::vector<Matrix> grams;
    for (int i = 0; i < 5; ++i) grams.push_back(center(random_gram(18, 3, rng)));
    std::vector<const Matrix*> ptrs;
    for (const Matrix& g : grams) ptrs.push_back(&g);
    const Vector y = random_vector(18, rng);
    WeightSolverOptions fast, plain;
    fast.tol = plain.tol = 1e-6;
    plain.block_steps = plain.bb_steps = false;
    plain.max_iter = 20000;
    const WeightSolution a = minimize_B(dag, ptrs, y, 0.1, Loss(), fast);
    const WeightSolution b = minimize_B(dag, ptrs, y, 0.1, Loss(), plain);
    CHECK(a.converged);
    CHECK(b.converged);
    CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-5));
  }

  TEST_CASE("block minimizer stays in H") {
    std::mt19937_64 rng(38);
    const ReducedDag dag = random_reduced_dag(7, rng);
    Vector a(7);
    for (auto& x : a) x = std::uniform_real_distribution<double>(0, 1)(rng);
    const Vector zeta = zeta_from_eta(dag, random_feasible_eta(dag.d, rng));
    for (double eps : {0.0, 1e-3, 0.1}) {
      const Vector e = block_minimizer(dag, zeta, a, eps);
      CHECK((e.array() >= 0).all());
      CHECK(dag.d.array().square().matrix().dot(e) <= 1.0 + 1e-10);
    }
  }

  TEST_CASE("reduced DAG restriction") {
    const Dag g = Dag::grid(2, 2);
    const VertexSet w = g.hull({{1, 1}, {2, 0}});
    const ReducedDag r = ReducedDag::from(g, w, {1.0, 2.0});
    CHECK(r.size() == 5);
    const std::size_t top = r.index_of({1, 1});
    CHECK(r.ancestors[top].size() == 4);
    CHECK(r.d[static_cast<Eigen::Index>(top)] == 4.0);
    for (std::size_t i = 0; i < r.size(); ++i)
      for (std::size_t par : r.parents[i]) CHECK(par < i);
    CHECK_THROWS_AS(r.index_of({2, 2}), InvalidArgument);
  }
}
