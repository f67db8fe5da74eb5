// Acceptance suite: one PASS/FAIL line per criterion.
//
//   hkl_acceptance [--criterion N]... [--out-dir DIR] [--trend-config FILE]
//
// Without --criterion every check runs. The exit status is nonzero when any
// selected check fails.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hkl/engine.hpp"
#include "hkl/harness/baselines.hpp"
#include "hkl/harness/benchmark_runner.hpp"
#include "hkl/harness/synthetic.hpp"
#include "hkl/loss.hpp"
#include "hkl/weight_solver.hpp"
#include "oracle_data.hpp"
#include "test_support.hpp"

using namespace hkl;
namespace ts = hkl::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

struct Options {
  std::filesystem::path out_dir = "acceptance_out";
  std::filesystem::path trend_config = HKL_TREND_CONFIG;
};

// ---------------------------------------------------------------------------

Outcome decomposition_identity(const Options&) {
  std::mt19937_64 rng(101);
  const Matrix z = ts::random_matrix(8, 2, rng);
  double worst = 0.0;
  for (KernelKind kind : {KernelKind::polynomial, KernelKind::gauss_hermite, KernelKind::all_subset_gaussian,
                          KernelKind::spline, KernelKind::hermite}) {
    KernelParams params;
    params.q = 3;
    const KernelAtlas atlas(z, KernelFamily(kind, params, 2));
    Matrix sum = Matrix::Zero(8, 8);
    const Dag grid = Dag::grid(2, atlas.q());
      for (const Label& v : grid.vertices()) sum += atlas.node_gram(v);
    worst = std::max(worst, ts::rel_max_error(sum, harness::full_kernel_gram(atlas.family(), z, z)));
  }
  return {worst <= 1e-10, "max relative error " + sci(worst) + " over 5 families"};
}

Outcome cached_sums(const Options&) {
  std::mt19937_64 rng(102);
  const Matrix z = ts::random_matrix(10, 2, rng);
  double worst = 0.0;
  int count = 0;
  for (KernelKind kind : {KernelKind::hermite, KernelKind::polynomial, KernelKind::gauss_hermite}) {
    KernelParams params;
    params.q = 3;
    auto atlas = std::make_shared<const KernelAtlas>(z, KernelFamily(kind, params, 2));
    for (double beta : {1.5, 2.0}) {
      const GridKernelSource src(atlas, {1.0, beta});
      for (const Label& t : src.dag().vertices()) {
        const Matrix brute = ts::brute_force_sufficient(src.dag(), src, t);
        worst = std::max(worst, ts::max_abs(src.sufficient_gram(t) - brute) / std::max(ts::max_abs(brute), 1e-300));
        ++count;
      }
    }
  }
  return {worst <= 1e-10, "max relative error " + sci(worst) + " over " + std::to_string(count) + " vertices"};
}

Outcome certified_gap(const Options&) {
  harness::SyntheticSpec spec;
  spec.p = 3;
  spec.n = 100;
  spec.seed = 1;
  const harness::SyntheticData data = harness::gen_synthetic(spec);
  FitConfig c;
  c.kernel_params.q = 2;
  c.lambda = 1e-2;
  c.eps_gap = 1e-3;
  const Standardizer st = Standardizer::fit(data.x);
  auto atlas = std::make_shared<const KernelAtlas>(st.apply(data.x), KernelFamily(c.kernel, c.kernel_params, 3));
  const GridKernelSource src(atlas, c.weights);
  const HklModel m = fit(src, st, data.y, c);
  const double full = ts::full_dag_gap(src, m, data.y, effective_loss(c));
  const bool pass = m.gap_certified && full <= 2 * c.eps_gap + 1e-8;
  return {pass, std::string("certified=") + (m.gap_certified ? "yes" : "no") + " |W|=" + std::to_string(m.w.size()) +
                    " reported gap " + sci(m.gap) + ", full-DAG gap " + sci(full) + " (limit " +
                    sci(2 * c.eps_gap + 1e-8) + ")"};
}

Outcome hull_property(const Options&) {
  std::mt19937_64 rng(104);
  const KernelKind kinds[] = {KernelKind::polynomial, KernelKind::gauss_hermite, KernelKind::all_subset_gaussian,
                              KernelKind::spline, KernelKind::hermite};
  std::size_t checked = 0, violations = 0;
  for (int trial = 0; trial < 50; ++trial) {
    harness::SyntheticSpec spec;
    spec.p = 3 + static_cast<int>(rng() % 4);
    spec.n = 40 + static_cast<int>(rng() % 30);
    spec.seed = rng();
    const harness::SyntheticData data = harness::gen_synthetic(spec);
    FitConfig c;
    c.kernel = kinds[trial % 5];
    c.kernel_params.q = 2;
    c.lambda = std::pow(10.0, std::uniform_real_distribution<double>(-3.0, -0.5)(rng));
    c.q_max = 60;
    FitReport rep;
    const HklModel m = fit(data.x, data.y, c, &rep);
    const Dag dag = Dag::grid(spec.p, m.q);
    for (const VertexSet& w : rep.hull_trace) {
      ++checked;
      violations += dag.is_hull_closed(w) ? 0 : 1;
    }
    for (const auto* w : {&m.w, &m.w_active}) {
      ++checked;
      violations += dag.is_hull_closed(VertexSet(w->begin(), w->end())) ? 0 : 1;
    }
  }
  return {violations == 0, std::to_string(checked) + " sets checked over 50 fits, " + std::to_string(violations) +
                               " not hull-closed"};
}

Outcome reductions(const Options&) {
  // (a) one vertex
  std::mt19937_64 rng(105);
  const Matrix x = ts::random_matrix(40, 3, rng);
  const Vector y = x.col(0).array().sin() + x.col(1).cwiseProduct(x.col(2)).array() + 0.2 * ts::random_vector(40, rng).array();
  const KernelFamily fam(KernelKind::hermite, {}, 3);
  const Matrix k = harness::full_kernel_gram(fam, x, x);
  FitConfig c;
  c.lambda = 0.03;
  const ExplicitKernelSource one(Dag::custom(1, {}), {k}, c.weights);
  const HklModel m1 = fit(one, y, c);
  const DualSolution ref = solve_least_squares(k, y, c.lambda);
  const double err_a = (m1.fitted - ((center(k) * ref.alpha).array() + ref.b).matrix()).cwiseAbs().maxCoeff();

  // (b) edgeless DAG against an independent projected gradient MKL solver
  const Eigen::Index n = 40;
  std::vector<Matrix> grams;
  for (int i = 0; i < 5; ++i) {
    Matrix g(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b) g(a, b) = std::exp(-0.5 * std::pow(x(a, i % 3) * (1 + 0.3 * i) - x(b, i % 3) * (1 + 0.3 * i), 2));
    grams.push_back(g);
  }
  FitConfig cm;
  cm.lambda = 0.02;
  cm.eps_gap = 1e-10;
  cm.inner.eps_smooth = 1e-8;
  cm.inner.max_iter = 5000;
  const ExplicitKernelSource flat(Dag::edgeless(5), grams, cm.weights);
  const HklModel m2 = fit(flat, y, cm);
  const ts::FlatMklResult pg = ts::reference_flat_mkl(grams, Vector::Ones(5), y, cm.lambda);
  const double err_zeta = (m2.zeta - pg.eta).cwiseAbs().maxCoeff();
  const double err_obj = std::abs(m2.objective - pg.objective);
  const bool pass = err_a <= 1e-8 && err_zeta <= 1e-4 && err_obj <= 1e-6;
  return {pass, "(a) prediction error " + sci(err_a) + "; (b) zeta error " + sci(err_zeta) + ", objective error " +
                    sci(err_obj)};
}

Outcome gradient_check(const Options&) {
  std::mt19937_64 rng(106);
  // 6 vertices: a diamond with a tail and an extra source
  const ReducedDag dag = ReducedDag::from_parents({{}, {0}, {0}, {1, 2}, {3}, {}},
                                                  (Vector(6) << 1.0, 2.0, 2.0, 4.0, 8.0, 1.0).finished());
  std::vector<Matrix> grams;
  for (int i = 0; i < 6; ++i) grams.push_back(center(ts::random_gram(20, 3, rng)));
  std::vector<const Matrix*> ptrs;
  for (const Matrix& g : grams) ptrs.push_back(&g);
  const Vector y = ts::random_vector(20, rng);
  const double lambda = 0.05, eps = 1e-3;
  double worst = 0.0;
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Vector eta(6);
    for (auto& e : eta) e = u(rng);
    eta /= dag.d.array().square().matrix().dot(eta) * (1.0 + u(rng));
    const BEvaluation ev = evaluate_B(dag, ptrs, y, lambda, Loss(), eta, eps);
    Vector fd(6);
    for (Eigen::Index v = 0; v < 6; ++v) {
      const double h = 1e-5 * eta[v];
      Vector ep = eta, em = eta;
      ep[v] += h;
      em[v] -= h;
      fd[v] = (evaluate_B(dag, ptrs, y, lambda, Loss(), ep, eps).value -
               evaluate_B(dag, ptrs, y, lambda, Loss(), em, eps).value) / (2 * h);
    }
    worst = std::max(worst, (fd - ev.gradient).norm() / ev.gradient.norm());
  }
  return {worst <= 1e-5, "max relative gradient error " + sci(worst) + " at 20 points"};
}

Outcome oracle_equivalence(const Options&) {
  const Matrix x = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      oracle::kObjX, oracle::kObjN, 2);
  const Vector y = Vector::Map(oracle::kObjY, oracle::kObjN);
  FitConfig c;
  c.kernel = KernelKind::polynomial;
  c.kernel_params.q = 2;
  c.standardize = false;
  c.lambda = oracle::kObjLambda;
  c.weights = {1.0, oracle::kObjBeta};
  c.eps_gap = 1e-9;
  c.inner.eps_smooth = 1e-8;
  c.inner.max_iter = 5000;
  const HklModel m = fit(x, y, c);
  const double rel = std::abs(m.objective - oracle::kObjValue) / std::abs(oracle::kObjValue);
  std::ostringstream os;
  os.precision(10);
  os << "objective " << m.objective << " vs convex solver " << oracle::kObjValue << ", relative " << sci(rel);
  return {rel <= 1e-4, os.str()};
}

Outcome trend(const Options& opt) {
  const harness::BenchConfig cfg = harness::BenchConfig::from_toml_file(opt.trend_config);
  const auto dir = opt.out_dir / "trend";
  std::filesystem::create_directories(dir);
  const auto start = std::chrono::steady_clock::now();
  const harness::ResultsTable table = harness::run_benchmark(cfg, dir);
  const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 60.0;
  if (!table.all_ok()) return {false, "some runs failed; see " + (dir / "bench.log").string()};

  std::map<std::pair<harness::Method, int>, double> med;
  for (const harness::SummaryRow& s : table.summary()) med[{s.method, s.p}] = s.median;
  const int p_lo = cfg.p_values.front(), p_hi = cfg.p_values.back();
  const auto at = [&](harness::Method m, int p) { return med.at({m, p}); };
  using harness::Method;
  const double hkl_hi = at(Method::hkl, p_hi), l2_hi = at(Method::l2, p_hi), gr_hi = at(Method::greedy, p_hi);
  const double hkl_growth = hkl_hi - at(Method::hkl, p_lo), l2_growth = l2_hi - at(Method::l2, p_lo);
  const bool pass = hkl_hi <= l2_hi && hkl_hi <= gr_hi && hkl_growth < l2_growth;
  std::ostringstream os;
  os.precision(4);
  os << "median test MSE at p=" << p_hi << ": hkl " << hkl_hi << ", l2 " << l2_hi << ", greedy " << gr_hi
     << "; growth from p=" << p_lo << ": hkl " << hkl_growth << ", l2 " << l2_growth << "; " << minutes << " min";
  return {pass, os.str()};
}

Outcome tree_convexity(const Options&) {
  std::mt19937_64 rng(109);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  double worst_neg = 0.0, worst_budget = 0.0, worst_rt = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 2 + rng() % 11;
    std::vector<std::vector<std::size_t>> parents(m);
    std::vector<std::size_t> parent_of(m, m);
    for (std::size_t i = 1; i < m; ++i) {
      parent_of[i] = rng() % i;
      parents[i] = {parent_of[i]};
    }
    Vector d(static_cast<Eigen::Index>(m));
    for (auto& x : d) x = 0.5 + 2 * u(rng);
    const ReducedDag tree = ReducedDag::from_parents(parents, d);
    auto draw = [&]() {
      Vector e(static_cast<Eigen::Index>(m));
      for (auto& x : e) x = u(rng);
      return Vector(e / (d.array().square().matrix().dot(e) * (1.0 + 0.2 * u(rng))));
    };
    const Vector mid = 0.5 * (zeta_from_eta(tree, draw()) + zeta_from_eta(tree, draw()));
    Vector eta(static_cast<Eigen::Index>(m));
    for (std::size_t v = 0; v < m; ++v) {
      const double inv = 1.0 / mid[static_cast<Eigen::Index>(v)] -
                         (parent_of[v] < m ? 1.0 / mid[static_cast<Eigen::Index>(parent_of[v])] : 0.0);
      worst_neg = std::max(worst_neg, -inv * mid[static_cast<Eigen::Index>(v)]);
      eta[static_cast<Eigen::Index>(v)] = inv > 0 ? 1.0 / inv : std::numeric_limits<double>::infinity();
    }
    worst_budget = std::max(worst_budget, d.array().square().matrix().dot(eta) - 1.0);
    worst_rt = std::max(worst_rt, ((zeta_from_eta(tree, eta) - mid).array() / mid.array()).abs().maxCoeff());
  }
  const bool pass = worst_neg <= 1e-9 && worst_budget <= 1e-9 && worst_rt <= 1e-9;
  return {pass, "worst negative inverse " + sci(worst_neg) + ", worst budget excess " + sci(worst_budget) +
                    ", round trip " + sci(worst_rt) + " over 100 trees"};
}

Outcome fenchel_suite(const Options&) {
  const double h = 1e-3;
  double worst_fy = -std::numeric_limits<double>::infinity(), worst_bi = 0.0, worst_eq = 0.0;
  for (LossKind kind : {LossKind::least_squares, LossKind::logistic, LossKind::svr_1norm, LossKind::svr_2norm,
                        LossKind::huber, LossKind::svm_1norm, LossKind::svm_2norm}) {
    const Loss loss(kind, kind == LossKind::huber ? 0.8 : 0.25);
    const std::vector<double> ys = loss.is_classification() ? std::vector<double>{-1, 1} : std::vector<double>{-1.1, 0, 0.7};
    for (double y : ys) {
      for (double uu = -2.5; uu <= 2.5; uu += 0.05) {
        const double phi = loss.value(y, uu);
        double sup = -std::numeric_limits<double>::infinity();
        for (double beta = -6.0; beta <= 6.0; beta += h) {
          const double psi = loss.conjugate(y, beta);
          if (!std::isfinite(psi)) continue;
          // slack relative to the size of the terms
          worst_fy = std::max(worst_fy, (uu * beta - phi - psi) / (1.0 + std::abs(uu * beta) + std::abs(phi) + std::abs(psi)));
          sup = std::max(sup, uu * beta - psi);
        }
        worst_bi = std::max(worst_bi, std::abs(sup - phi));
        const double g = loss.derivative(y, uu);
        worst_eq = std::max(worst_eq, std::abs(phi + loss.conjugate(y, g) - uu * g));
      }
    }
  }
  // grid tolerance: the supremum over a lattice of spacing h misses the
  // maximizer by at most h times the largest slope of the objective
  const bool pass = worst_fy <= 1e-12 && worst_bi <= 5 * h && worst_eq <= 1e-9;
  return {pass, "relative Fenchel-Young slack " + sci(worst_fy) + ", biconjugacy error " + sci(worst_bi) +
                    ", equality at the derivative " + sci(worst_eq)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HKL acceptance suite"};
  std::vector<int> selected;
  Options opt;
  app.add_option("--criterion", selected, "Criterion numbers to run (default: all)")->check(CLI::Range(1, 10));
  app.add_option("--out-dir", opt.out_dir, "Directory for benchmark artifacts");
  app.add_option("--trend-config", opt.trend_config, "TOML configuration of the dimension trend benchmark");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome(const Options&)>>> criteria = {
      {"decomposition identities", decomposition_identity},
      {"cached sums", cached_sums},
      {"certified duality gap", certified_gap},
      {"hull property", hull_property},
      {"reductions", reductions},
      {"gradient check", gradient_check},
      {"convex oracle equivalence", oracle_equivalence},
      {"dimension trend", trend},
      {"tree convexity", tree_convexity},
      {"Fenchel suite", fenchel_suite},
  };
  if (selected.empty())
    for (int i = 1; i <= 10; ++i) selected.push_back(i);

  bool all = true;
  for (int id : selected) {
    const auto& [name, fn] = criteria[static_cast<std::size_t>(id - 1)];
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn(opt);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "criterion " << id << " (" << name << "): " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail
              << " [" << std::fixed << std::setprecision(2) << secs << " s]" << std::defaultfloat << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
