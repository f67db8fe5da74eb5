#include "hkl/harness/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <memory>
#include <random>

#include "hkl/error.hpp"
#include "hkl/kernel_atlas.hpp"
#include "hkl/single_solver.hpp"

namespace hkl::harness {
namespace {

struct Prepared {
  Standardizer st;
  std::shared_ptr<const KernelAtlas> atlas;
};

Prepared prepare(const Matrix& x, const Vector& y, const FitConfig& config) {
  if (x.rows() != y.size()) throw InvalidArgument("X and y differ in the number of rows");
  if (x.cols() < 1) throw InvalidArgument("X must have at least one column");
  if (!(config.lambda > 0.0)) throw InvalidArgument("lambda must be positive");
  Prepared out;
  out.st = config.standardize ? Standardizer::fit(x) : Standardizer::identity(static_cast<int>(x.cols()));
  KernelFamily family(config.kernel, config.kernel_params, static_cast<int>(x.cols()));
  out.atlas = std::make_shared<const KernelAtlas>(out.st.apply(x), family);
  return out;
}

Matrix submatrix(const Matrix& k, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b)
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          k(static_cast<Eigen::Index>(rows[a]), static_cast<Eigen::Index>(cols[b]));
  return out;
}

Vector subvector(const Vector& v, const std::vector<std::size_t>& idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t a = 0; a < idx.size(); ++a) out[static_cast<Eigen::Index>(a)] = v[static_cast<Eigen::Index>(idx[a])];
  return out;
}

// Fits a single kernel and returns (alpha, b) valid for the uncentered Gram.
std::pair<Vector, double> single_fit(const Matrix& k, const Vector& y, double lambda, const Loss& loss) {
  const DualSolution sol = solve_dual(k, y, lambda, loss);
  const Vector u = k * sol.alpha;
  return {sol.alpha, intercept(loss, y, u)};
}

HklModel single_node_model(const FitConfig& config, const Loss& loss, const Matrix& k, const Vector& y) {
  HklModel model;
  model.dag_kind = DagKind::custom;
  model.p = 0;
  model.q = 0;
  model.weights = config.weights;
  model.has_kernel_family = false;
  model.kernel = config.kernel;
  model.loss = config.loss;
  model.lambda = config.lambda;
  model.eps_gap = config.eps_gap;
  model.w = {Label{0}};
  model.w_active = model.w;
  model.eta = Vector::Ones(1);
  model.zeta = Vector::Ones(1);
  const DualSolution sol = solve_dual(k, y, config.lambda, loss);
  model.alpha = sol.alpha;
  const Vector u = k * sol.alpha;
  model.b = intercept(loss, y, u);
  model.fitted = u.array() + model.b;
  model.objective = primal_objective(k, y, sol.alpha, config.lambda, loss);
  model.gap = sol.gap;
  model.gap_certified = sol.gap <= 2.0 * config.eps_gap;
  return model;
}

}  // namespace

std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  // Fisher-Yates with an explicit draw so the order does not depend on the
  // standard library's shuffle.
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

double prediction_score(const Loss& loss, const Vector& truth, const Vector& scores) {
  if (truth.size() != scores.size()) throw InvalidArgument("score and truth lengths differ");
  if (truth.size() == 0) throw InvalidArgument("cannot score an empty set");
  if (loss.is_classification()) {
    Eigen::Index wrong = 0;
    for (Eigen::Index i = 0; i < truth.size(); ++i)
      if ((scores[i] >= 0.0 ? 1.0 : -1.0) != truth[i]) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(truth.size());
  }
  return (truth - scores).squaredNorm() / static_cast<double>(truth.size());
}

Matrix full_kernel_gram(const KernelFamily& family, const Matrix& za, const Matrix& zb) {
  if (za.cols() != zb.cols()) throw InvalidArgument("point sets differ in dimension");
  Matrix k = Matrix::Ones(za.rows(), zb.rows());
  for (Eigen::Index b = 0; b < zb.rows(); ++b)
    for (Eigen::Index a = 0; a < za.rows(); ++a)
      for (Eigen::Index i = 0; i < za.cols(); ++i) k(a, b) *= family.closed_form(za(a, i), zb(b, i));
  return k;
}

HklModel l2_full_fit(const KernelFamily& family, const Standardizer& st, const Matrix& z, const Matrix& k,
                     const Vector& y, const FitConfig& config) {
  if (z.rows() != y.size() || k.rows() != y.size() || k.cols() != y.size())
    throw InvalidArgument("inputs, Gram and targets differ in size");
  if (!(config.lambda > 0.0)) throw InvalidArgument("lambda must be positive");
  const Loss loss = effective_loss(config);
  HklModel model = single_node_model(config, loss, k, y);
  model.p = static_cast<int>(z.cols());
  model.kernel_params = family.params();
  model.standardizer = st;
  model.train_z = z;
  model.cross_gram = [family, st, z](const Matrix& x_new, const Label&) {
    if (x_new.cols() != z.cols()) throw InvalidArgument("prediction data has the wrong number of columns");
    return full_kernel_gram(family, st.apply(x_new), z);
  };
  return model;
}

HklModel l2_full_fit(const Matrix& x, const Vector& y, const FitConfig& config) {
  if (x.rows() != y.size()) throw InvalidArgument("X and y differ in the number of rows");
  if (x.cols() < 1) throw InvalidArgument("X must have at least one column");
  const Standardizer st =
      config.standardize ? Standardizer::fit(x) : Standardizer::identity(static_cast<int>(x.cols()));
  const KernelFamily family(config.kernel, config.kernel_params, static_cast<int>(x.cols()));
  const Matrix z = st.apply(x);
  return l2_full_fit(family, st, z, full_kernel_gram(family, z, z), y, config);
}

HklModel flat_mkl_fit(const Matrix& x, const Vector& y, const FitConfig& config, FitReport* report,
                      const WarmStart* warm) {
  const Prepared prep = prepare(x, y, config);
  const auto source = make_additive_source(*prep.atlas, config.weights);
  HklModel model = fit(*source, y, config, report, warm);
  model.has_kernel_family = false;
  model.kernel = config.kernel;
  model.kernel_params = prep.atlas->family().params();
  model.standardizer = prep.st;
  model.train_z = prep.atlas->data();
  const auto atlas = prep.atlas;
  const Standardizer st = prep.st;
  model.cross_gram = [atlas, st](const Matrix& x_new, const Label& v) {
    if (x_new.cols() != atlas->data().cols()) throw InvalidArgument("prediction data has the wrong number of columns");
    const Matrix z = st.apply(x_new);
    Label node(static_cast<std::size_t>(atlas->p()), 0);
    Matrix k = Matrix::Zero(z.rows(), atlas->n());
    for (int j = 1; j <= atlas->q(); ++j) {
      node[static_cast<std::size_t>(v.at(0))] = j;
      k += atlas->cross_node_gram(z, node);
    }
    return k;
  };
  return model;
}

HklModel greedy_forward_fit(const Matrix& x, const Vector& y, const FitConfig& config, const GreedyOptions& options,
                            GreedyTrace* trace) {
  if (!(options.validation_fraction > 0.0 && options.validation_fraction < 1.0))
    throw InvalidArgument("validation_fraction must lie in (0, 1)");
  const std::size_t n = static_cast<std::size_t>(x.rows());
  const auto n_val = static_cast<std::size_t>(std::llround(options.validation_fraction * static_cast<double>(n)));
  if (n_val < 1 || n - n_val < 2) throw InvalidArgument("too few rows for the internal validation split");
  const Prepared prep = prepare(x, y, config);
  const KernelAtlas& atlas = *prep.atlas;
  const Loss loss = effective_loss(config);
  const Dag dag = Dag::grid(atlas.p(), atlas.q(), config.dense_cap);
  const bool closed_form_ls = config.loss.kind() == LossKind::least_squares;

  const std::vector<std::size_t> perm = permutation(n, options.seed);
  std::vector<std::size_t> val(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> tr(perm.begin() + static_cast<std::ptrdiff_t>(n_val), perm.end());
  std::sort(val.begin(), val.end());
  std::sort(tr.begin(), tr.end());
  const Vector y_tr = subvector(y, tr);
  const Vector y_val = subvector(y, val);
  const double ridge = static_cast<double>(tr.size()) * config.lambda;

  auto coefficient = [&](const Label& v) {
    if (!options.depth_weighted) return 1.0;
    const double d = dag.weight(v, config.weights);
    return 1.0 / (d * d);
  };

  VertexSet w;
  Matrix k = Matrix::Zero(atlas.n(), atlas.n());
  for (const Label& r : dag.roots()) {
    w.insert(r);
    k += coefficient(r) * atlas.node_gram(r);
  }

  // Held-out score of the kernel sum k (+ c f f^T when f is given), where the
  // rank-one term goes through a Sherman-Morrison update of a factorization
  // shared by all candidates of one step.
  struct Step {
    Matrix k_tr, k_vt;
    Eigen::LLT<Matrix> llt;
    Vector u;
  };
  auto prepare_step = [&](Step& st) {
    st.k_tr = submatrix(k, tr, tr);
    st.k_vt = submatrix(k, val, tr);
    if (closed_form_ls) {
      Matrix sys = center(st.k_tr);
      sys.diagonal().array() += ridge;
      st.llt.compute(sys);
      if (st.llt.info() != Eigen::Success) throw SolverError("greedy: least squares system is not positive definite");
      st.u = st.llt.solve(Vector(y_tr.array() - y_tr.mean()));
    }
  };
  auto score_full = [&](const Step& st, const Matrix* extra_tr, const Matrix* extra_vt) {
    Matrix ktr = st.k_tr;
    Matrix kvt = st.k_vt;
    if (extra_tr != nullptr) {
      ktr += *extra_tr;
      kvt += *extra_vt;
    }
    const auto [alpha, b] = single_fit(ktr, y_tr, config.lambda, loss);
    const Vector s = (kvt * alpha).array() + b;
    return prediction_score(config.loss, y_val, s);
  };
  auto score_rank_one = [&](const Step& st, double c, const Vector& f) {
    const Vector f_tr = subvector(f, tr);
    const Vector f_val = subvector(f, val);
    const Vector fc = f_tr.array() - f_tr.mean();
    const Vector v = st.llt.solve(fc);
    const Vector alpha = st.u - v * (c * fc.dot(st.u) / (1.0 + c * fc.dot(v)));
    const double proj = c * f_tr.dot(alpha);
    const Vector fit_tr = st.k_tr * alpha + proj * f_tr;
    const double b = (y_tr - fit_tr).mean();
    const Vector s = (st.k_vt * alpha + proj * f_val).array() + b;
    return prediction_score(config.loss, y_val, s);
  };

  Step step;
  prepare_step(step);
  double best = score_full(step, nullptr, nullptr);
  if (trace != nullptr) {
    trace->hull_trace.push_back(w);
    trace->validation_trace.push_back(best);
  }
  std::map<Label, Vector> features;
  while (w.size() < config.q_max) {
    const VertexSet frontier = dag.complement_sources(w);
    if (frontier.empty()) break;
    std::optional<Label> pick;
    double pick_score = best;
    for (const Label& t : frontier) {
      const double c = coefficient(t);
      double s;
      if (closed_form_ls && atlas.rank_one_node(t)) {
        auto it = features.find(t);
        if (it == features.end()) it = features.emplace(t, atlas.node_feature(t)).first;
        s = score_rank_one(step, c, it->second);
      } else {
        const Matrix g = c * atlas.node_gram(t);
        const Matrix g_tr = submatrix(g, tr, tr);
        const Matrix g_vt = submatrix(g, val, tr);
        s = score_full(step, &g_tr, &g_vt);
      }
      if (s < pick_score - 1e-12 * std::abs(pick_score)) {
        pick_score = s;
        pick = t;
      }
    }
    if (!pick) break;
    w.insert(*pick);
    k += coefficient(*pick) * atlas.node_gram(*pick);
    features.erase(*pick);
    best = pick_score;
    prepare_step(step);
    if (trace != nullptr) {
      trace->hull_trace.push_back(w);
      trace->validation_trace.push_back(best);
    }
  }

  HklModel model = single_node_model(config, loss, k, y);
  model.dag_kind = dag.kind();
  model.p = dag.p();
  model.q = dag.q();
  model.has_kernel_family = true;
  model.kernel_params = atlas.family().params();
  model.standardizer = prep.st;
  model.train_z = atlas.data();
  model.w.assign(w.begin(), w.end());
  std::stable_sort(model.w.begin(), model.w.end(),
                   [&](const Label& a, const Label& b) { return dag.topo_rank(a) < dag.topo_rank(b); });
  model.w_active = model.w;
  model.zeta.resize(static_cast<Eigen::Index>(model.w.size()));
  for (std::size_t i = 0; i < model.w.size(); ++i) model.zeta[static_cast<Eigen::Index>(i)] = coefficient(model.w[i]);
  model.eta = model.zeta;
  return model;
}

}  // namespace hkl::harness
