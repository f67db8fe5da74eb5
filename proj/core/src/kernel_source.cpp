#include "hkl/kernel_source.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "hkl/error.hpp"

namespace hkl {

namespace {

Vector centered(const Vector& alpha) { return alpha.array() - alpha.mean(); }

}  // namespace

double hadamard_quadform(const Vector& alpha, const Matrix* r, const std::vector<const Matrix*>& factors,
                         double scale) {
  const Eigen::Index n = alpha.size();
  Eigen::ArrayXd col(n);
  double total = 0.0;
  for (Eigen::Index c = 0; c < n; ++c) {
    if (r != nullptr) col = r->col(c).array();
    else col.setOnes();
    for (const Matrix* f : factors) col *= f->col(c).array();
    total += alpha[c] * (col * alpha.array()).sum();
  }
  return scale * total;
}

double KernelSource::quadform(const Label& v, const Vector& alpha) const {
  const Vector a = centered(alpha);
  return a.dot(gram(v) * a);
}

double KernelSource::sufficient_quadform(const Label& t, const Vector& alpha) const {
  const Vector a = centered(alpha);
  return a.dot(sufficient_gram(t) * a);
}

GridKernelSource::GridKernelSource(std::shared_ptr<const KernelAtlas> atlas, WeightScheme weights,
                                   std::size_t dense_cap, std::size_t cache_bytes)
    : atlas_(std::move(atlas)), weights_(weights), dag_(Dag::grid(atlas_->p(), atlas_->q(), dense_cap)) {
  weights_.validate();
  const auto matrix_bytes = static_cast<std::size_t>(atlas_->n() * atlas_->n()) * sizeof(double);
  cache_capacity_ = std::max<std::size_t>(8, cache_bytes / std::max<std::size_t>(matrix_bytes, 1));
  partials_.resize(static_cast<std::size_t>(atlas_->p() * (atlas_->q() + 1)));
}

const Matrix& GridKernelSource::partial(int i, int j) const {
  auto& slot = partials_[static_cast<std::size_t>(i * (atlas_->q() + 1) + j)];
  if (!slot) slot = std::make_unique<Matrix>(atlas_->sufficient_partial(i, j, weights_.beta));
  return *slot;
}

const Matrix& GridKernelSource::order_zero(int i, bool sufficient) const {
  return sufficient ? partial(i, 0) : atlas_->block(i, 0);
}

std::shared_ptr<const Matrix> GridKernelSource::rest_product(const Support& s, bool sufficient) const {
  Cache& cache = sufficient ? partial_zero_cache_ : order_zero_cache_;
  ++cache.clock;
  if (auto it = cache.entries.find(s); it != cache.entries.end()) {
    it->second.second = cache.clock;
    return it->second.first;
  }
  const int p = atlas_->p();
  if (cache.prefix.empty()) {
    cache.prefix.assign(static_cast<std::size_t>(p) + 1, Matrix());
    cache.suffix.assign(static_cast<std::size_t>(p) + 1, Matrix());
    cache.prefix[0] = Matrix::Ones(n(), n());
    for (int i = 0; i < p; ++i)
      cache.prefix[static_cast<std::size_t>(i) + 1] =
          cache.prefix[static_cast<std::size_t>(i)].cwiseProduct(order_zero(i, sufficient));
    cache.suffix[static_cast<std::size_t>(p)] = Matrix::Ones(n(), n());
    for (int i = p - 1; i >= 0; --i)
      cache.suffix[static_cast<std::size_t>(i)] =
          cache.suffix[static_cast<std::size_t>(i) + 1].cwiseProduct(order_zero(i, sufficient));
  }
  std::shared_ptr<Matrix> m;
  if (s.empty()) {
    m = std::make_shared<Matrix>(cache.prefix[static_cast<std::size_t>(p)]);
  } else {
    m = std::make_shared<Matrix>(cache.prefix[static_cast<std::size_t>(s.front())].cwiseProduct(
        cache.suffix[static_cast<std::size_t>(s.back()) + 1]));
    std::size_t k = 0;
    for (int i = s.front(); i < s.back(); ++i) {
      if (k < s.size() && s[k] == i) {
        ++k;
        continue;
      }
      m->array() *= order_zero(i, sufficient).array();
    }
  }
  if (cache.entries.size() >= cache_capacity_) {
    auto oldest = cache.entries.begin();
    for (auto it = cache.entries.begin(); it != cache.entries.end(); ++it)
      if (it->second.second < oldest->second.second) oldest = it;
    cache.entries.erase(oldest);
  }
  cache.entries.emplace(s, std::make_pair(m, cache.clock));
  return m;
}

double GridKernelSource::quadform(const Label& v, const Vector& alpha) const {
  if (!dag_.contains(v)) throw InvalidArgument("unknown vertex " + to_string(v));
  const Vector a = centered(alpha);
  Support s;
  std::vector<const Matrix*> factors;
  for (int i = 0; i < atlas_->p(); ++i) {
    if (v[static_cast<std::size_t>(i)] != 0) {
      s.push_back(i);
      factors.push_back(&atlas_->block(i, v[static_cast<std::size_t>(i)]));
    }
  }
  if (atlas_->constant_order_zero()) return hadamard_quadform(a, nullptr, factors);
  std::lock_guard<std::mutex> lock(mutex_);
  const auto r = rest_product(s, false);
  return hadamard_quadform(a, r.get(), factors);
}

Matrix GridKernelSource::sufficient_gram(const Label& t) const {
  return atlas_->sufficient_sum_gram(t, weights_);
}

double GridKernelSource::sufficient_quadform(const Label& t, const Vector& alpha) const {
  if (!dag_.contains(t)) throw InvalidArgument("unknown vertex " + to_string(t));
  const Vector a = centered(alpha);
  Support s;
  int depth = 0;
  std::lock_guard<std::mutex> lock(mutex_);
  std::vector<const Matrix*> factors;
  for (int i = 0; i < atlas_->p(); ++i) {
    const int ti = t[static_cast<std::size_t>(i)];
    if (ti != 0) {
      s.push_back(i);
      depth += ti;
      factors.push_back(&partial(i, ti));
    }
  }
  const double scale = depth == 0 ? 1.0 / (weights_.d_r * weights_.d_r) : std::pow(weights_.beta, -2.0 * depth);
  const auto r = rest_product(s, true);
  return hadamard_quadform(a, r.get(), factors, scale);
}

ExplicitKernelSource::ExplicitKernelSource(Dag dag, std::vector<Matrix> grams, WeightScheme weights)
    : dag_(std::move(dag)), grams_(std::move(grams)), weights_(weights) {
  weights_.validate();
  if (grams_.size() != dag_.size()) throw InvalidArgument("one Gram matrix per vertex is required");
  if (grams_.empty()) throw InvalidArgument("explicit kernel source needs at least one vertex");
  n_ = grams_.front().rows();
  for (const Matrix& g : grams_) {
    if (g.rows() != n_ || g.cols() != n_) throw InvalidArgument("Gram matrices must all be n x n");
    if (!g.allFinite()) throw InvalidArgument("non-finite Gram matrix");
  }
}

Matrix ExplicitKernelSource::gram(const Label& v) const { return grams_[dag_.index_of(v)]; }

double ExplicitKernelSource::quadform(const Label& v, const Vector& alpha) const {
  const Vector a = centered(alpha);
  return a.dot(grams_[dag_.index_of(v)] * a);
}

Matrix ExplicitKernelSource::sufficient_gram(const Label& t) const {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (auto it = sufficient_cache_.find(t); it != sufficient_cache_.end()) return *it->second;
  }
  const VertexSet desc = dag_.descendants(t);
  Matrix sum = Matrix::Zero(n_, n_);
  for (const Label& w : desc) {
    double denom = 0.0;
    for (const Label& v : dag_.ancestors(w))
      if (desc.count(v) != 0) denom += dag_.weight(v, weights_);
    sum += grams_[dag_.index_of(w)] / (denom * denom);
  }
  auto result = std::make_shared<const Matrix>(center(sum));
  std::lock_guard<std::mutex> lock(mutex_);
  sufficient_cache_.emplace(t, result);
  return *result;
}

std::shared_ptr<ExplicitKernelSource> make_additive_source(const KernelAtlas& atlas, WeightScheme weights) {
  std::vector<Matrix> grams;
  grams.reserve(static_cast<std::size_t>(atlas.p()));
  for (int i = 0; i < atlas.p(); ++i) {
    Label v(static_cast<std::size_t>(atlas.p()), 0);
    Matrix k = Matrix::Zero(atlas.n(), atlas.n());
    for (int j = 1; j <= atlas.q(); ++j) {
      v[static_cast<std::size_t>(i)] = j;
      k += atlas.node_gram(v);
    }
    grams.push_back(std::move(k));
  }
  return std::make_shared<ExplicitKernelSource>(Dag::edgeless(static_cast<std::size_t>(atlas.p())),
                                                std::move(grams), weights);
}

}  // namespace hkl
