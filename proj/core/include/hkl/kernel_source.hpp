#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "hkl/dag.hpp"
#include "hkl/kernel_atlas.hpp"
#include "hkl/types.hpp"

namespace hkl {

/// Computes k_v(x_new, x_train) for a vertex; rows index the new points.
using CrossGramFn = std::function<Matrix(const Matrix& x_new, const Label& v)>;

/// What the active-set algorithm needs to know about the kernels of a DAG.
///
/// Quadratic forms always center alpha first, so they equal alpha^T K~ alpha
/// for any alpha. Implementations keep internal caches behind a mutex and are
/// safe to share across threads.
class KernelSource {
 public:
  virtual ~KernelSource() = default;

  virtual const Dag& dag() const = 0;
  virtual const WeightScheme& weights() const = 0;
  virtual Eigen::Index n() const = 0;

  /// Uncentered Gram matrix of vertex v.
  virtual Matrix gram(const Label& v) const = 0;
  Matrix centered_gram(const Label& v) const { return center(gram(v)); }
  virtual double quadform(const Label& v, const Vector& alpha) const;

  /// Centered cached sum: sum over w in D(t) of (sum over A(w) and D(t) of d)^-2 K~_w.
  virtual Matrix sufficient_gram(const Label& t) const = 0;
  virtual double sufficient_quadform(const Label& t, const Vector& alpha) const;

  double weight(const Label& v) const { return dag().weight(v, weights()); }
};

/// Grid DAG over a product-of-sums kernel, driven by a KernelAtlas.
class GridKernelSource final : public KernelSource {
 public:
  /// `cache_bytes` bounds the memory spent on cached products over the
  /// dimensions outside a vertex's support.
  GridKernelSource(std::shared_ptr<const KernelAtlas> atlas, WeightScheme weights,
                   std::size_t dense_cap = Dag::kDefaultDenseCap, std::size_t cache_bytes = std::size_t{1} << 30);

  const Dag& dag() const override { return dag_; }
  const WeightScheme& weights() const override { return weights_; }
  Eigen::Index n() const override { return atlas_->n(); }
  const KernelAtlas& atlas() const { return *atlas_; }
  std::shared_ptr<const KernelAtlas> atlas_ptr() const { return atlas_; }

  Matrix gram(const Label& v) const override { return atlas_->node_gram(v); }
  double quadform(const Label& v, const Vector& alpha) const override;
  Matrix sufficient_gram(const Label& t) const override;
  double sufficient_quadform(const Label& t, const Vector& alpha) const override;

 private:
  using Support = std::vector<int>;
  struct Cache {
    std::map<Support, std::pair<std::shared_ptr<const Matrix>, std::uint64_t>> entries;
    std::uint64_t clock = 0;
    // prefix[i] = product over l < i, suffix[i] = product over l >= i
    std::vector<Matrix> prefix;
    std::vector<Matrix> suffix;
  };

  const Matrix& partial(int i, int j) const;
  const Matrix& order_zero(int i, bool sufficient) const;
  std::shared_ptr<const Matrix> rest_product(const Support& s, bool sufficient) const;

  std::shared_ptr<const KernelAtlas> atlas_;
  WeightScheme weights_;
  Dag dag_;
  std::size_t cache_capacity_ = 0;
  mutable std::mutex mutex_;
  mutable std::vector<std::unique_ptr<Matrix>> partials_;
  mutable Cache order_zero_cache_;
  mutable Cache partial_zero_cache_;
};

/// Arbitrary DAG with explicitly supplied (uncentered) Gram matrices, one per
/// vertex in the DAG's vertex order. Cached sums are enumerated directly.
class ExplicitKernelSource final : public KernelSource {
 public:
  ExplicitKernelSource(Dag dag, std::vector<Matrix> grams, WeightScheme weights);

  const Dag& dag() const override { return dag_; }
  const WeightScheme& weights() const override { return weights_; }
  Eigen::Index n() const override { return n_; }

  Matrix gram(const Label& v) const override;
  double quadform(const Label& v, const Vector& alpha) const override;
  Matrix sufficient_gram(const Label& t) const override;

 private:
  Dag dag_;
  std::vector<Matrix> grams_;
  WeightScheme weights_;
  Eigen::Index n_ = 0;
  mutable std::mutex mutex_;
  mutable std::map<Label, std::shared_ptr<const Matrix>> sufficient_cache_;
};

/// Edgeless DAG with one additive kernel per input variable,
/// K_i = sum_{j=1..q} node_gram(j e_i): the sparse additive model used as
/// the flat multiple kernel learning baseline.
std::shared_ptr<ExplicitKernelSource> make_additive_source(const KernelAtlas& atlas,
                                                            WeightScheme weights);

/// alpha^T (scale * R o F_1 o ... o F_k) alpha without forming the product.
double hadamard_quadform(const Vector& alpha, const Matrix* r, const std::vector<const Matrix*>& factors,
                         double scale = 1.0);

}  // namespace hkl
