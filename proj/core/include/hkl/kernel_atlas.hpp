#pragma once

#include <vector>

#include "hkl/dag.hpp"
#include "hkl/kernel_family.hpp"
#include "hkl/types.hpp"

namespace hkl {

/// Per-dimension Gram blocks B_ij(x_a, x_b) between two point sets, laid out
/// as blocks[i * (q+1) + j].
class BlockSet {
 public:
  BlockSet() = default;
  BlockSet(const KernelFamily& family, const Matrix& za, const Matrix& zb);

  int p() const { return p_; }
  int q() const { return q_; }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  const Matrix& block(int i, int j) const;
  /// Hadamard product over dimensions of block(i, v_i).
  Matrix node(const Label& v) const;

 private:
  int p_ = 0;
  int q_ = 0;
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::vector<Matrix> blocks_;
};

/// All base Gram blocks of a training set under a product-of-sums kernel.
/// Immutable after construction.
class KernelAtlas {
 public:
  /// `z` holds the (already standardized) training inputs, one row per sample.
  KernelAtlas(Matrix z, KernelFamily family);

  Eigen::Index n() const { return z_.rows(); }
  int p() const { return static_cast<int>(z_.cols()); }
  int q() const { return family_.q(); }
  const KernelFamily& family() const { return family_; }
  const Matrix& data() const { return z_; }
  const BlockSet& blocks() const { return blocks_; }
  const Matrix& block(int i, int j) const { return blocks_.block(i, j); }
  /// True when every order-0 block is the all-ones matrix.
  bool constant_order_zero() const { return constant_order_zero_; }

  Matrix node_gram(const Label& v) const;
  /// True when node_gram(v) = f f^T for the vector f returned by node_feature.
  bool rank_one_node(const Label& v) const;
  Vector node_feature(const Label& v) const;
  Matrix full_sum_gram() const;
  /// S_i(j) = sum_{j' >= j} ((beta-1)/(beta^{j'-j+1}-1))^2 B_ij'.
  Matrix sufficient_partial(int i, int j, double beta) const;
  /// Centered cached sum for vertex t of the grid DAG.
  Matrix sufficient_sum_gram(const Label& t, const WeightScheme& weights) const;
  Matrix cross_node_gram(const Matrix& z_new, const Label& v) const;

 private:
  void check_label(const Label& v) const;

  Matrix z_;
  KernelFamily family_;
  BlockSet blocks_;
  bool constant_order_zero_ = false;
};

/// P K P with P = I - 11^T / n.
Matrix center(const Matrix& k);
/// ((beta - 1) / (beta^{gap+1} - 1))^2.
double sufficient_coefficient(double beta, int gap);

}  // namespace hkl
