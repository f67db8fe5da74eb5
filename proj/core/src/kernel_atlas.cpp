#include "hkl/kernel_atlas.hpp"

#include <cmath>
#include <utility>

#include "hkl/error.hpp"

namespace hkl {

BlockSet::BlockSet(const KernelFamily& family, const Matrix& za, const Matrix& zb)
    : p_(static_cast<int>(za.cols())), q_(family.q()), rows_(za.rows()), cols_(zb.rows()) {
  if (za.cols() != zb.cols()) throw InvalidArgument("block set: dimension mismatch");
  if (!za.allFinite() || !zb.allFinite()) throw InvalidArgument("block set: non-finite data");
  const auto q = static_cast<Eigen::Index>(q_);
  blocks_.reserve(static_cast<std::size_t>(p_ * (q_ + 1)));
  Matrix fa(rows_, q), fb(cols_, q);
  Eigen::Matrix<double, 1, Eigen::Dynamic> row(q);
  for (int i = 0; i < p_; ++i) {
    for (Eigen::Index r = 0; r < rows_; ++r) {
      family.features(za(r, i), row.data());
      fa.row(r) = row;
    }
    for (Eigen::Index c = 0; c < cols_; ++c) {
      family.features(zb(c, i), row.data());
      fb.row(c) = row;
    }
    for (Eigen::Index j = 0; j < q; ++j) blocks_.push_back(fa.col(j) * fb.col(j).transpose());
    Matrix last(rows_, cols_);
    std::vector<double> ga(static_cast<std::size_t>(q)), gb(static_cast<std::size_t>(q));
    for (Eigen::Index c = 0; c < cols_; ++c) {
      for (Eigen::Index j = 0; j < q; ++j) gb[static_cast<std::size_t>(j)] = fb(c, j);
      for (Eigen::Index r = 0; r < rows_; ++r) {
        for (Eigen::Index j = 0; j < q; ++j) ga[static_cast<std::size_t>(j)] = fa(r, j);
        last(r, c) = family.last_block(za(r, i), zb(c, i), ga.data(), gb.data());
      }
    }
    blocks_.push_back(std::move(last));
  }
}

const Matrix& BlockSet::block(int i, int j) const {
  if (i < 0 || i >= p_ || j < 0 || j > q_) throw InvalidArgument("block index out of range");
  return blocks_[static_cast<std::size_t>(i * (q_ + 1) + j)];
}

Matrix BlockSet::node(const Label& v) const {
  if (static_cast<int>(v.size()) != p_) throw InvalidArgument("label length does not match p");
  Matrix out = Matrix::Ones(rows_, cols_);
  for (int i = 0; i < p_; ++i) {
    const int j = v[static_cast<std::size_t>(i)];
    if (j < 0 || j > q_) throw InvalidArgument("label entry out of range: " + to_string(v));
    out.array() *= blocks_[static_cast<std::size_t>(i * (q_ + 1) + j)].array();
  }
  return out;
}

KernelAtlas::KernelAtlas(Matrix z, KernelFamily family)
    : z_(std::move(z)), family_(std::move(family)), blocks_(family_, z_, z_) {
  if (z_.rows() < 2) throw InvalidArgument("kernel atlas requires n >= 2");
  if (z_.cols() < 1) throw InvalidArgument("kernel atlas requires p >= 1");
  constant_order_zero_ = true;
  for (int i = 0; i < p() && constant_order_zero_; ++i)
    constant_order_zero_ = (block(i, 0).array() == 1.0).all();
}

void KernelAtlas::check_label(const Label& v) const {
  if (static_cast<int>(v.size()) != p()) throw InvalidArgument("label length does not match p");
  for (int j : v)
    if (j < 0 || j > q()) throw InvalidArgument("label entry out of range: " + to_string(v));
}

Matrix KernelAtlas::node_gram(const Label& v) const { return blocks_.node(v); }

bool KernelAtlas::rank_one_node(const Label& v) const {
  check_label(v);
  for (int j : v)
    if (!family_.rank_one_block(j)) return false;
  return true;
}

Vector KernelAtlas::node_feature(const Label& v) const {
  if (!rank_one_node(v)) throw InvalidArgument("node " + to_string(v) + " is not rank one");
  Vector f = Vector::Ones(n());
  for (int i = 0; i < p(); ++i) {
    const int j = v[static_cast<std::size_t>(i)];
    if (j == 0 && constant_order_zero_) continue;
    for (Eigen::Index a = 0; a < n(); ++a) f[a] *= family_.feature(j, z_(a, i));
  }
  return f;
}

Matrix KernelAtlas::full_sum_gram() const {
  Matrix out = Matrix::Ones(n(), n());
  for (int i = 0; i < p(); ++i) {
    Matrix s = block(i, 0);
    for (int j = 1; j <= q(); ++j) s += block(i, j);
    out.array() *= s.array();
  }
  return out;
}

double sufficient_coefficient(double beta, int gap) {
  const double c = (beta - 1.0) / (std::pow(beta, gap + 1) - 1.0);
  return c * c;
}

Matrix KernelAtlas::sufficient_partial(int i, int j, double beta) const {
  if (!(beta > 1.0)) throw InvalidArgument("sufficient sums require beta > 1");
  Matrix s = block(i, j);
  for (int jj = j + 1; jj <= q(); ++jj) s += sufficient_coefficient(beta, jj - j) * block(i, jj);
  return s;
}

Matrix KernelAtlas::sufficient_sum_gram(const Label& t, const WeightScheme& weights) const {
  weights.validate();
  check_label(t);
  Matrix out = Matrix::Ones(n(), n());
  int depth = 0;
  for (int i = 0; i < p(); ++i) {
    const int ti = t[static_cast<std::size_t>(i)];
    depth += ti;
    out.array() *= sufficient_partial(i, ti, weights.beta).array();
  }
  // At the root the weight sum is (d_r - 1) + prod(...); bounding it below by
  // d_r * prod(...) keeps the factorization and can only enlarge the result.
  const double scale = depth == 0 ? 1.0 / (weights.d_r * weights.d_r) : std::pow(weights.beta, -2.0 * depth);
  out *= scale;
  return center(out);
}

Matrix KernelAtlas::cross_node_gram(const Matrix& z_new, const Label& v) const {
  check_label(v);
  if (z_new.cols() != z_.cols()) throw InvalidArgument("cross gram: dimension mismatch");
  return BlockSet(family_, z_new, z_).node(v);
}

Matrix center(const Matrix& k) {
  const Vector col_mean = k.colwise().mean().transpose();
  const Vector row_mean = k.rowwise().mean();
  const double all_mean = col_mean.mean();
  Matrix out = k;
  out.colwise() -= row_mean;
  out.rowwise() -= col_mean.transpose();
  out.array() += all_mean;
  return out;
}

}  // namespace hkl
