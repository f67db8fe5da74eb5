#include "hkl/harness/synthetic.hpp"

#include <cmath>

#include "hkl/error.hpp"

namespace hkl::harness {

void SyntheticSpec::validate() const {
  if (p < 1) throw InvalidArgument("synthetic: p must be >= 1");
  if (r < 1 || r > p) throw InvalidArgument("synthetic: need 1 <= r <= p");
  if (n < 2) throw InvalidArgument("synthetic: n must be >= 2");
  if (n_test < 0) throw InvalidArgument("synthetic: n_test must be >= 0");
  if (!(snr > 0.0)) throw InvalidArgument("synthetic: snr must be positive");
}

Matrix sample_wishart(int p, int dof, std::mt19937_64& rng) {
  if (p < 1 || dof < p) throw InvalidArgument("Wishart requires dof >= p >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix l = Matrix::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    std::chi_squared_distribution<double> chi2(static_cast<double>(dof - i));
    l(i, i) = std::sqrt(chi2(rng));
    for (int j = 0; j < i; ++j) l(i, j) = normal(rng);
  }
  return l * l.transpose();
}

Vector interaction_signal(const Matrix& x, int r) {
  Vector f = Vector::Zero(x.rows());
  for (int i = 0; i < r; ++i)
    for (int j = i + 1; j < r; ++j) f.array() += x.col(i).array() * x.col(j).array();
  return f;
}

SyntheticData gen_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  SyntheticData out;
  Eigen::LLT<Matrix> chol;
  bool ok = false;
  for (int attempt = 0; attempt < 5 && !ok; ++attempt) {
    std::mt19937_64 rng(spec.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(attempt));
    Matrix w = sample_wishart(spec.p, 2 * spec.p, rng);
    const Vector inv_sd = w.diagonal().array().rsqrt();
    out.sigma = inv_sd.asDiagonal() * w * inv_sd.asDiagonal();
    chol.compute(out.sigma);
    ok = chol.info() == Eigen::Success && out.sigma.allFinite();
    if (!ok) continue;
    const int total = spec.n + spec.n_test;
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix z(total, spec.p);
    for (int i = 0; i < total; ++i)
      for (int j = 0; j < spec.p; ++j) z(i, j) = normal(rng);
    const Matrix x = z * chol.matrixL().transpose();
    const Vector f = interaction_signal(x, spec.r);
    const double var_f = (f.array() - f.mean()).square().mean();
    out.noise_std = std::sqrt(var_f / spec.snr);
    Vector y = f;
    for (int i = 0; i < total; ++i) y[i] += out.noise_std * normal(rng);
    out.x = x.topRows(spec.n);
    out.f = f.head(spec.n);
    out.y = y.head(spec.n);
    out.x_test = x.bottomRows(spec.n_test);
    out.f_test = f.tail(spec.n_test);
    out.y_test = y.tail(spec.n_test);
  }
  if (!ok) throw Error("degenerate Wishart draw after 5 attempts");
  return out;
}

}  // namespace hkl::harness
