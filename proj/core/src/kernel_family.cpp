#include "hkl/kernel_family.hpp"

#include <cmath>
#include <vector>

#include "hkl/error.hpp"

namespace hkl {

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::polynomial: return "poly";
    case KernelKind::gauss_hermite: return "gauss-hermite";
    case KernelKind::all_subset_gaussian: return "all-subset-gauss";
    case KernelKind::spline: return "spline";
    case KernelKind::hermite: return "hermite";
  }
  return "hermite";
}

KernelKind parse_kernel_kind(const std::string& name) {
  if (name == "poly" || name == "polynomial") return KernelKind::polynomial;
  if (name == "gauss-hermite" || name == "gauss_hermite") return KernelKind::gauss_hermite;
  if (name == "all-subset-gauss" || name == "all_subset_gaussian")
    return KernelKind::all_subset_gaussian;
  if (name == "spline") return KernelKind::spline;
  if (name == "hermite") return KernelKind::hermite;
  throw InvalidArgument("unknown kernel family: " + name);
}

namespace {

// Hermite polynomials normalized by sqrt(2^j j!), via the stable recurrence
// h_{j+1} = sqrt(2/(j+1)) x h_j - sqrt(j/(j+1)) h_{j-1}.
void normalized_hermite(double x, int count, double* h) {
  if (count <= 0) return;
  h[0] = 1.0;
  if (count == 1) return;
  h[1] = std::sqrt(2.0) * x;
  for (int j = 1; j + 1 < count; ++j)
    h[j + 1] = std::sqrt(2.0 / (j + 1)) * x * h[j] - std::sqrt(static_cast<double>(j) / (j + 1)) * h[j - 1];
}

}  // namespace

KernelFamily::KernelFamily(KernelKind kind, KernelParams params, int p) : kind_(kind), params_(params) {
  if (p < 1) throw InvalidArgument("kernel family requires p >= 1");
  auto fill = [](double& v, double def) {
    if (std::isnan(v)) v = def;
  };
  switch (kind) {
    case KernelKind::polynomial:
      if (params_.q < 1) throw InvalidArgument("polynomial kernel requires q >= 1");
      break;
    case KernelKind::gauss_hermite:
      if (params_.q < 1) throw InvalidArgument("gauss-hermite kernel requires q >= 1");
      fill(params_.a, 0.25);
      fill(params_.b, 1.0);
      if (!(params_.a > 0) || !(params_.b > 0))
        throw InvalidArgument("gauss-hermite kernel requires a > 0 and b > 0");
      break;
    case KernelKind::all_subset_gaussian:
      params_.q = 1;
      fill(params_.alpha, 1.0);
      fill(params_.b, 1.0 / (2.0 * p));
      if (!(params_.alpha > 0) || !(params_.b > 0))
        throw InvalidArgument("all-subset Gaussian kernel requires alpha > 0 and b > 0");
      break;
    case KernelKind::spline:
      params_.q = 2;
      break;
    case KernelKind::hermite:
      if (params_.q < 1) throw InvalidArgument("hermite kernel requires q >= 1");
      fill(params_.alpha, 0.1);
      if (!(params_.alpha > 0 && params_.alpha < 1))
        throw InvalidArgument("hermite kernel requires 0 < alpha < 1");
      break;
  }
  if (kind == KernelKind::polynomial) {
    binom_sqrt_.resize(static_cast<std::size_t>(params_.q) + 1);
    double c = 1.0;
    for (int j = 0; j <= params_.q; ++j) {
      binom_sqrt_[static_cast<std::size_t>(j)] = std::sqrt(c);
      c = c * (params_.q - j) / (j + 1);
    }
  }
  if (kind == KernelKind::gauss_hermite) {
    const double a = params_.a, b = params_.b;
    const double c = std::sqrt(a * a + 2 * a * b);
    const double big_a = a + b + c;
    gh_ratio_ = b / big_a;
    gh_gamma_ = gh_ratio_ * (a + c);
    gh_scale_ = std::sqrt(1.0 - gh_ratio_ * gh_ratio_);
    gh_arg_ = std::sqrt(2.0 * c);
  }
}

void KernelFamily::features(double x, double* phi) const {
  const int q = params_.q;
  switch (kind_) {
    case KernelKind::polynomial: {
      double pw = 1.0;
      for (int j = 0; j < q; ++j, pw *= x) phi[j] = binom_sqrt_[static_cast<std::size_t>(j)] * pw;
      return;
    }
    case KernelKind::gauss_hermite: {
      normalized_hermite(gh_arg_ * x, q, phi);
      const double env = std::sqrt(gh_scale_) * std::exp(-gh_gamma_ * x * x);
      double r = 1.0;
      for (int j = 0; j < q; ++j, r *= std::sqrt(gh_ratio_)) phi[j] *= env * r;
      return;
    }
    case KernelKind::all_subset_gaussian: phi[0] = 1.0; return;
    case KernelKind::spline:
      phi[0] = 1.0;
      phi[1] = x;
      return;
    case KernelKind::hermite: {
      normalized_hermite(x, q, phi);
      double r = 1.0;
      for (int j = 0; j < q; ++j, r *= std::sqrt(params_.alpha)) phi[j] *= r;
      return;
    }
  }
}

double KernelFamily::feature(int j, double x) const {
  if (j < 0 || j > params_.q || !rank_one_block(j)) throw InvalidArgument("block has no one-dimensional feature");
  if (j == params_.q) return binom_sqrt_[static_cast<std::size_t>(j)] * std::pow(x, j);
  std::vector<double> phi(static_cast<std::size_t>(params_.q));
  features(x, phi.data());
  return phi[static_cast<std::size_t>(j)];
}

double KernelFamily::last_block(double x, double xp, const double* phi_x, const double* phi_xp) const {
  const int q = params_.q;
  switch (kind_) {
    case KernelKind::polynomial:
      return binom_sqrt_[static_cast<std::size_t>(q)] * binom_sqrt_[static_cast<std::size_t>(q)] *
             std::pow(x * xp, q);
    case KernelKind::all_subset_gaussian:
      return params_.alpha * std::exp(-params_.b * (x - xp) * (x - xp));
    case KernelKind::spline: {
      if (x * xp < 0) return 0.0;
      const double lo = std::min(std::abs(x), std::abs(xp));
      const double hi = std::max(std::abs(x), std::abs(xp));
      return lo * lo * (3 * hi - lo) / 6.0;
    }
    case KernelKind::gauss_hermite:
    case KernelKind::hermite: {
      double partial = 0.0;
      for (int j = 0; j < q; ++j) partial += phi_x[j] * phi_xp[j];
      return closed_form(x, xp) - partial;
    }
  }
  return 0.0;
}

std::vector<double> KernelFamily::blocks(double x, double xp) const {
  const auto q = static_cast<std::size_t>(params_.q);
  std::vector<double> fx(q), fxp(q), out(q + 1);
  features(x, fx.data());
  features(xp, fxp.data());
  for (std::size_t j = 0; j < q; ++j) out[j] = fx[j] * fxp[j];
  out[q] = last_block(x, xp, fx.data(), fxp.data());
  return out;
}

double KernelFamily::closed_form(double x, double xp) const {
  switch (kind_) {
    case KernelKind::polynomial: return std::pow(1.0 + x * xp, params_.q);
    case KernelKind::gauss_hermite: return std::exp(-params_.b * (x - xp) * (x - xp));
    case KernelKind::all_subset_gaussian:
      return 1.0 + params_.alpha * std::exp(-params_.b * (x - xp) * (x - xp));
    case KernelKind::spline: {
      const auto q = static_cast<std::size_t>(params_.q);
      std::vector<double> fx(q), fxp(q);
      features(x, fx.data());
      features(xp, fxp.data());
      return 1.0 + x * xp + last_block(x, xp, fx.data(), fxp.data());
    }
    case KernelKind::hermite: {
      // Mehler's formula for sum_j alpha^j / (2^j j!) H_j(x) H_j(x').
      const double a = params_.alpha;
      const double d = x - xp;
      return std::exp(-a * d * d / (1 - a * a) + (x * x + xp * xp) * a / (1 + a)) / std::sqrt(1 - a * a);
    }
  }
  return 0.0;
}

Standardizer Standardizer::fit(const Matrix& x) {
  if (x.rows() < 1) throw InvalidArgument("cannot standardize an empty matrix");
  Standardizer s;
  s.mean = x.colwise().mean().transpose();
  s.scale.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - s.mean[j]).square().mean();
    s.scale[j] = var > 0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

Standardizer Standardizer::identity(int p) {
  Standardizer s;
  s.mean = Vector::Zero(p);
  s.scale = Vector::Ones(p);
  return s;
}

Matrix Standardizer::apply(const Matrix& x) const {
  if (x.cols() != mean.size()) throw InvalidArgument("standardizer dimension mismatch");
  if (!x.allFinite()) throw InvalidArgument("non-finite input data");
  return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

}  // namespace hkl
