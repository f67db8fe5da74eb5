#include "hkl/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hkl/error.hpp"

namespace hkl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDomainSlack = 1e-12;

double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }
double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}
double xlogx(double x) { return x <= 0.0 ? 0.0 : x * std::log(x); }
double sign(double x) { return (x > 0) - (x < 0); }

// Moreau envelope of s -> max(0, s) with parameter mu, and its derivatives.
double hinge_env(double s, double mu) {
  if (s <= 0) return 0.0;
  if (s <= mu) return s * s / (2 * mu);
  return s - mu / 2;
}
double hinge_env_d(double s, double mu) {
  if (s <= 0) return 0.0;
  if (s <= mu) return s / mu;
  return 1.0;
}

}  // namespace

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::least_squares: return "ls";
    case LossKind::logistic: return "logistic";
    case LossKind::svr_1norm: return "svr1";
    case LossKind::svr_2norm: return "svr2";
    case LossKind::huber: return "huber";
    case LossKind::svm_1norm: return "svm1";
    case LossKind::svm_2norm: return "svm2";
  }
  return "ls";
}

LossKind parse_loss_kind(const std::string& name) {
  if (name == "ls" || name == "least_squares") return LossKind::least_squares;
  if (name == "logistic") return LossKind::logistic;
  if (name == "svr1" || name == "svr_1norm") return LossKind::svr_1norm;
  if (name == "svr2" || name == "svr_2norm") return LossKind::svr_2norm;
  if (name == "huber") return LossKind::huber;
  if (name == "svm1" || name == "svm_1norm") return LossKind::svm_1norm;
  if (name == "svm2" || name == "svm_2norm") return LossKind::svm_2norm;
  throw InvalidArgument("unknown loss: " + name);
}

Loss::Loss(LossKind kind, double epsilon, double smoothing)
    : kind_(kind), epsilon_(epsilon), smoothing_(smoothing) {
  if (has_epsilon() && !(epsilon >= 0.0)) throw InvalidArgument("loss epsilon must be >= 0");
  if (kind == LossKind::huber && !(epsilon > 0.0))
    throw InvalidArgument("huber loss requires epsilon > 0");
  if (!(smoothing >= 0.0)) throw InvalidArgument("loss smoothing must be >= 0");
}

bool Loss::is_classification() const {
  return kind_ == LossKind::logistic || kind_ == LossKind::svm_1norm ||
         kind_ == LossKind::svm_2norm;
}

bool Loss::has_epsilon() const {
  return kind_ == LossKind::svr_1norm || kind_ == LossKind::svr_2norm || kind_ == LossKind::huber;
}

bool Loss::strictly_convex_conjugate() const {
  switch (kind_) {
    case LossKind::svr_1norm:
    case LossKind::svm_1norm: return smoothing_ > 0.0;
    default: return true;
  }
}

Loss Loss::smoothed(double mu) const {
  if (kind_ == LossKind::svr_1norm || kind_ == LossKind::svm_1norm) return Loss(kind_, epsilon_, mu);
  return *this;
}

void Loss::check_label(double y) const {
  if (!std::isfinite(y)) throw InvalidArgument("non-finite label");
  if (is_classification() && y != 1.0 && y != -1.0)
    throw InvalidArgument("classification losses require labels in {-1, +1}");
}

double Loss::value(double y, double u) const {
  check_label(y);
  const double r = u - y;
  switch (kind_) {
    case LossKind::least_squares: return 0.5 * r * r;
    case LossKind::logistic: return softplus(-y * u);
    case LossKind::svr_1norm: {
      const double s = std::abs(r) - epsilon_;
      return smoothing_ > 0 ? hinge_env(s, smoothing_) : std::max(0.0, s);
    }
    case LossKind::svr_2norm: {
      const double s = std::max(0.0, std::abs(r) - epsilon_);
      return 0.5 * s * s;
    }
    case LossKind::huber: {
      const double a = std::abs(r);
      return a <= epsilon_ ? 0.5 * r * r : epsilon_ * a - 0.5 * epsilon_ * epsilon_;
    }
    case LossKind::svm_1norm: {
      const double m = 1.0 - y * u;
      return smoothing_ > 0 ? hinge_env(m, smoothing_) : std::max(0.0, m);
    }
    case LossKind::svm_2norm: {
      const double m = std::max(0.0, 1.0 - y * u);
      return 0.5 * m * m;
    }
  }
  return 0.0;
}

double Loss::derivative(double y, double u) const {
  const double r = u - y;
  switch (kind_) {
    case LossKind::least_squares: return r;
    case LossKind::logistic: return -y * sigmoid(-y * u);
    case LossKind::svr_1norm:
      if (smoothing_ > 0) return sign(r) * hinge_env_d(std::abs(r) - epsilon_, smoothing_);
      if (r >= epsilon_) return 1.0;
      if (r >= -epsilon_) return 0.0;
      return -1.0;
    case LossKind::svr_2norm: return sign(r) * std::max(0.0, std::abs(r) - epsilon_);
    case LossKind::huber: return std::clamp(r, -epsilon_, epsilon_);
    case LossKind::svm_1norm:
      if (smoothing_ > 0) return -y * hinge_env_d(1.0 - y * u, smoothing_);
      if (y > 0) return u < 1.0 ? -1.0 : 0.0;
      return u < -1.0 ? 0.0 : 1.0;
    case LossKind::svm_2norm: return -y * std::max(0.0, 1.0 - y * u);
  }
  return 0.0;
}

double Loss::left_derivative(double y, double u) const {
  if (smoothing_ > 0 || (kind_ != LossKind::svr_1norm && kind_ != LossKind::svm_1norm))
    return derivative(y, u);
  if (kind_ == LossKind::svr_1norm) {
    const double r = u - y;
    if (r > epsilon_) return 1.0;
    if (r > -epsilon_) return 0.0;
    return -1.0;
  }
  if (y > 0) return u <= 1.0 ? -1.0 : 0.0;
  return u <= -1.0 ? 0.0 : 1.0;
}

double Loss::curvature(double y, double u) const {
  const double r = u - y;
  switch (kind_) {
    case LossKind::least_squares: return 1.0;
    case LossKind::logistic: {
      const double s = sigmoid(y * u);
      return s * (1.0 - s);
    }
    case LossKind::svr_1norm: {
      if (smoothing_ <= 0) return 0.0;
      const double s = std::abs(r) - epsilon_;
      return (s > 0 && s < smoothing_) ? 1.0 / smoothing_ : 0.0;
    }
    case LossKind::svr_2norm: return std::abs(r) > epsilon_ ? 1.0 : 0.0;
    case LossKind::huber: return std::abs(r) <= epsilon_ ? 1.0 : 0.0;
    case LossKind::svm_1norm: {
      if (smoothing_ <= 0) return 0.0;
      const double m = 1.0 - y * u;
      return (m > 0 && m < smoothing_) ? 1.0 / smoothing_ : 0.0;
    }
    case LossKind::svm_2norm: return 1.0 - y * u > 0 ? 1.0 : 0.0;
  }
  return 0.0;
}

double Loss::conjugate(double y, double beta) const {
  const double ridge = 0.5 * smoothing_ * beta * beta;
  switch (kind_) {
    case LossKind::least_squares: return 0.5 * beta * beta + beta * y;
    case LossKind::logistic: {
      double t = beta * y;
      if (t < -1.0 - kDomainSlack || t > kDomainSlack) return kInf;
      t = std::clamp(t, -1.0, 0.0);
      return xlogx(1.0 + t) + xlogx(-t);
    }
    case LossKind::svr_1norm:
      if (std::abs(beta) > 1.0 + kDomainSlack) return kInf;
      return beta * y + std::abs(beta) * epsilon_ + ridge;
    case LossKind::svr_2norm: return 0.5 * beta * beta + beta * y + std::abs(beta) * epsilon_;
    case LossKind::huber:
      if (std::abs(beta) > epsilon_ * (1.0 + kDomainSlack)) return kInf;
      return 0.5 * beta * beta + beta * y;
    case LossKind::svm_1norm: {
      const double t = beta * y;
      if (t < -1.0 - kDomainSlack || t > kDomainSlack) return kInf;
      return y * beta + ridge;
    }
    case LossKind::svm_2norm:
      if (beta * y > kDomainSlack) return kInf;
      return 0.5 * beta * beta + beta * y;
  }
  return kInf;
}

void Loss::kinks(double y, std::vector<double>& out) const {
  switch (kind_) {
    case LossKind::least_squares:
    case LossKind::logistic: return;
    case LossKind::svr_1norm:
    case LossKind::svr_2norm:
    case LossKind::huber:
      out.push_back(y - epsilon_);
      out.push_back(y + epsilon_);
      if (kind_ == LossKind::svr_1norm && smoothing_ > 0) {
        out.push_back(y - epsilon_ - smoothing_);
        out.push_back(y + epsilon_ + smoothing_);
      }
      return;
    case LossKind::svm_1norm:
    case LossKind::svm_2norm:
      out.push_back(y);
      if (kind_ == LossKind::svm_1norm && smoothing_ > 0) out.push_back(y * (1.0 - smoothing_));
      return;
  }
}

double empirical_risk(const Loss& loss, const Vector& y, const Vector& u) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) s += loss.value(y[i], u[i]);
  return s / static_cast<double>(y.size());
}

namespace {

double logistic_intercept(const Loss& loss, const Vector& y, const Vector& u) {
  const auto n = y.size();
  auto slope = [&](double b) {
    double g = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) g += loss.derivative(y[i], u[i] + b);
    return g;
  };
  double lo = -1.0, hi = 1.0;
  const double limit = 1e3 + u.cwiseAbs().maxCoeff();
  while (slope(lo) > 0 && lo > -limit) lo *= 2;
  while (slope(hi) < 0 && hi < limit) hi *= 2;
  if (slope(lo) > 0) return lo;
  if (slope(hi) < 0) return hi;
  double b = 0.0;
  if (b < lo || b > hi) b = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    double g = 0.0, h = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      g += loss.derivative(y[i], u[i] + b);
      h += loss.curvature(y[i], u[i] + b);
    }
    if (std::abs(g) <= 1e-13 * static_cast<double>(n)) return b;
    if (g > 0) hi = b; else lo = b;
    double next = h > 0 ? b - g / h : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 1e-15 * (1.0 + std::abs(b))) return next;
    b = next;
  }
  return b;
}

// Exact minimizer for piecewise quadratic losses: the derivative of the 1-D
// objective is nondecreasing and affine between consecutive breakpoints.
double breakpoint_intercept(const Loss& loss, const Vector& y, const Vector& u) {
  const auto n = y.size();
  std::vector<double> bps;
  std::vector<double> tmp;
  bps.reserve(static_cast<std::size_t>(4 * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    tmp.clear();
    loss.kinks(y[i], tmp);
    for (double k : tmp) bps.push_back(k - u[i]);
  }
  std::sort(bps.begin(), bps.end());
  bps.erase(std::unique(bps.begin(), bps.end()), bps.end());

  auto right = [&](double b) {
    double g = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) g += loss.derivative(y[i], u[i] + b);
    return g;
  };
  auto left = [&](double b) {
    double g = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) g += loss.left_derivative(y[i], u[i] + b);
    return g;
  };

  const std::size_t k_count = bps.size();
  std::size_t lo = 0, hi = k_count;  // first index with right(bps[k]) >= 0
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (right(bps[mid]) >= 0) hi = mid; else lo = mid + 1;
  }
  const std::size_t k = lo;
  if (k == k_count) {
    const double last = bps.back();
    const double g0 = right(last);
    const double g1 = right(last + 1.0);
    const double s = g1 - g0;
    return s > 0 ? last - g0 / s : last;
  }
  const double gl = left(bps[k]);
  if (gl <= 0) return bps[k];
  if (k == 0) {
    const double g_in = right(bps[0] - 1.0);
    const double s = gl - g_in;
    return s > 0 ? bps[0] - gl / s : bps[0];
  }
  const double a = bps[k - 1];
  const double ga = right(a);
  return a + (0.0 - ga) * (bps[k] - a) / (gl - ga);
}

}  // namespace

double intercept(const Loss& loss, const Vector& y, const Vector& u) {
  if (y.size() == 0 || y.size() != u.size())
    throw InvalidArgument("intercept requires matching non-empty y and u");
  if (!y.allFinite() || !u.allFinite()) throw InvalidArgument("intercept: non-finite input");
  for (Eigen::Index i = 0; i < y.size(); ++i) loss.check_label(y[i]);
  switch (loss.kind()) {
    case LossKind::least_squares: return (y - u).mean();
    case LossKind::logistic: return logistic_intercept(loss, y, u);
    default: return breakpoint_intercept(loss, y, u);
  }
}

}  // namespace hkl
