#include "hkl/single_solver.hpp"

#include <cmath>
#include <limits>

#include "hkl/error.hpp"
#include "hkl/kernel_atlas.hpp"

namespace hkl {

namespace {

void check_inputs(const Matrix& k, const Vector& y, double lambda) {
  if (k.rows() != k.cols() || k.rows() != y.size()) throw InvalidArgument("Gram/target size mismatch");
  if (y.size() < 2) throw InvalidArgument("at least two samples are required");
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be positive");
  if (!k.allFinite() || !y.allFinite()) throw InvalidArgument("non-finite solver input");
}

void check_feasible(const Vector& alpha) {
  const double scale = 1.0 + alpha.cwiseAbs().sum();
  if (std::abs(alpha.sum()) > 1e-8 * scale) throw InvalidArgument("alpha violates 1^T alpha = 0");
}

double primal_at(const Matrix& kc, const Vector& y, const Vector& alpha, double lambda, const Loss& loss) {
  const Vector u = kc * alpha;
  const double b = intercept(loss, y, u);
  return empirical_risk(loss, y, u.array() + b) + 0.5 * lambda * alpha.dot(u);
}

double dual_at(const Matrix& kc, const Vector& y, const Vector& alpha, double lambda, const Loss& loss) {
  const auto n = static_cast<double>(y.size());
  double conj = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) conj += loss.conjugate(y[i], -n * lambda * alpha[i]);
  return -conj / n - 0.5 * lambda * alpha.dot(kc * alpha);
}

}  // namespace

void evaluate_solution(const Matrix& kc, const Vector& y, double lambda, const Loss& loss, DualSolution& sol) {
  const Vector u = kc * sol.alpha;
  sol.b = intercept(loss, y, u);
  const double quad = sol.alpha.dot(u);
  sol.primal_obj = empirical_risk(loss, y, u.array() + sol.b) + 0.5 * lambda * quad;
  sol.dual_obj = dual_at(kc, y, sol.alpha, lambda, loss);
  sol.gap = sol.primal_obj - sol.dual_obj;
}

DualSolution solve_least_squares(const Matrix& k, const Vector& y, double lambda) {
  check_inputs(k, y, lambda);
  const Eigen::Index n = y.size();
  const Matrix kc = center(k);
  const double ridge = static_cast<double>(n) * lambda;
  const Vector yc = y.array() - y.mean();
  const double trace_scale = std::max(kc.trace() / static_cast<double>(n), 1.0);

  Matrix sys = kc;
  sys.diagonal().array() += ridge;
  Eigen::LLT<Matrix> llt(sys);
  double jitter = 1e-12 * trace_scale;
  while (llt.info() != Eigen::Success) {
    if (jitter > 1e-8 * trace_scale) throw SolverError("least squares system is not positive definite");
    sys.diagonal().array() += jitter;
    llt.compute(sys);
    jitter *= 10;
  }
  DualSolution sol;
  sol.alpha = llt.solve(yc);
  sol.alpha.array() -= sol.alpha.mean();
  sol.iterations = 1;
  evaluate_solution(kc, y, lambda, Loss(LossKind::least_squares), sol);
  sol.residual = (kc * sol.alpha + ridge * sol.alpha - yc).cwiseAbs().maxCoeff();
  return sol;
}

DualSolution solve_smooth_dual(const Matrix& k, const Vector& y, double lambda, const Loss& loss,
                               const DualSolverOptions& options, const Vector* warm_alpha) {
  check_inputs(k, y, lambda);
  if (!loss.strictly_convex_conjugate())
    throw InvalidArgument("loss " + to_string(loss.kind()) + " needs smoothing (a ridge) for the dual solver");
  for (Eigen::Index i = 0; i < y.size(); ++i) loss.check_label(y[i]);

  const Eigen::Index n = y.size();
  const double nd = static_cast<double>(n);
  const Matrix kc = center(k);

  // Newton on the primal representer parameterization u = K~ c + b. Its
  // stationarity conditions are phi'(u) + n lambda c = 0 and sum phi'(u) = 0,
  // so at the optimum alpha = c automatically satisfies 1^T alpha = 0.
  Vector c = Vector::Zero(n);
  if (warm_alpha != nullptr && warm_alpha->size() == n) c = warm_alpha->array() - warm_alpha->mean();
  Vector kcc = kc * c;
  double b = intercept(loss, y, kcc);

  auto objective = [&](const Vector& kcv, const Vector& cv, double bv) {
    return empirical_risk(loss, y, kcv.array() + bv) + 0.5 * lambda * cv.dot(kcv);
  };

  DualSolution sol;
  sol.converged = false;
  Vector g1(n), dphi(n), curv(n), dc(n);
  Matrix jac(n + 1, n + 1);
  Vector rhs(n + 1);
  double f = objective(kcc, c, b);
  for (int it = 0; it < options.max_iter; ++it) {
    if (it > 0) kcc.noalias() = kc * c;  // no drift from the incremental update
    for (Eigen::Index i = 0; i < n; ++i) {
      const double u = kcc[i] + b;
      dphi[i] = loss.derivative(y[i], u);
      curv[i] = loss.curvature(y[i], u);
    }
    g1 = dphi / nd + lambda * c;
    const double g2 = dphi.sum() / nd;
    sol.residual = nd * std::max(g1.cwiseAbs().maxCoeff(), std::abs(g2));
    sol.iterations = it;
    if (sol.residual <= options.tol) {
      sol.converged = true;
      break;
    }
    jac.topLeftCorner(n, n) = (curv / nd).asDiagonal() * kc;
    jac.topLeftCorner(n, n).diagonal().array() += lambda;
    jac.topRightCorner(n, 1) = curv / nd;
    jac.bottomLeftCorner(1, n) = (curv.transpose() * kc) / nd;
    jac(n, n) = curv.sum() / nd;
    rhs.head(n) = -g1;
    rhs[n] = -g2;
    Vector step = jac.partialPivLu().solve(rhs);
    dc = step.head(n);
    double db = step[n];
    Vector kdc = kc * dc;
    double slope = g1.dot(kdc) + g2 * db;
    if (!std::isfinite(slope) || slope >= 0.0) {
      dc = -g1;
      db = -g2;
      kdc = kc * dc;
      slope = g1.dot(kdc) + g2 * db;
    }
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Vector kc_new = kcc + t * kdc;
      const Vector c_new = c + t * dc;
      const double f_new = objective(kc_new, c_new, b + t * db);
      if (f_new <= f + 1e-4 * t * slope || (ls > 40 && f_new <= f)) {
        c = c_new;
        kcc = kc_new;
        b += t * db;
        f = f_new;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
  }
  sol.alpha = c.array() - c.mean();
  evaluate_solution(kc, y, lambda, loss, sol);
  return sol;
}

DualSolution solve_dual(const Matrix& k, const Vector& y, double lambda, const Loss& loss,
                        const DualSolverOptions& options, const Vector* warm_alpha) {
  if (loss.kind() == LossKind::least_squares) return solve_least_squares(k, y, lambda);
  return solve_smooth_dual(k, y, lambda, loss, options, warm_alpha);
}

double primal_objective(const Matrix& k, const Vector& y, const Vector& alpha, double lambda, const Loss& loss) {
  check_inputs(k, y, lambda);
  return primal_at(center(k), y, alpha, lambda, loss);
}

double dual_objective(const Matrix& k, const Vector& y, const Vector& alpha, double lambda, const Loss& loss) {
  check_inputs(k, y, lambda);
  return dual_at(center(k), y, alpha, lambda, loss);
}

double gap_kernel(const Matrix& k, const Vector& y, const Vector& alpha, double lambda, const Loss& loss) {
  check_inputs(k, y, lambda);
  check_feasible(alpha);
  const Matrix kc = center(k);
  return primal_at(kc, y, alpha, lambda, loss) - dual_at(kc, y, alpha, lambda, loss);
}

}  // namespace hkl
