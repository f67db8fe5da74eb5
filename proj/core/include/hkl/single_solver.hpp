#pragma once

#include "hkl/loss.hpp"
#include "hkl/types.hpp"

namespace hkl {

/// Optimal (or final) point of the single-kernel dual
///   max_{1^T alpha = 0}  -(1/n) sum psi_i(-n lambda alpha_i) - (lambda/2) alpha^T K~ alpha.
struct DualSolution {
  Vector alpha;
  double b = 0.0;  // offset of the centered scores K~ alpha
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double gap = 0.0;
  int iterations = 0;
  double residual = 0.0;
  bool converged = true;
};

struct DualSolverOptions {
  int max_iter = 200;
  double tol = 1e-10;
};

/// All functions below center K internally, so K and K~ give the same answer.
DualSolution solve_least_squares(const Matrix& k, const Vector& y, double lambda);
/// Generalized Newton method for losses with strictly convex conjugates.
DualSolution solve_smooth_dual(const Matrix& k, const Vector& y, double lambda, const Loss& loss,
                               const DualSolverOptions& options = {}, const Vector* warm_alpha = nullptr);
/// Least squares goes to the closed form, everything else to the Newton path.
DualSolution solve_dual(const Matrix& k, const Vector& y, double lambda, const Loss& loss,
                        const DualSolverOptions& options = {}, const Vector* warm_alpha = nullptr);

double primal_objective(const Matrix& k, const Vector& y, const Vector& alpha, double lambda, const Loss& loss);
double dual_objective(const Matrix& k, const Vector& y, const Vector& alpha, double lambda, const Loss& loss);
/// Duality gap of alpha; throws if 1^T alpha differs noticeably from zero.
double gap_kernel(const Matrix& k, const Vector& y, const Vector& alpha, double lambda, const Loss& loss);

/// Fills the objectives and the gap of an already computed alpha.
void evaluate_solution(const Matrix& k_centered, const Vector& y, double lambda, const Loss& loss,
                       DualSolution& sol);

}  // namespace hkl
