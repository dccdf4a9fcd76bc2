#pragma once

#include <chrono>
#include <cstddef>
#include <optional>

#include "lvgg/symlin.hpp"

namespace lvgg {

// Whether the ℓ1 penalty covers the diagonal. kPenalized is the standard
// form of both models; kExempt is a nonstandard variant, off by default.
enum class DiagonalPenalty { kPenalized, kExempt };

// min −log det(S − L) + tr(Σ(S − L)) + λ1‖S‖₁ + λ2 tr(L),  S − L ≻ 0, L ⪰ 0.
struct LvggProblem {
  SymMatrix sigma;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  DiagonalPenalty diagonal = DiagonalPenalty::kPenalized;

  // Throws ConfigError on nonpositive weights or a negative diagonal in sigma.
  void validate() const;
};

// min −log det K + tr(ΣK) + λ‖K‖₁,  K ≻ 0.
struct GlassoProblem {
  SymMatrix sigma;
  double lambda = 0.0;
  DiagonalPenalty diagonal = DiagonalPenalty::kPenalized;

  void validate() const;
};

struct SolverConfig {
  double mu = 0.01;
  double epsilon = 1e-4;
  int max_iters = 5000;
  // Relative eigenvalue cutoff used when reporting rank(L).
  double rank_tol = 1e-10;

  void validate() const;
};

// The iterate (A, S, L, U) with A = S − L enforced through the dual U.
struct SolverState {
  SymMatrix a, s, l, u;
  int iter = 0;
  double last_objective = 0.0;
  double primal_residual = 0.0;
  // Eigenvalues of A and L from their last updates; lets the objective reuse
  // the A-update's eigendecomposition for log det A.
  Eigen::VectorXd a_spectrum;
  Eigen::VectorXd l_spectrum;

  // S = I, L = 0, U = 0; A is produced by the first A-update.
  static SolverState initial(Index dim);
};

struct SolverResult {
  SymMatrix s_hat, l_hat, a_hat;
  double objective = 0.0;
  int rank_l = 0;
  std::size_t nnz_offdiag_s = 0;
  double sparse_ratio_s = 0.0;
  int iters = 0;
  bool converged = false;
  double primal_residual = 0.0;
  std::chrono::duration<double> wall_time{0.0};
};

// Number of eigenvalues strictly above rank_tol·max(1, λ_max).
int numerical_rank(const Eigen::VectorXd& eigenvalues, double rank_tol);
int numerical_rank(const SymMatrix& x, double rank_tol);

// nnz_offdiag / (p(p − 1)); 0 for p = 1.
double sparse_ratio(const SymMatrix& s);

/**
 * Φ(A, L) = −log det A + tr(AΣ) + λ1‖A + L‖₁ + λ2 tr(L).
 * Throws DomainError ("objective undefined") if A is not positive definite.
 */
double eval_objective(const LvggProblem& problem, const SymMatrix& a,
                      const SymMatrix& l);
// Same with log det A supplied by the caller.
double eval_objective(const LvggProblem& problem, const SymMatrix& a,
                      const SymMatrix& l, double log_det_a);

// −log det K + tr(ΣK) + λ‖K‖₁.
double eval_glasso_objective(const GlassoProblem& problem, const SymMatrix& k);
double eval_glasso_objective(const GlassoProblem& problem, const SymMatrix& k,
                             double log_det_k);

// ℓ1 norm under the given diagonal convention.
double penalty_l1(const SymMatrix& x, DiagonalPenalty diagonal);

}  // namespace lvgg
