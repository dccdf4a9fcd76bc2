#include "lvgg/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lvgg/error.hpp"

namespace lvgg {

namespace {

void check_sigma(const SymMatrix& sigma) {
  if (sigma.dim() < 1) throw ConfigError("problem: sigma is empty");
  if ((sigma.dense().diagonal().array() < 0.0).any()) {
    throw ConfigError("problem: sigma has a negative diagonal entry");
  }
}

void check_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError(std::string(name) + " must be positive and finite");
  }
}

double checked_log_det(const SymMatrix& a) {
  try {
    return log_det_spd(a);
  } catch (const DomainError&) {
    throw DomainError("objective undefined: A is not positive definite");
  }
}

}  // namespace

void LvggProblem::validate() const {
  check_sigma(sigma);
  check_positive(lambda1, "lambda1");
  check_positive(lambda2, "lambda2");
}

void GlassoProblem::validate() const {
  check_sigma(sigma);
  // λ = 0 is the unpenalized MLE and is allowed here.
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("lambda must be nonnegative and finite");
  }
}

void SolverConfig::validate() const {
  check_positive(mu, "mu");
  check_positive(epsilon, "epsilon");
  if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
  if (!(rank_tol >= 0.0)) throw ConfigError("rank_tol must be nonnegative");
}

SolverState SolverState::initial(Index dim) {
  SolverState st;
  st.a = SymMatrix::identity(dim);
  st.s = SymMatrix::identity(dim);
  st.l = SymMatrix::zero(dim);
  st.u = SymMatrix::zero(dim);
  st.a_spectrum = Eigen::VectorXd::Ones(dim);
  st.l_spectrum = Eigen::VectorXd::Zero(dim);
  return st;
}

int numerical_rank(const Eigen::VectorXd& eigenvalues, double rank_tol) {
  if (eigenvalues.size() == 0) return 0;
  const double cutoff = rank_tol * std::max(1.0, eigenvalues.maxCoeff());
  return static_cast<int>((eigenvalues.array() > cutoff).count());
}

int numerical_rank(const SymMatrix& x, double rank_tol) {
  return numerical_rank(eig_sym(x).eigenvalues, rank_tol);
}

double sparse_ratio(const SymMatrix& s) {
  const auto p = static_cast<double>(s.dim());
  if (s.dim() < 2) return 0.0;
  return static_cast<double>(s.nnz_offdiag()) / (p * (p - 1.0));
}

double penalty_l1(const SymMatrix& x, DiagonalPenalty diagonal) {
  return diagonal == DiagonalPenalty::kPenalized ? x.l1_norm() : x.l1_norm_offdiag();
}

double eval_objective(const LvggProblem& problem, const SymMatrix& a,
                      const SymMatrix& l) {
  return eval_objective(problem, a, l, checked_log_det(a));
}

double eval_objective(const LvggProblem& problem, const SymMatrix& a,
                      const SymMatrix& l, double log_det_a) {
  return -log_det_a + trace_product(a, problem.sigma) +
         problem.lambda1 * penalty_l1(a + l, problem.diagonal) +
         problem.lambda2 * l.trace();
}

double eval_glasso_objective(const GlassoProblem& problem, const SymMatrix& k) {
  return eval_glasso_objective(problem, k, checked_log_det(k));
}

double eval_glasso_objective(const GlassoProblem& problem, const SymMatrix& k,
                             double log_det_k) {
  return -log_det_k + trace_product(k, problem.sigma) +
         problem.lambda * penalty_l1(k, problem.diagonal);
}

}  // namespace lvgg
