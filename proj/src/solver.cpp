#include "lvgg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lvgg {

namespace {

using Clock = std::chrono::steady_clock;

SymMatrix threshold(const SymMatrix& x, double tau, DiagonalPenalty diagonal) {
  return diagonal == DiagonalPenalty::kPenalized ? soft_threshold(x, tau)
                                                 : soft_threshold_offdiag(x, tau);
}

void check_state_dims(const SolverState& st, Index p) {
  if (st.a.dim() != p || st.s.dim() != p || st.l.dim() != p || st.u.dim() != p) {
    throw ConfigError("solver state dimensions do not match sigma (p=" +
                      std::to_string(p) + ")");
  }
}

double log_det_from_spectrum(const Eigen::VectorXd& spectrum) {
  return spectrum.array().log().sum();
}

double relative_change(double prev, double curr) {
  return std::abs(curr - prev) / std::max(1.0, std::abs(curr));
}

// Shared driver for both splittings. `step` advances the state and
// `objective` evaluates the stopping-rule objective at the new state.
template <typename Step, typename Objective>
SolveOutput run_iterations(SolverState state, const SolverConfig& config,
                           const Step& step, const Objective& objective,
                           const IterationObserver& observer) {
  const auto start = Clock::now();
  SolveOutput out;
  out.records.reserve(static_cast<std::size_t>(std::min(config.max_iters, 1 << 16)));

  bool converged = false;
  for (int k = 0; k < config.max_iters; ++k) {
    state = step(state);

    IterationRecord rec;
    rec.iter = state.iter;
    rec.objective = objective(state);
    if (!std::isfinite(rec.objective)) {
      throw DivergenceError("divergence: non-finite objective at iteration " +
                                std::to_string(state.iter),
                            state);
    }
    rec.primal_residual = state.primal_residual;
    rec.rel_obj_change = out.records.empty()
                             ? std::numeric_limits<double>::infinity()
                             : relative_change(out.records.back().objective, rec.objective);
    rec.wall_time_cumulative = Clock::now() - start;
    state.last_objective = rec.objective;

    if (observer) observer(rec);
    const bool stop = !out.records.empty() &&
                      check_stop(out.records.back(), rec, state, config.epsilon);
    out.records.push_back(rec);
    if (stop) {
      converged = true;
      break;
    }
  }

  SolverResult& res = out.result;
  res.s_hat = state.s;
  res.l_hat = state.l;
  res.a_hat = state.a;
  res.objective = state.last_objective;
  res.rank_l = numerical_rank(state.l_spectrum, config.rank_tol);
  res.nnz_offdiag_s = state.s.nnz_offdiag();
  res.sparse_ratio_s = sparse_ratio(state.s);
  res.iters = state.iter;
  res.converged = converged;
  res.primal_residual = state.primal_residual;
  res.wall_time = Clock::now() - start;
  return out;
}

}  // namespace

SolverState sblvgg_step(const SolverState& state, const LvggProblem& problem,
                        const SolverConfig& config) {
  check_state_dims(state, problem.sigma.dim());
  const double mu = config.mu;
  try {
    SolverState next;
    const SymMatrix k = mu * (state.s - state.l) - problem.sigma - state.u;
    SpectralMap a_update = spd_functional_sqrt_update_spectral(k, mu);
    next.a = std::move(a_update.matrix);
    next.a_spectrum = std::move(a_update.eigenvalues);

    const SymMatrix u_scaled = state.u / mu;
    next.s = threshold(next.a + state.l + u_scaled, problem.lambda1 / mu,
                       problem.diagonal);

    SpectralMap l_update =
        psd_trace_shrink_spectral(next.s - next.a - u_scaled, problem.lambda2 / mu);
    next.l = std::move(l_update.matrix);
    next.l_spectrum = std::move(l_update.eigenvalues);

    const SymMatrix gap = next.a - next.s + next.l;
    next.u = state.u + mu * gap;
    next.primal_residual = gap.frobenius_norm();
    next.iter = state.iter + 1;
    next.last_objective = state.last_objective;
    return next;
  } catch (const NonFiniteError& e) {
    throw DivergenceError("divergence at iteration " + std::to_string(state.iter + 1) +
                              ": " + e.what(),
                          state);
  }
}

SolverState glasso_step(const SolverState& state, const GlassoProblem& problem,
                        const SolverConfig& config) {
  check_state_dims(state, problem.sigma.dim());
  const double mu = config.mu;
  try {
    SolverState next;
    const SymMatrix k = mu * state.s - problem.sigma - state.u;
    SpectralMap a_update = spd_functional_sqrt_update_spectral(k, mu);
    next.a = std::move(a_update.matrix);
    next.a_spectrum = std::move(a_update.eigenvalues);

    next.s = threshold(next.a + state.u / mu, problem.lambda / mu, problem.diagonal);
    next.l = SymMatrix::zero(state.l.dim());
    next.l_spectrum = Eigen::VectorXd::Zero(state.l.dim());

    const SymMatrix gap = next.a - next.s;
    next.u = state.u + mu * gap;
    next.primal_residual = gap.frobenius_norm();
    next.iter = state.iter + 1;
    next.last_objective = state.last_objective;
    return next;
  } catch (const NonFiniteError& e) {
    throw DivergenceError("divergence at iteration " + std::to_string(state.iter + 1) +
                              ": " + e.what(),
                          state);
  }
}

bool check_stop(const IterationRecord& prev, const IterationRecord& curr,
                const SolverState& state, double epsilon) {
  return relative_change(prev.objective, curr.objective) < epsilon &&
         state.primal_residual < epsilon;
}

SolveOutput solve_lvgg(const LvggProblem& problem, const SolverConfig& config,
                       std::optional<SolverState> init,
                       const IterationObserver& observer) {
  problem.validate();
  config.validate();
  SolverState state = init ? std::move(*init) : SolverState::initial(problem.sigma.dim());
  check_state_dims(state, problem.sigma.dim());
  return run_iterations(
      std::move(state), config,
      [&](const SolverState& st) { return sblvgg_step(st, problem, config); },
      [&](const SolverState& st) {
        return eval_objective(problem, st.a, st.l, log_det_from_spectrum(st.a_spectrum));
      },
      observer);
}

SolveOutput solve_glasso(const GlassoProblem& problem, const SolverConfig& config,
                         const IterationObserver& observer) {
  problem.validate();
  config.validate();
  return run_iterations(
      SolverState::initial(problem.sigma.dim()), config,
      [&](const SolverState& st) { return glasso_step(st, problem, config); },
      [&](const SolverState& st) {
        return eval_glasso_objective(problem, st.a, log_det_from_spectrum(st.a_spectrum));
      },
      observer);
}

double kkt_residual(const LvggProblem& problem, const SolverResult& result,
                    double rank_tol) {
  const SymMatrix a_inv = inverse_spd(result.a_hat);
  const Eigen::MatrixXd grad = problem.sigma.dense() - a_inv.dense();
  const Eigen::MatrixXd& s = result.s_hat.dense();
  const Index p = s.rows();
  const double lambda1 = problem.lambda1;

  double stationarity = 0.0;
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < p; ++i) {
      double v;
      if (i == j && problem.diagonal == DiagonalPenalty::kExempt) {
        v = std::abs(grad(i, j));
      } else if (s(i, j) > 0.0) {
        v = std::abs(grad(i, j) + lambda1);
      } else if (s(i, j) < 0.0) {
        v = std::abs(grad(i, j) - lambda1);
      } else {
        v = std::max(0.0, std::abs(grad(i, j)) - lambda1);
      }
      stationarity = std::max(stationarity, v);
    }
  }

  const Eigen::MatrixXd m =
      -grad + problem.lambda2 * Eigen::MatrixXd::Identity(p, p);
  const SymMatrix m_sym = SymMatrix::from_dense(m);
  const double dual_feasibility = std::max(0.0, -eig_sym(m_sym).eigenvalues(0));

  double complementarity = 0.0;
  const EigenDecomp l_eig = eig_sym(result.l_hat);
  const double cutoff = rank_tol * std::max(1.0, l_eig.eigenvalues.maxCoeff());
  std::vector<Index> range;
  for (Index i = 0; i < p; ++i) {
    if (l_eig.eigenvalues(i) > cutoff) range.push_back(i);
  }
  if (!range.empty()) {
    Eigen::MatrixXd q(p, static_cast<Index>(range.size()));
    for (std::size_t c = 0; c < range.size(); ++c) {
      q.col(static_cast<Index>(c)) = l_eig.eigenvectors.col(range[c]);
    }
    complementarity = (q.transpose() * m * q).cwiseAbs().maxCoeff();
  }

  const double residual =
      (result.a_hat - result.s_hat + result.l_hat).frobenius_norm();
  return std::max({stationarity, dual_feasibility, complementarity, residual});
}

}  // namespace lvgg
