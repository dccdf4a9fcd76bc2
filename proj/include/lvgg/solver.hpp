#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <vector>

#include "lvgg/error.hpp"
#include "lvgg/model.hpp"

namespace lvgg {

struct IterationRecord {
  int iter = 0;
  double objective = 0.0;
  double primal_residual = 0.0;
  // |Φₖ − Φₖ₋₁| / max(1, |Φₖ|); +inf on the first iteration.
  double rel_obj_change = 0.0;
  std::chrono::duration<double> wall_time_cumulative{0.0};
};

// A non-finite value appeared in an iterate. Carries the last state whose
// matrices were all finite.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, SolverState last_finite)
      : Error(what), last_finite_state_(std::move(last_finite)) {}
  const SolverState& last_finite_state() const { return last_finite_state_; }

 private:
  SolverState last_finite_state_;
};

/**
 * One pass of the four sequential updates:
 *   K ← μ(S − L) − Σ − U,   A ← (K + √(K² + 4μI)) / (2μ)
 *   S ← T_{λ1/μ}(A + L + U/μ)
 *   L ← S_{λ2/μ}(S − A − U/μ)
 *   U ← U + μ(A − S + L)
 */
SolverState sblvgg_step(const SolverState& state, const LvggProblem& problem,
                        const SolverConfig& config);

// Two-block variant for the graphical lasso: the L-update is dropped and L
// stays identically zero.
SolverState glasso_step(const SolverState& state, const GlassoProblem& problem,
                        const SolverConfig& config);

// Relative objective change and primal residual both below epsilon.
bool check_stop(const IterationRecord& prev, const IterationRecord& curr,
                const SolverState& state, double epsilon);

using IterationObserver = std::function<void(const IterationRecord&)>;

struct SolveOutput {
  SolverResult result;
  std::vector<IterationRecord> records;
};

/**
 * Runs sblvgg_step until check_stop holds or max_iters is reached. Hitting
 * the cap is not an error: the result reports converged = false. Each
 * record is passed to `observer` as soon as it is produced.
 */
SolveOutput solve_lvgg(const LvggProblem& problem, const SolverConfig& config,
                       std::optional<SolverState> init = std::nullopt,
                       const IterationObserver& observer = {});

// K̂ is reported as s_hat (exactly sparse); a_hat is the positive definite
// split copy. l_hat is zero and rank_l is 0.
SolveOutput solve_glasso(const GlassoProblem& problem, const SolverConfig& config,
                         const IterationObserver& observer = {});

/**
 * Optimality certificate for an approximate solution. Returns the largest of
 *  (i)   the ℓ∞ distance of Σ − A⁻¹ from −λ1·∂‖S‖₁ (minimal-norm subgradient),
 *  (ii)  the L-block violation for M = A⁻¹ − Σ + λ2·I: negative part of
 *        λ_min(M) and the largest entry of M restricted to range(L),
 *  (iii) ‖A − S + L‖_F.
 */
double kkt_residual(const LvggProblem& problem, const SolverResult& result,
                    double rank_tol = 1e-10);

}  // namespace lvgg
