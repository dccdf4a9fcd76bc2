#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lvgg/datagen.hpp"
#include "lvgg/model.hpp"

namespace lvgg {

// LVGG: sparse + low-rank model. SGG: sparse graphical lasso baseline.
enum class ModelKind { kLvgg, kSgg };

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

// −log det A + tr(A·Σ_test). DomainError if A is not positive definite.
double nloglike(const SymMatrix& a_hat, const SymMatrix& sigma_test);

struct CvPlan {
  int folds = 10;
  std::vector<double> lambda1_grid;
  std::vector<double> lambda2_grid;  // ignored for SGG
  std::uint64_t split_seed = 0;
  double train_fraction = 2.0 / 3.0;
  // Worker threads for grid cells; results do not depend on this.
  int threads = 1;

  void validate(ModelKind model) const;
};

struct CvCell {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double mean_nloglike = 0.0;
  std::vector<double> fold_nloglike;
  int unconverged_folds = 0;
  bool valid = true;
  std::string failure;  // reason the cell was excluded
};

struct CvReport {
  ModelKind model = ModelKind::kLvgg;
  double best_lambda1 = 0.0;
  double best_lambda2 = 0.0;
  std::vector<CvCell> cells;  // lambda1-major order
  double heldout_nloglike = 0.0;
  int rank_l = 0;
  std::size_t nnz_offdiag_s = 0;
  bool refit_converged = false;
  Index n_train = 0;
  Index n_test = 0;
  int folds = 0;
  std::uint64_t split_seed = 0;
  int invalid_cells = 0;
};

struct TrainTestSplit {
  std::vector<Index> train;  // ascending
  std::vector<Index> test;   // ascending
};

// Random outer split; round(train_fraction·n) rows go to training.
TrainTestSplit split_rows(Index n, double train_fraction, std::uint64_t seed);

// Fold id in [0, folds) for each of n rows; fold sizes differ by at most one.
std::vector<int> assign_folds(Index n, int folds, std::uint64_t seed);

// Covariance of `rows` centered with the means of `reference_rows`.
SymMatrix heldout_covariance(const Dataset& data, const std::vector<Index>& rows,
                             const std::vector<Index>& reference_rows);

// Fits the chosen model on a covariance. For SGG lambda2 is unused.
SolverResult fit_model(ModelKind model, const SymMatrix& sigma, double lambda1,
                       double lambda2, const SolverConfig& config);

/**
 * Outer train/test split, k-fold CV over the grid on the training rows,
 * refit on all training rows at the best cell and evaluation on the test
 * rows. Cells whose solves fail are marked invalid and skipped by the
 * argmin; ties go to the larger (λ1, λ2) pair.
 */
CvReport cross_validate(const Dataset& data, const CvPlan& plan,
                        const SolverConfig& config, ModelKind model);

}  // namespace lvgg
