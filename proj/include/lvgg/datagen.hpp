#pragma once

#include <cstdint>
#include <vector>

#include "lvgg/symlin.hpp"

namespace lvgg {

struct LatentModelSpec {
  Index p_obs = 50;
  Index p_hidden = 10;
  // Target fraction of nonzero off-diagonal entries in K_O.
  double target_sparsity = 0.05;
  std::uint64_t seed = 0;
  // Standard deviation of the noise added to the observed-hidden block.
  double cross_block_scale = 0.5;

  void validate() const;
};

struct GroundTruth {
  SymMatrix k_full;               // (p_o + p_h) × (p_o + p_h), positive definite
  SymMatrix k_o;                  // observed block
  SymMatrix k_h;                  // hidden block
  Eigen::MatrixXd k_oh;           // p_o × p_h cross block
  SymMatrix k_marginal;           // K_O − K_OH·K_H⁻¹·K_HO
  SymMatrix low_rank;             // K_OH·K_H⁻¹·K_HO

  double factor_density = 0.0;    // density used for the sparse factor W
  double realized_sparsity = 0.0; // off-diagonal nonzero fraction of K_O
  int low_rank_rank = 0;
  std::uint64_t seed_used = 0;    // seed of the accepted attempt
  int attempts = 0;
};

/**
 * Random latent-variable model:
 *   W sparse p×p with N(0,1) nonzeros, C = WᵀW,
 *   C_OH += scale·N(0,1), C = (C + Cᵀ)/2,
 *   zero the diagonal and clamp off-diagonals to [−1, 1],
 *   K = C + max(−1.2·λ_min(C), 0.001)·I,
 * then the observed marginal precision by Schur complement.
 *
 * W's density is chosen from the target sparsity: an off-diagonal entry of
 * WᵀW is nonzero with probability 1 − (1 − d²)^p. If K_H comes out
 * numerically singular the draw is repeated with seed + 1, up to 10 times.
 */
GroundTruth generate_synthetic(const LatentModelSpec& spec);

// K_O − K_OH·K_H⁻¹·K_HO for the leading p_obs block. DomainError if k_full
// is not positive definite.
SymMatrix marginal_precision(const SymMatrix& k_full, Index p_obs);

struct Dataset {
  Eigen::MatrixXd samples;       // n × p, one observation per row
  Eigen::VectorXd column_means;  // means of `samples`, used for centering
};

Dataset make_dataset(Eigen::MatrixXd samples);

// Rows selected by `rows`, with means recomputed for the subset.
Dataset subset_rows(const Dataset& data, const std::vector<Index>& rows);

/**
 * n i.i.d. draws from N(0, precision⁻¹). With precision = V·diag(λ)·Vᵀ the
 * samples are Z·diag(λ^{-1/2})·Vᵀ for Z standard normal, drawn row by row.
 * DomainError if precision is not positive definite.
 */
Dataset sample_gaussian(const SymMatrix& precision, Index n, std::uint64_t seed);

enum class CovarianceScaling {
  kMaximumLikelihood,  // 1/n
  kUnbiased,           // 1/(n − 1)
};

// Column-centered Gram matrix XᵀX / n (or / (n − 1)).
SymMatrix empirical_covariance(const Dataset& data,
                               CovarianceScaling scaling = CovarianceScaling::kMaximumLikelihood);

}  // namespace lvgg
