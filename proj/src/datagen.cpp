#include "lvgg/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lvgg/error.hpp"
#include "lvgg/model.hpp"
#include "lvgg/random.hpp"

namespace lvgg {

namespace {

constexpr int kMaxAttempts = 10;
constexpr double kSingularHidden = 1e-12;

double factor_density(double target, Index p) {
  // P(entry of WᵀW nonzero) = 1 − (1 − d²)^p  =>  d = √(1 − (1 − t)^{1/p})
  const double d2 = 1.0 - std::pow(1.0 - target, 1.0 / static_cast<double>(p));
  return std::clamp(std::sqrt(d2), 0.0, 1.0);
}

Eigen::MatrixXd draw_sparse_factor(Index p, double density, std::uint64_t seed) {
  Rng rng(seed, streams::kSparseFactor);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) {
      if (rng.uniform() < density) w(i, j) = rng.normal();
    }
  }
  return w;
}

}  // namespace

void LatentModelSpec::validate() const {
  if (p_obs < 1) throw ConfigError("p_obs must be at least 1");
  if (p_hidden < 1) throw ConfigError("p_hidden must be at least 1");
  if (!(target_sparsity > 0.0 && target_sparsity < 1.0)) {
    throw ConfigError("target_sparsity must lie in (0, 1)");
  }
  if (!(cross_block_scale >= 0.0) || !std::isfinite(cross_block_scale)) {
    throw ConfigError("cross_block_scale must be nonnegative");
  }
}

GroundTruth generate_synthetic(const LatentModelSpec& spec) {
  spec.validate();
  const Index po = spec.p_obs;
  const Index ph = spec.p_hidden;
  const Index p = po + ph;
  const double density = factor_density(spec.target_sparsity, p);

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const std::uint64_t seed = spec.seed + static_cast<std::uint64_t>(attempt);
    const Eigen::MatrixXd w = draw_sparse_factor(p, density, seed);
    Eigen::MatrixXd c = w.transpose() * w;

    Rng noise(seed, streams::kCrossBlock);
    for (Index i = 0; i < po; ++i) {
      for (Index j = po; j < p; ++j) c(i, j) += spec.cross_block_scale * noise.normal();
    }
    c = (0.5 * (c + c.transpose())).eval();
    for (Index j = 0; j < p; ++j) {
      for (Index i = 0; i < p; ++i) {
        c(i, j) = i == j ? 0.0 : std::clamp(c(i, j), -1.0, 1.0);
      }
    }
    const SymMatrix c_sym = SymMatrix::from_dense(c);
    const double lambda_min = eig_sym(c_sym).eigenvalues(0);
    const double shift = std::max(-1.2 * lambda_min, 0.001);
    SymMatrix k = c_sym + shift * SymMatrix::identity(p);

    GroundTruth gt;
    gt.k_o = SymMatrix::from_dense(k.dense().topLeftCorner(po, po));
    gt.k_h = SymMatrix::from_dense(k.dense().bottomRightCorner(ph, ph));
    if (eig_sym(gt.k_h).eigenvalues(0) < kSingularHidden) continue;

    gt.k_oh = k.dense().topRightCorner(po, ph);
    gt.k_full = std::move(k);
    gt.k_marginal = marginal_precision(gt.k_full, po);
    gt.low_rank = gt.k_o - gt.k_marginal;
    gt.factor_density = density;
    gt.realized_sparsity = sparse_ratio(gt.k_o);
    gt.low_rank_rank = numerical_rank(gt.low_rank, 1e-10);
    gt.seed_used = seed;
    gt.attempts = attempt + 1;
    return gt;
  }
  throw DomainError("generate_synthetic: hidden block singular after " +
                    std::to_string(kMaxAttempts) + " attempts");
}

SymMatrix marginal_precision(const SymMatrix& k_full, Index p_obs) {
  const Index p = k_full.dim();
  if (p_obs < 1 || p_obs >= p) {
    throw ConfigError("marginal_precision: p_obs must satisfy 1 <= p_obs < dim");
  }
  if (!is_positive_definite(k_full)) {
    throw DomainError("marginal_precision: k_full is not positive definite");
  }
  const Index ph = p - p_obs;
  const Eigen::MatrixXd& k = k_full.dense();
  Eigen::LLT<Eigen::MatrixXd> hidden(k.bottomRightCorner(ph, ph));
  const Eigen::MatrixXd solved = hidden.solve(k.bottomLeftCorner(ph, p_obs));
  return SymMatrix::from_dense(k.topLeftCorner(p_obs, p_obs) -
                               k.topRightCorner(p_obs, ph) * solved);
}

Dataset make_dataset(Eigen::MatrixXd samples) {
  if (samples.rows() < 1 || samples.cols() < 1) {
    throw ConfigError("dataset must have at least one row and one column");
  }
  if (!samples.allFinite()) throw NonFiniteError("dataset contains non-finite values");
  Dataset d;
  d.column_means = samples.colwise().mean().transpose();
  d.samples = std::move(samples);
  return d;
}

Dataset subset_rows(const Dataset& data, const std::vector<Index>& rows) {
  Eigen::MatrixXd out(static_cast<Index>(rows.size()), data.samples.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.row(static_cast<Index>(r)) = data.samples.row(rows[r]);
  }
  return make_dataset(std::move(out));
}

Dataset sample_gaussian(const SymMatrix& precision, Index n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("sample_gaussian: n must be at least 1");
  const EigenDecomp eig = eig_sym(precision);
  if (!(eig.eigenvalues(0) > 0.0)) {
    throw DomainError("sample_gaussian: precision is not positive definite");
  }
  const Index p = precision.dim();
  // Rows of Z·diag(λ^{-1/2})·Vᵀ.
  const Eigen::MatrixXd factor =
      eig.eigenvalues.array().rsqrt().matrix().asDiagonal() * eig.eigenvectors.transpose();

  Rng rng(seed, streams::kSamples);
  Eigen::MatrixXd z(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) z(i, j) = rng.normal();
  }
  return make_dataset(z * factor);
}

SymMatrix empirical_covariance(const Dataset& data, CovarianceScaling scaling) {
  const Index n = data.samples.rows();
  if (n < 1) throw ConfigError("empirical_covariance: no samples");
  const Eigen::MatrixXd centered = data.samples.rowwise() - data.column_means.transpose();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(centered.cols(), centered.cols());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
  for (Index j = 0; j < gram.cols(); ++j) {
    for (Index i = j + 1; i < gram.rows(); ++i) gram(j, i) = gram(i, j);
  }
  double denom = static_cast<double>(n);
  if (scaling == CovarianceScaling::kUnbiased) {
    if (n < 2) throw ConfigError("empirical_covariance: unbiased scaling needs n >= 2");
    denom -= 1.0;
  }
  return SymMatrix::from_symmetric(gram / denom);
}

}  // namespace lvgg
