#pragma once

// Dense symmetric linear algebra: the matrix type shared by every module,
// a full symmetric eigensolver, and the closed-form proximal maps used by
// the splitting iterations.

#include <Eigen/Dense>

#include <cstddef>

namespace lvgg {

using Index = Eigen::Index;

/**
 * Dense symmetric p×p matrix with mirrored full storage.
 *
 * Every constructor either builds a structurally symmetric matrix or
 * symmetrizes its input as (X + Xᵀ)/2, so entry(i, j) == entry(j, i) holds
 * bitwise. Non-finite entries are rejected with NonFiniteError.
 */
class SymMatrix {
 public:
  SymMatrix() = default;

  // p×p zero matrix.
  explicit SymMatrix(Index dim);

  static SymMatrix zero(Index dim) { return SymMatrix(dim); }
  static SymMatrix identity(Index dim);
  static SymMatrix diagonal(const Eigen::VectorXd& diag);

  // Symmetrizes via (X + Xᵀ)/2. Throws ConfigError for non-square input.
  static SymMatrix from_dense(const Eigen::MatrixXd& dense);

  // Accepts only inputs that are already bitwise symmetric.
  static SymMatrix from_symmetric(const Eigen::MatrixXd& dense);

  Index dim() const { return data_.rows(); }
  double operator()(Index i, Index j) const { return data_(i, j); }
  const Eigen::MatrixXd& dense() const { return data_; }

  double trace() const { return data_.trace(); }
  double frobenius_norm() const { return data_.norm(); }
  double max_abs() const;
  // Entrywise absolute sum over all entries, diagonal included.
  double l1_norm() const { return data_.cwiseAbs().sum(); }
  double l1_norm_offdiag() const;
  // Number of off-diagonal entries that are not exactly zero.
  std::size_t nnz_offdiag() const;

  SymMatrix& operator+=(const SymMatrix& other);
  SymMatrix& operator-=(const SymMatrix& other);
  SymMatrix& operator*=(double s);

  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(SymMatrix a, double s) { return a *= s; }
  friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }
  friend SymMatrix operator/(SymMatrix a, double s) { return a *= 1.0 / s; }
  friend SymMatrix operator-(SymMatrix a) { return a *= -1.0; }

  friend bool operator==(const SymMatrix& a, const SymMatrix& b) {
    return a.data_.rows() == b.data_.rows() && a.data_ == b.data_;
  }

 private:
  struct Trusted {};
  SymMatrix(Trusted, Eigen::MatrixXd data) : data_(std::move(data)) {}
  void check_same_dim(const SymMatrix& other) const;
  void check_finite() const;

  Eigen::MatrixXd data_;
};

// Frobenius inner product tr(AB) for symmetric A, B.
double trace_product(const SymMatrix& a, const SymMatrix& b);

struct EigenDecomp {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // column i pairs with eigenvalues(i)
};

/**
 * Full eigendecomposition (Householder tridiagonalization + implicit QL).
 * Throws EigenSolverError with conditioning diagnostics if it fails.
 */
EigenDecomp eig_sym(const SymMatrix& x);

// V·diag(values)·Vᵀ, symmetrized.
SymMatrix reconstruct(const Eigen::MatrixXd& eigenvectors,
                      const Eigen::VectorXd& values);

// Like reconstruct() but for nonnegative values; columns whose value is
// exactly zero are skipped, so an all-zero spectrum yields an exact zero.
SymMatrix reconstruct_psd(const Eigen::MatrixXd& eigenvectors,
                          const Eigen::VectorXd& values);

// A matrix produced by a spectral map together with its eigenvalues
// (in the eigenbasis of the input, same order).
struct SpectralMap {
  SymMatrix matrix;
  Eigen::VectorXd eigenvalues;
};

/**
 * Solves −A⁻¹ − K + μA = 0 for A ≻ 0, i.e. A = (K + √(K² + 4μI)) / (2μ).
 *
 * The scalar root (κ + √(κ² + 4μ)) / (2μ) is applied to each eigenvalue κ of
 * K directly. For κ < 0 the algebraically equal form 2 / (√(κ² + 4μ) − κ)
 * is used to avoid cancellation.
 */
SpectralMap spd_functional_sqrt_update_spectral(const SymMatrix& k, double mu);
SymMatrix spd_functional_sqrt_update(const SymMatrix& k, double mu);

// Entrywise sgn(x)·max(0, |x| − τ). |x| ≤ τ maps to +0.0 exactly.
SymMatrix soft_threshold(const SymMatrix& x, double tau);

// Same, leaving the diagonal untouched.
SymMatrix soft_threshold_offdiag(const SymMatrix& x, double tau);

/**
 * argmin over Y ⪰ 0 of η·tr(Y) + ½‖Y − X‖²_F, which is
 * V·diag(max(0, λᵢ − η))·Vᵀ for X = V·diag(λ)·Vᵀ.
 */
SpectralMap psd_trace_shrink_spectral(const SymMatrix& x, double eta);
SymMatrix psd_trace_shrink(const SymMatrix& x, double eta);

// log det via Cholesky; DomainError if x is not positive definite.
double log_det_spd(const SymMatrix& x);

// Inverse via Cholesky; DomainError if x is not positive definite.
SymMatrix inverse_spd(const SymMatrix& x);

// True iff the Cholesky factorization succeeds with positive pivots.
bool is_positive_definite(const SymMatrix& x);

}  // namespace lvgg
