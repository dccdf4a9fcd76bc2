#include "lvgg/symlin.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>
#include <vector>

#include "lvgg/error.hpp"

namespace lvgg {

namespace {

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
  const Index p = m.rows();
  Eigen::MatrixXd out(p, p);
  for (Index j = 0; j < p; ++j) {
    out(j, j) = m(j, j);
    for (Index i = j + 1; i < p; ++i) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

// Fills the upper triangle from the lower one.
void mirror_lower(Eigen::MatrixXd& m) {
  const Index p = m.rows();
  for (Index j = 0; j < p; ++j) {
    for (Index i = j + 1; i < p; ++i) m(j, i) = m(i, j);
  }
}

// +0.0 for |x| <= tau, never -0.0.
inline double shrink(double x, double tau) {
  if (x > tau) return x - tau;
  if (x < -tau) return x + tau;
  return 0.0;
}

std::string describe(const Eigen::MatrixXd& m) {
  std::ostringstream os;
  os << "dim=" << m.rows() << " frobenius=" << m.norm()
     << " max_abs=" << m.cwiseAbs().maxCoeff()
     << " diag_min=" << m.diagonal().minCoeff()
     << " diag_max=" << m.diagonal().maxCoeff();
  return os.str();
}

}  // namespace

SymMatrix::SymMatrix(Index dim) : data_(Eigen::MatrixXd::Zero(dim, dim)) {
  if (dim < 1) throw ConfigError("SymMatrix: dimension must be positive");
}

SymMatrix SymMatrix::identity(Index dim) {
  if (dim < 1) throw ConfigError("SymMatrix: dimension must be positive");
  return SymMatrix(Trusted{}, Eigen::MatrixXd::Identity(dim, dim));
}

SymMatrix SymMatrix::diagonal(const Eigen::VectorXd& diag) {
  if (diag.size() < 1) throw ConfigError("SymMatrix: dimension must be positive");
  SymMatrix out(Trusted{}, Eigen::MatrixXd(diag.asDiagonal()));
  out.check_finite();
  return out;
}

SymMatrix SymMatrix::from_dense(const Eigen::MatrixXd& dense) {
  if (dense.rows() != dense.cols() || dense.rows() < 1) {
    throw ConfigError("SymMatrix: input must be a nonempty square matrix");
  }
  SymMatrix out(Trusted{}, symmetrized(dense));
  out.check_finite();
  return out;
}

SymMatrix SymMatrix::from_symmetric(const Eigen::MatrixXd& dense) {
  if (dense.rows() != dense.cols() || dense.rows() < 1) {
    throw ConfigError("SymMatrix: input must be a nonempty square matrix");
  }
  if (dense != dense.transpose()) {
    throw ConfigError("SymMatrix: input is not exactly symmetric");
  }
  SymMatrix out(Trusted{}, dense);
  out.check_finite();
  return out;
}

double SymMatrix::max_abs() const { return data_.cwiseAbs().maxCoeff(); }

double SymMatrix::l1_norm_offdiag() const {
  return data_.cwiseAbs().sum() - data_.diagonal().cwiseAbs().sum();
}

std::size_t SymMatrix::nnz_offdiag() const {
  std::size_t count = 0;
  const Index p = dim();
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < p; ++i) {
      if (i != j && data_(i, j) != 0.0) ++count;
    }
  }
  return count;
}

void SymMatrix::check_same_dim(const SymMatrix& other) const {
  if (dim() != other.dim()) {
    throw ConfigError("SymMatrix: dimension mismatch (" + std::to_string(dim()) +
                      " vs " + std::to_string(other.dim()) + ")");
  }
}

void SymMatrix::check_finite() const {
  if (!data_.allFinite()) throw NonFiniteError("SymMatrix: non-finite entry");
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& other) {
  check_same_dim(other);
  data_ += other.data_;
  check_finite();
  return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& other) {
  check_same_dim(other);
  data_ -= other.data_;
  check_finite();
  return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
  data_ *= s;
  check_finite();
  return *this;
}

double trace_product(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) throw ConfigError("trace_product: dimension mismatch");
  return a.dense().cwiseProduct(b.dense()).sum();
}

EigenDecomp eig_sym(const SymMatrix& x) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(x.dense());
  if (solver.info() != Eigen::Success) {
    throw EigenSolverError("eig_sym: eigensolver did not converge (" +
                           describe(x.dense()) + ")");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

SymMatrix reconstruct(const Eigen::MatrixXd& eigenvectors,
                      const Eigen::VectorXd& values) {
  const Eigen::MatrixXd scaled = eigenvectors * values.asDiagonal();
  return SymMatrix::from_dense(scaled * eigenvectors.transpose());
}

SymMatrix reconstruct_psd(const Eigen::MatrixXd& eigenvectors,
                          const Eigen::VectorXd& values) {
  const Index p = eigenvectors.rows();
  std::vector<Index> active;
  for (Index i = 0; i < values.size(); ++i) {
    if (values(i) < 0.0) throw DomainError("reconstruct_psd: negative eigenvalue");
    if (values(i) > 0.0) active.push_back(i);
  }
  SymMatrix out(p);
  if (active.empty()) return out;

  Eigen::MatrixXd factor(p, static_cast<Index>(active.size()));
  for (std::size_t c = 0; c < active.size(); ++c) {
    factor.col(static_cast<Index>(c)) =
        eigenvectors.col(active[c]) * std::sqrt(values(active[c]));
  }
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(factor);
  mirror_lower(gram);
  return SymMatrix::from_symmetric(gram);
}

SpectralMap spd_functional_sqrt_update_spectral(const SymMatrix& k, double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw ConfigError("spd_functional_sqrt_update: mu must be positive");
  }
  const EigenDecomp eig = eig_sym(k);
  Eigen::VectorXd alpha(eig.eigenvalues.size());
  for (Index i = 0; i < alpha.size(); ++i) {
    const double kappa = eig.eigenvalues(i);
    const double root = std::sqrt(kappa * kappa + 4.0 * mu);
    alpha(i) = kappa >= 0.0 ? (kappa + root) / (2.0 * mu) : 2.0 / (root - kappa);
  }
  SymMatrix a = reconstruct_psd(eig.eigenvectors, alpha);
  return {std::move(a), std::move(alpha)};
}

SymMatrix spd_functional_sqrt_update(const SymMatrix& k, double mu) {
  return spd_functional_sqrt_update_spectral(k, mu).matrix;
}

SymMatrix soft_threshold(const SymMatrix& x, double tau) {
  if (!(tau >= 0.0)) throw ConfigError("soft_threshold: tau must be nonnegative");
  Eigen::MatrixXd out = x.dense().unaryExpr([tau](double v) { return shrink(v, tau); });
  return SymMatrix::from_symmetric(out);
}

SymMatrix soft_threshold_offdiag(const SymMatrix& x, double tau) {
  if (!(tau >= 0.0)) throw ConfigError("soft_threshold: tau must be nonnegative");
  Eigen::MatrixXd out = x.dense().unaryExpr([tau](double v) { return shrink(v, tau); });
  out.diagonal() = x.dense().diagonal();
  return SymMatrix::from_symmetric(out);
}

SpectralMap psd_trace_shrink_spectral(const SymMatrix& x, double eta) {
  if (!(eta >= 0.0)) throw ConfigError("psd_trace_shrink: eta must be nonnegative");
  const EigenDecomp eig = eig_sym(x);
  Eigen::VectorXd shrunk = (eig.eigenvalues.array() - eta).max(0.0).matrix();
  SymMatrix y = reconstruct_psd(eig.eigenvectors, shrunk);
  return {std::move(y), std::move(shrunk)};
}

SymMatrix psd_trace_shrink(const SymMatrix& x, double eta) {
  return psd_trace_shrink_spectral(x, eta).matrix;
}

double log_det_spd(const SymMatrix& x) {
  Eigen::LLT<Eigen::MatrixXd> llt(x.dense());
  if (llt.info() != Eigen::Success) {
    throw DomainError("log det undefined: matrix is not positive definite");
  }
  const auto diag = llt.matrixLLT().diagonal();
  double sum = 0.0;
  for (Index i = 0; i < diag.size(); ++i) {
    if (!(diag(i) > 0.0)) {
      throw DomainError("log det undefined: matrix is not positive definite");
    }
    sum += std::log(diag(i));
  }
  return 2.0 * sum;
}

SymMatrix inverse_spd(const SymMatrix& x) {
  Eigen::LLT<Eigen::MatrixXd> llt(x.dense());
  if (llt.info() != Eigen::Success) {
    throw DomainError("inverse_spd: matrix is not positive definite");
  }
  const Eigen::MatrixXd inv =
      llt.solve(Eigen::MatrixXd::Identity(x.dim(), x.dim()));
  return SymMatrix::from_dense(inv);
}

bool is_positive_definite(const SymMatrix& x) {
  Eigen::LLT<Eigen::MatrixXd> llt(x.dense());
  if (llt.info() != Eigen::Success) return false;
  return (llt.matrixLLT().diagonal().array() > 0.0).all();
}

}  // namespace lvgg
