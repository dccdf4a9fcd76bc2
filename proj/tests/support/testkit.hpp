#pragma once

// Random instance generators and independent reference computations shared
// by the unit tests and the acceptance runner. Nothing here calls into the
// library's linear algebra, so agreement is evidence rather than tautology.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>

namespace testkit {

using Eigen::MatrixXd;
using Eigen::VectorXd;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}

  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

  MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols) {
    MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal();
    }
    return m;
  }

  // Symmetric with i.i.d. N(0,1) entries on and above the diagonal.
  MatrixXd symmetric(Eigen::Index p) {
    MatrixXd m(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
      for (Eigen::Index i = 0; i <= j; ++i) {
        m(i, j) = normal();
        m(j, i) = m(i, j);
      }
    }
    return m;
  }

  // Sample-covariance-like SPD matrix with unit-order spectrum.
  MatrixXd spd(Eigen::Index p, double ridge = 0.2) {
    const MatrixXd b = gaussian(p, 2 * p + 3);
    MatrixXd s = b * b.transpose() / static_cast<double>(b.cols());
    s += ridge * MatrixXd::Identity(p, p);
    return 0.5 * (s + s.transpose());
  }

  // Random symmetric matrix with spectrum drawn from [lo, hi].
  MatrixXd with_spectrum(Eigen::Index p, double lo, double hi) {
    Eigen::HouseholderQR<MatrixXd> qr(gaussian(p, p));
    const MatrixXd q = qr.householderQ();
    VectorXd d(p);
    for (Eigen::Index i = 0; i < p; ++i) d(i) = uniform(lo, hi);
    MatrixXd m = q * d.asDiagonal() * q.transpose();
    return 0.5 * (m + m.transpose());
  }

 private:
  std::mt19937_64 engine_;
};

// ---- naive evaluators -----------------------------------------------------

// Plain Cholesky; returns NaN if x is not positive definite.
inline double naive_log_det(const MatrixXd& x) {
  const Eigen::Index p = x.rows();
  MatrixXd l = MatrixXd::Zero(p, p);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    double d = x(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    l(j, j) = std::sqrt(d);
    sum += std::log(l(j, j));
    for (Eigen::Index i = j + 1; i < p; ++i) {
      double v = x(i, j);
      for (Eigen::Index k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / l(j, j);
    }
  }
  return 2.0 * sum;
}

inline double naive_trace_product(const MatrixXd& a, const MatrixXd& b) {
  double t = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index k = 0; k < a.cols(); ++k) t += a(i, k) * b(k, i);
  }
  return t;
}

inline double naive_l1(const MatrixXd& x, bool include_diagonal = true) {
  double t = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (i == j && !include_diagonal) continue;
      t += std::abs(x(i, j));
    }
  }
  return t;
}

inline double naive_objective(const MatrixXd& sigma, const MatrixXd& a, const MatrixXd& l,
                              double lambda1, double lambda2) {
  return -naive_log_det(a) + naive_trace_product(a, sigma) + lambda1 * naive_l1(a + l) +
         lambda2 * l.trace();
}

inline double naive_glasso_objective(const MatrixXd& sigma, const MatrixXd& k, double lambda) {
  return -naive_log_det(k) + naive_trace_product(k, sigma) + lambda * naive_l1(k);
}

inline double naive_nloglike(const MatrixXd& a, const MatrixXd& sigma_test) {
  return -naive_log_det(a) + naive_trace_product(a, sigma_test);
}

// ---- proximal operators and updates, independent routes -------------------

inline double scalar_soft(double x, double tau) {
  if (std::abs(x) <= tau) return 0.0;
  return x > 0.0 ? x - tau : x + tau;
}

inline MatrixXd naive_soft_threshold(const MatrixXd& x, double tau) {
  MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) out(i, j) = scalar_soft(x(i, j), tau);
  }
  return out;
}

// Positive root of μa² − κa − 1 = 0 by bisection.
inline double bisect_root(double kappa, double mu) {
  const auto f = [&](double a) { return mu * a * a - kappa * a - 1.0; };
  double lo = 0.0, hi = 1.0;
  while (f(hi) < 0.0) hi *= 2.0;
  for (int i = 0; i < 400 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline MatrixXd sym_sqrt(const MatrixXd& psd) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(psd);
  const VectorXd r = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * r.asDiagonal() * es.eigenvectors().transpose();
}

// A = (K + (K² + 4μI)^{1/2}) / (2μ), via a square root of K² + 4μI.
inline MatrixXd sqrt_update_via_square(const MatrixXd& k, double mu) {
  const Eigen::Index p = k.rows();
  const MatrixXd inner = k * k + 4.0 * mu * MatrixXd::Identity(p, p);
  MatrixXd a = (k + sym_sqrt(0.5 * (inner + inner.transpose()))) / (2.0 * mu);
  return 0.5 * (a + a.transpose());
}

inline MatrixXd psd_shrink_by_eig(const MatrixXd& x, double eta) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(x);
  const VectorXd d = (es.eigenvalues().array() - eta).max(0.0).matrix();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

inline double shrink_objective(const MatrixXd& y, const MatrixXd& x, double eta) {
  return eta * y.trace() + 0.5 * (y - x).squaredNorm();
}

inline MatrixXd project_psd(const MatrixXd& x) { return psd_shrink_by_eig(x, 0.0); }

// Best feasible 2×2 point on a dense grid, refined around the incumbent.
inline double grid_min_shrink_2x2(const MatrixXd& x, double eta) {
  double best = shrink_objective(MatrixXd::Zero(2, 2), x, eta);
  double ca = 0.0, cb = 0.0, cc = 0.0;
  double half = std::max(1.0, x.cwiseAbs().maxCoeff()) + 1.0;
  double center_a = half, center_c = half;
  double span_a = half, span_b = half, span_c = half;
  for (int round = 0; round < 40; ++round) {
    const int n = 20;
    for (int ia = 0; ia <= n; ++ia) {
      const double a = center_a - span_a + 2.0 * span_a * ia / n;
      if (a < 0.0) continue;
      for (int ic = 0; ic <= n; ++ic) {
        const double c = center_c - span_c + 2.0 * span_c * ic / n;
        if (c < 0.0) continue;
        const double bound = std::sqrt(a * c);
        for (int ib = 0; ib <= n; ++ib) {
          double b = cb - span_b + 2.0 * span_b * ib / n;
          b = std::clamp(b, -bound, bound);
          const double v = eta * (a + c) +
                           0.5 * ((a - x(0, 0)) * (a - x(0, 0)) +
                                  2.0 * (b - x(0, 1)) * (b - x(0, 1)) +
                                  (c - x(1, 1)) * (c - x(1, 1)));
          if (v < best) {
            best = v;
            ca = a;
            cb = b;
            cc = c;
          }
        }
      }
    }
    center_a = ca;
    center_c = cc;
    span_a *= 0.6;
    span_b *= 0.6;
    span_c *= 0.6;
  }
  return best;
}

// Projected gradient with a fixed step on η·tr(Y) + ½‖Y − X‖².
inline double projected_gradient_shrink(const MatrixXd& x, double eta, int iters = 400) {
  const Eigen::Index p = x.rows();
  MatrixXd y = MatrixXd::Zero(p, p);
  const double step = 0.3;
  for (int k = 0; k < iters; ++k) {
    const MatrixXd grad = eta * MatrixXd::Identity(p, p) + (y - x);
    y = project_psd(y - step * grad);
  }
  return shrink_objective(y, x, eta);
}

// One split Bregman iteration written straight from the update formulas.
struct Iterate {
  MatrixXd a, s, l, u;
};

inline Iterate transliterated_step(const Iterate& in, const MatrixXd& sigma, double lambda1,
                                   double lambda2, double mu) {
  Iterate out;
  const MatrixXd k = mu * (in.s - in.l) - sigma - in.u;
  out.a = sqrt_update_via_square(k, mu);
  out.s = naive_soft_threshold(out.a + in.l + in.u / mu, lambda1 / mu);
  out.l = psd_shrink_by_eig(out.s - out.a - in.u / mu, lambda2 / mu);
  out.u = in.u + mu * (out.a - out.s + out.l);
  return out;
}

// Marginal precision through ((K⁻¹)_OO)⁻¹.
inline MatrixXd schur_via_inverse(const MatrixXd& k_full, Eigen::Index p_obs) {
  const MatrixXd cov = k_full.inverse();
  return cov.topLeftCorner(p_obs, p_obs).inverse();
}

inline double rel_frobenius(const MatrixXd& x, const MatrixXd& y) {
  return (x - y).norm() / std::max({1.0, x.norm(), y.norm()});
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace testkit
