#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "cstarkit/errors.hpp"

namespace cstar {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline CMatrix identity(Index n) { return CMatrix::Identity(n, n); }

inline void require_square(const CMatrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch("matrix is not square: " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()));
  }
}

inline void require_same_shape(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionMismatch("matrix shapes differ: " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                            std::to_string(b.cols()));
  }
}

// Hilbert-Schmidt inner product Tr(a* b) and the induced (Frobenius) norm.
inline Complex hs_inner(const CMatrix& a, const CMatrix& b) {
  require_same_shape(a, b);
  return a.conjugate().cwiseProduct(b).sum();
}

inline double hs_norm(const CMatrix& m) { return m.norm(); }

inline CMatrix hermitian_part(const CMatrix& m) {
  require_square(m);
  return 0.5 * (m + CMatrix(m.adjoint()));
}

inline CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

// Column-major flattening used for all internal coordinate work.
inline CVector vec(const CMatrix& m) {
  return Eigen::Map<const CVector>(m.data(), m.size());
}

inline CMatrix unvec(const CVector& v, Index rows, Index cols) {
  if (v.size() != rows * cols) throw DimensionMismatch("unvec: size mismatch");
  return Eigen::Map<const CMatrix>(v.data(), rows, cols);
}

inline RVector singular_values(const CMatrix& m) {
  if (m.size() == 0) return RVector::Zero(0);
  if (std::min(m.rows(), m.cols()) > 64) {
    Eigen::BDCSVD<CMatrix> svd(m);
    return svd.singularValues();
  }
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues();
}

// Operator norm = largest singular value.
inline double op_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return singular_values(m)(0);
}

inline bool is_hermitian(const CMatrix& m, double tol = 1e-9) {
  require_square(m);
  return op_norm(m - CMatrix(m.adjoint())) <= tol;
}

inline bool is_unitary(const CMatrix& m, double tol = 1e-9) {
  require_square(m);
  return op_norm(CMatrix(m.adjoint() * m) - identity(m.rows())) <= tol;
}

inline bool is_projection(const CMatrix& m, double tol = 1e-9) {
  require_square(m);
  return is_hermitian(m, tol) && op_norm(m * m - m) <= tol;
}

// Unitary polar factor of an invertible x, computed as x (x*x)^{-1/2} with a
// Hermitian eigendecomposition of x*x.
inline CMatrix polar_unitary(const CMatrix& x) {
  require_square(x);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(CMatrix(x.adjoint() * x));
  if (es.info() != Eigen::Success) throw NotInvertible("polar factor: eigensolver failed");
  const RVector lam = es.eigenvalues();
  const double sigma_min = std::sqrt(std::max(lam(0), 0.0));
  if (sigma_min <= 1e-12) {
    throw NotInvertible("polar factor undefined: smallest singular value " +
                        std::to_string(sigma_min));
  }
  const CMatrix v = es.eigenvectors();
  const CVector inv_sqrt = lam.cwiseSqrt().cwiseInverse().cast<Complex>();
  return x * CMatrix(v * inv_sqrt.asDiagonal() * v.adjoint());
}

// Spectral projection of a Hermitian matrix onto eigenvalues inside
// [lo - pad, hi + pad].  The pad absorbs eigenvalues put on the window edge
// by roundoff.
inline CMatrix spectral_window_projection(const CMatrix& a, double lo, double hi,
                                          double herm_tol = 1e-9) {
  require_square(a);
  if (op_norm(a - CMatrix(a.adjoint())) > herm_tol) {
    throw NotHermitian("spectral window requires a Hermitian input");
  }
  constexpr double pad = 1e-12;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a));
  if (es.info() != Eigen::Success) throw Error("spectral window: eigensolver failed");
  const RVector lam = es.eigenvalues();
  const CMatrix v = es.eigenvectors();
  CMatrix q = CMatrix::Zero(a.rows(), a.cols());
  for (Index k = 0; k < lam.size(); ++k) {
    if (lam(k) >= lo - pad && lam(k) <= hi + pad) {
      q.noalias() += v.col(k) * v.col(k).adjoint();
    }
  }
  return q;
}

// Unitary w with w p w* = q for projections p, q at distance < 1, via the
// polar factor of qp + (1-q)(1-p).
inline CMatrix projection_intertwiner(const CMatrix& p, const CMatrix& q) {
  require_square(p);
  require_same_shape(p, q);
  const double dist = op_norm(p - q);
  if (dist >= 1.0) {
    throw TooFar("projections at distance " + std::to_string(dist) + " >= 1");
  }
  const CMatrix one = identity(p.rows());
  return polar_unitary(q * p + (one - q) * (one - p));
}

// Deterministic Gaussian source: mt19937_64 + explicit Box-Muller, so a seed
// pins the sample stream independent of the standard library's distribution
// implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }  // [0,1)

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0,1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Standard complex Gaussian (E|z|^2 = 1).
  Complex cgaussian() {
    const double re = gaussian();
    const double im = gaussian();
    return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
  }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  double spare_{0.0};
  bool has_spare_{false};
};

inline CMatrix random_matrix(Index n, Rng& rng) {
  CMatrix m(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) m(i, j) = rng.cgaussian();
  }
  return m;
}

inline CMatrix random_hermitian(Index n, Rng& rng) { return hermitian_part(random_matrix(n, rng)); }

// u = exp(i t H) with a seeded random Hermitian generator of unit norm; t is
// calibrated by bisection so that ||u - 1|| hits eps.  With ||H|| = 1 the
// reachable range is [0, 2), approached at t = pi.
inline CMatrix random_unitary_near_identity(Index n, double eps, Rng& rng) {
  if (n < 1) throw DimensionMismatch("ambient dimension must be >= 1");
  if (!(eps >= 0.0) || eps >= 2.0) {
    throw EpsOutOfRange("eps must lie in [0, 2): got " + std::to_string(eps));
  }
  if (eps == 0.0) return identity(n);
  CMatrix h = random_hermitian(n, rng);
  double nh = op_norm(h);
  while (nh <= 1e-14) {  // essentially impossible, but keep the loop total
    h = random_hermitian(n, rng);
    nh = op_norm(h);
  }
  h /= nh;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const RVector lam = es.eigenvalues();
  const CMatrix v = es.eigenvectors();
  const auto dist_at = [&](double t) {
    double worst = 0.0;
    for (Index k = 0; k < lam.size(); ++k) {
      worst = std::max(worst, 2.0 * std::abs(std::sin(0.5 * t * lam(k))));
    }
    return worst;
  };
  double lo = 0.0, hi = std::numbers::pi;
  for (int it = 0; it < 128; ++it) {
    const double mid = 0.5 * (lo + hi);
    (dist_at(mid) < eps ? lo : hi) = mid;
  }
  const double t = 0.5 * (lo + hi);
  CVector phases(n);
  for (Index k = 0; k < n; ++k) phases(k) = std::polar(1.0, t * lam(k));
  return v * phases.asDiagonal() * v.adjoint();
}

inline CMatrix random_unitary_near_identity(Index n, double eps, std::uint64_t seed) {
  Rng rng(seed);
  return random_unitary_near_identity(n, eps, rng);
}

}  // namespace cstar
