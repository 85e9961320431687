#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "cstarkit/matrix.hpp"
#include "cstarkit/subalgebra.hpp"

namespace cstar {

// Conditional expectation E: source -> target (target inside source), stored
// as its matrix in the HS coordinates of the source span:
// E(s_j) = sum_k map(k, j) s_k.
struct CondExpectation {
  Subalgebra source;
  Subalgebra target;
  Eigen::MatrixXcd map;

  CVector apply_coords(const CVector& c) const { return map * c; }

  CMatrix apply(const CMatrix& x) const {
    return from_coords(source, map * span_coords(source, x));
  }
};

// Quasi-basis {u_i} for a conditional expectation: b = sum_i u_i E(u_i* b),
// with index element sum_i u_i u_i*.
struct QuasiBasis {
  std::vector<CMatrix> elements;
  CMatrix index_element;
  bool in_unit_ball{false};
};

namespace detail {

inline void require_nested(const Subalgebra& inner, const Subalgebra& outer, const char* what) {
  if (inner.ambient_dim != outer.ambient_dim) throw DimensionMismatch(what);
  for (const CMatrix& b : inner.basis) {
    if (!contains(outer, b, 1e-8)) throw NotNested(what);
  }
}

// Hermitian inverse square root / square root via eigendecomposition; throws
// the supplied error if the smallest eigenvalue is at or below the cutoff.
struct HermitianRoots {
  Eigen::MatrixXcd half, half_inv, inv;
  double min_eig{}, max_eig{};
};

template <typename ErrorT>
inline HermitianRoots hermitian_roots(const Eigen::MatrixXcd& g, double cutoff,
                                      const std::string& what) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(g));
  if (es.info() != Eigen::Success) throw ErrorT(what + ": eigensolver failed");
  const RVector lam = es.eigenvalues();
  const CMatrix v = es.eigenvectors();
  HermitianRoots r;
  r.min_eig = lam(0);
  r.max_eig = lam(lam.size() - 1);
  if (r.min_eig <= cutoff * std::max(1.0, r.max_eig)) {
    throw ErrorT(what + ": smallest eigenvalue " + std::to_string(r.min_eig));
  }
  const CVector d_half = lam.cwiseSqrt().cast<Complex>();
  const CVector d_half_inv = lam.cwiseSqrt().cwiseInverse().cast<Complex>();
  const CVector d_inv = lam.cwiseInverse().cast<Complex>();
  r.half = v * d_half.asDiagonal() * v.adjoint();
  r.half_inv = v * d_half_inv.asDiagonal() * v.adjoint();
  r.inv = v * d_inv.asDiagonal() * v.adjoint();
  return r;
}

}  // namespace detail

// Gram matrix of the source span under (x, y) -> tau(E(x* y)), tau the
// normalized ambient trace.  This localized form is positive definite exactly
// when E is faithful.
inline Eigen::MatrixXcd expectation_gram(const CondExpectation& e) {
  const Subalgebra& src = e.source;
  const Index ds = src.dim();
  const double n = static_cast<double>(src.ambient_dim);
  CVector tau(ds);
  for (Index k = 0; k < ds; ++k) tau(k) = src.basis[static_cast<size_t>(k)].trace() / n;
  Eigen::MatrixXcd g(ds, ds);
  for (Index j = 0; j < ds; ++j) {
    const CMatrix sj_adj = src.basis[static_cast<size_t>(j)].adjoint();
    for (Index k = 0; k < ds; ++k) {
      const CVector c = e.map * span_coords(src, sj_adj * src.basis[static_cast<size_t>(k)]);
      g(j, k) = (tau.array() * c.array()).sum();
    }
  }
  return g;
}

// The expectation preserving the normalized ambient trace: HS-orthogonal
// projection of the source span onto the target span.
inline CondExpectation trace_preserving_expectation(const Subalgebra& d, const Subalgebra& a) {
  detail::require_nested(a, d, "trace_preserving_expectation: target not inside source");
  const Index ds = d.dim(), da = a.dim();
  Eigen::MatrixXcd g(ds, da);
  for (Index j = 0; j < ds; ++j) {
    for (Index i = 0; i < da; ++i) {
      g(j, i) = hs_inner(d.basis[static_cast<size_t>(j)], a.basis[static_cast<size_t>(i)]);
    }
  }
  return CondExpectation{d, a, g * g.adjoint()};
}

// Group-averaged expectation x -> (1/|G|) sum_g g x g* onto the fixed-point
// algebra of the unitaries g.
inline CondExpectation averaging_expectation(const Subalgebra& d, const Subalgebra& fixed,
                                             const std::vector<CMatrix>& unitaries) {
  detail::require_nested(fixed, d, "averaging_expectation: fixed algebra not inside source");
  if (unitaries.empty()) throw PreconditionFailed("averaging_expectation: empty group");
  const Index ds = d.dim();
  Eigen::MatrixXcd map(ds, ds);
  for (Index j = 0; j < ds; ++j) {
    CMatrix acc = CMatrix::Zero(d.ambient_dim, d.ambient_dim);
    for (const CMatrix& g : unitaries) {
      acc += g * d.basis[static_cast<size_t>(j)] * g.adjoint();
    }
    acc /= static_cast<double>(unitaries.size());
    map.col(j) = span_coords(d, acc);
  }
  return CondExpectation{d, fixed, std::move(map)};
}

// Restriction of e to an intermediate subalgebra b (target <= b <= source).
inline CondExpectation restriction(const CondExpectation& e, const Subalgebra& b) {
  detail::require_nested(e.target, b, "restriction: target not inside the new source");
  detail::require_nested(b, e.source, "restriction: new source not inside the old source");
  const Index db = b.dim();
  Eigen::MatrixXcd map(db, db);
  for (Index j = 0; j < db; ++j) {
    map.col(j) = span_coords(b, e.apply(b.basis[static_cast<size_t>(j)]));
  }
  return CondExpectation{b, e.target, std::move(map)};
}

// Quasi-basis via the frame construction: with {m_k} the stored source basis,
// the operator S(b) = sum_k m_k E(m_k* b) is positive and invertible on the
// tau-localized source span, and {S^{-1/2}(m_k)} reconstructs exactly.
inline QuasiBasis quasi_basis(const CondExpectation& e) {
  const Subalgebra& src = e.source;
  const Index ds = src.dim();
  const Eigen::MatrixXcd gram = expectation_gram(e);
  const auto g = detail::hermitian_roots<SingularFrame>(gram, 1e-10, "localized form of the expectation");
  Eigen::MatrixXcd s_mat(ds, ds);
  for (Index j = 0; j < ds; ++j) {
    CMatrix acc = CMatrix::Zero(src.ambient_dim, src.ambient_dim);
    for (Index k = 0; k < ds; ++k) {
      const CMatrix& mk = src.basis[static_cast<size_t>(k)];
      acc += mk * e.apply(mk.adjoint() * src.basis[static_cast<size_t>(j)]);
    }
    s_mat.col(j) = span_coords(src, acc);
  }
  const Eigen::MatrixXcd s_orth = g.half * s_mat * g.half_inv;
  const auto s = detail::hermitian_roots<SingularFrame>(s_orth, 1e-10, "frame operator");
  const Eigen::MatrixXcd s_inv_half = g.half_inv * s.half_inv * g.half;
  QuasiBasis qb;
  qb.elements.reserve(static_cast<size_t>(ds));
  CMatrix index = CMatrix::Zero(src.ambient_dim, src.ambient_dim);
  bool unit = true;
  for (Index k = 0; k < ds; ++k) {
    CMatrix u = from_coords(src, s_inv_half.col(k));
    index += u * u.adjoint();
    if (op_norm(u) > 1.0 + 1e-9) unit = false;
    qb.elements.push_back(std::move(u));
  }
  qb.index_element = hermitian_part(index);
  qb.in_unit_ball = unit;
  return qb;
}

// Largest reconstruction defect max_j || sum_i u_i E(u_i* s_j) - s_j || over
// the source basis.
inline double reconstruction_residual(const QuasiBasis& qb, const CondExpectation& e) {
  double worst = 0.0;
  for (const CMatrix& s : e.source.basis) {
    CMatrix acc = CMatrix::Zero(e.source.ambient_dim, e.source.ambient_dim);
    for (const CMatrix& u : qb.elements) acc += u * e.apply(u.adjoint() * s);
    worst = std::max(worst, op_norm(acc - s));
  }
  return worst;
}

inline CMatrix watatani_index(const CondExpectation& e) { return quasi_basis(e).index_element; }

// Replace {u_i} by K copies of u_i / sqrt(K), K = ceil(max_i ||u_i||^2), so
// every element is a contraction while the reconstruction sum and the index
// element are unchanged.  The small guard inside ceil keeps exact squares
// (e.g. ||u||^2 = 2) from rounding up a step.
inline QuasiBasis unit_ball_rescale(const QuasiBasis& qb) {
  double max_sq = 0.0;
  for (const CMatrix& u : qb.elements) {
    const double nu = op_norm(u);
    max_sq = std::max(max_sq, nu * nu);
  }
  const long k = std::max(1L, static_cast<long>(std::ceil(max_sq - 1e-9)));
  QuasiBasis out;
  out.index_element = qb.index_element;
  out.in_unit_ball = true;
  if (k == 1) {
    out.elements = qb.elements;
    return out;
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(k));
  out.elements.reserve(qb.elements.size() * static_cast<size_t>(k));
  for (const CMatrix& u : qb.elements) {
    const CMatrix v = scale * u;
    for (long copy = 0; copy < k; ++copy) out.elements.push_back(v);
  }
  return out;
}

// Largest defect of E_cd(E_ad(x)) = E_cd(x) over the source basis: zero (up
// to numerics) exactly when e_ad is compatible with e_cd.
inline double compatibility_residual(const CondExpectation& e_cd, const CondExpectation& e_ad) {
  if (e_cd.source.ambient_dim != e_ad.source.ambient_dim) {
    throw DimensionMismatch("compatibility_residual: ambient mismatch");
  }
  if (span_discrepancy(e_cd.source, e_ad.source) > 1e-8) {
    throw NotIntermediate("compatibility_residual: expectations have different sources");
  }
  detail::require_nested(e_cd.target, e_ad.target,
                         "compatibility_residual: targets are not nested");
  double worst = 0.0;
  for (const CMatrix& s : e_cd.source.basis) {
    worst = std::max(worst, op_norm(e_cd.apply(e_ad.apply(s)) - e_cd.apply(s)));
  }
  return worst;
}

// Conditional expectation onto an intermediate subalgebra a, built from a
// quasi-basis {u_i} of the restriction of e_cd to a:
//   E(x) = Lambda^{-1} sum_{i,k} u_i E_cd(u_i* x u_k) u_k*,
// Lambda the index element of the restriction.  The result is checked for
// compatibility with e_cd.
inline CondExpectation izumi_expectation(const CondExpectation& e_cd, const Subalgebra& a,
                                         const QuasiBasis& qb_ca) {
  try {
    detail::require_nested(e_cd.target, a, "izumi_expectation: target not inside the intermediate");
    detail::require_nested(a, e_cd.source, "izumi_expectation: intermediate not inside source");
  } catch (const NotNested& err) {
    throw NotIntermediate(err.what());
  }
  const auto lam =
      detail::hermitian_roots<NotInvertible>(qb_ca.index_element, 1e-12, "index element");
  const Subalgebra& src = e_cd.source;
  Eigen::MatrixXcd map(src.dim(), src.dim());
  for (Index j = 0; j < src.dim(); ++j) {
    const CMatrix& sj = src.basis[static_cast<size_t>(j)];
    CMatrix acc = CMatrix::Zero(src.ambient_dim, src.ambient_dim);
    for (const CMatrix& ui : qb_ca.elements) {
      const CMatrix left = ui.adjoint() * sj;
      for (const CMatrix& uk : qb_ca.elements) {
        acc += ui * e_cd.apply(left * uk) * uk.adjoint();
      }
    }
    map.col(j) = span_coords(src, CMatrix(lam.inv * acc));
  }
  CondExpectation out{src, a, std::move(map)};
  const double res = compatibility_residual(e_cd, out);
  if (res > 1e-8) {
    throw CompatibilityResidualExceeded(
        "intermediate expectation is not compatible: residual " + std::to_string(res));
  }
  return out;
}

// --- audits ----------------------------------------------------------------

struct ExpectationAudit {
  double onto_target{};
  double fixes_target{};
  double idempotent{};
  double unital{};
  double bimodule{};
  double positivity_min{std::numeric_limits<double>::infinity()};
  double gram_min_eig{};

  bool pass(double tol = 1e-8) const {
    return onto_target <= tol && fixes_target <= tol && idempotent <= tol && unital <= tol &&
           bimodule <= tol && positivity_min >= -1e-9 && gram_min_eig >= 1e-10;
  }
};

inline CMatrix random_span_element(const Subalgebra& a, Rng& rng) {
  CVector c(a.dim());
  for (Index k = 0; k < a.dim(); ++k) c(k) = rng.cgaussian();
  return from_coords(a, c);
}

// exp(i h) for Hermitian h; lands in any *-subalgebra containing h.
inline CMatrix unitary_exp_i(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(h));
  CVector phases(h.rows());
  for (Index k = 0; k < h.rows(); ++k) phases(k) = std::polar(1.0, es.eigenvalues()(k));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

inline CMatrix random_unitary_in(const Subalgebra& a, Rng& rng) {
  return unitary_exp_i(hermitian_part(random_span_element(a, rng)));
}

inline double min_eigenvalue(const CMatrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(hermitian));
  return es.eigenvalues()(0);
}

inline ExpectationAudit audit_expectation(const CondExpectation& e, int trials = 200,
                                          std::uint64_t seed = 0) {
  ExpectationAudit a;
  const Subalgebra& src = e.source;
  const Subalgebra& tgt = e.target;
  for (const CMatrix& s : src.basis) {
    const CMatrix es_ = e.apply(s);
    a.onto_target = std::max(a.onto_target, span_distance(tgt, es_));
    a.idempotent = std::max(a.idempotent, op_norm(e.apply(es_) - es_));
  }
  for (const CMatrix& t : tgt.basis) {
    a.fixes_target = std::max(a.fixes_target, op_norm(e.apply(t) - t));
  }
  a.unital = op_norm(e.apply(identity(src.ambient_dim)) - identity(src.ambient_dim));
  for (const CMatrix& x : tgt.basis) {
    for (const CMatrix& y : tgt.basis) {
      for (const CMatrix& s : src.basis) {
        a.bimodule = std::max(a.bimodule, op_norm(e.apply(x * s * y) - x * e.apply(s) * y));
      }
    }
  }
  Rng rng(seed);
  for (int t = 0; t < trials; ++t) {
    const CMatrix x = random_span_element(src, rng);
    a.positivity_min = std::min(a.positivity_min, min_eigenvalue(e.apply(x.adjoint() * x)));
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(expectation_gram(e)));
  a.gram_min_eig = es.eigenvalues()(0);
  return a;
}

struct PimsnerPopaAudit {
  double min_eigenvalue{std::numeric_limits<double>::infinity()};
  double index_norm{};
  int trials{};
};

// Sharp positivity audit E(x* x) >= ||Index E||^{-1} x* x on random span
// elements; reports the most negative eigenvalue seen.
inline PimsnerPopaAudit pimsner_popa_audit(const CondExpectation& e, int trials,
                                           std::uint64_t seed) {
  PimsnerPopaAudit out;
  out.trials = trials;
  out.index_norm = op_norm(quasi_basis(e).index_element);
  Rng rng(seed);
  for (int t = 0; t < trials; ++t) {
    const CMatrix x = random_span_element(e.source, rng);
    const CMatrix xx = x.adjoint() * x;
    out.min_eigenvalue =
        std::min(out.min_eigenvalue, min_eigenvalue(e.apply(xx) - xx / out.index_norm));
  }
  return out;
}

// Agreement of two compatible expectations onto the same intermediate target:
// by uniqueness they must coincide.  Throws unless both really are compatible.
inline double uniqueness_check(const CondExpectation& e_cd, const CondExpectation& e1,
                               const CondExpectation& e2) {
  if (span_discrepancy(e1.target, e2.target) > 1e-8) {
    throw PreconditionFailed("uniqueness_check: targets have different spans");
  }
  const double r1 = compatibility_residual(e_cd, e1);
  const double r2 = compatibility_residual(e_cd, e2);
  if (r1 > 1e-8 || r2 > 1e-8) {
    throw PreconditionFailed("uniqueness_check: compatibility residuals " + std::to_string(r1) +
                             ", " + std::to_string(r2));
  }
  double worst = 0.0;
  for (const CMatrix& s : e_cd.source.basis) {
    worst = std::max(worst, op_norm(e1.apply(s) - e2.apply(s)));
  }
  return worst;
}

}  // namespace cstar
