#pragma once

#include <string>
#include <vector>

#include "cstarkit/matrix.hpp"

namespace cstar {

// A unital *-subalgebra of M_n, stored as a Hilbert-Schmidt-orthonormal basis
// of its linear span: Tr(b_i* b_j) = delta_ij.
struct Subalgebra {
  Index ambient_dim{0};
  std::vector<CMatrix> basis;

  Index dim() const { return static_cast<Index>(basis.size()); }
};

namespace detail {

// Rank-revealing orthonormalization of a family of n x n matrices (as vectors
// in C^{n^2}) with a singular-value cutoff.  Inputs are normalized first so
// the cutoff acts on direction, not scale.
inline std::vector<CMatrix> orthonormalize(Index n, const std::vector<CMatrix>& fam,
                                           double cutoff = 1e-10) {
  std::vector<CVector> cols;
  cols.reserve(fam.size());
  for (const CMatrix& m : fam) {
    if (m.rows() != n || m.cols() != n) throw DimensionMismatch("orthonormalize: ambient mismatch");
    const double norm = hs_norm(m);
    if (norm <= 1e-14) continue;
    cols.push_back(vec(m) / norm);
  }
  if (cols.empty()) return {};
  CMatrix stack(n * n, static_cast<Index>(cols.size()));
  for (Index j = 0; j < stack.cols(); ++j) stack.col(j) = cols[static_cast<size_t>(j)];
  std::vector<CMatrix> out;
  const auto harvest = [&](const CMatrix& u, const RVector& sv) {
    const double thresh = cutoff * std::max(1.0, sv.size() ? sv(0) : 0.0);
    for (Index k = 0; k < sv.size(); ++k) {
      if (sv(k) > thresh) out.push_back(unvec(u.col(k), n, n));
    }
  };
  if (std::min(stack.rows(), stack.cols()) > 64) {
    Eigen::BDCSVD<CMatrix> svd(stack, Eigen::ComputeThinU);
    harvest(svd.matrixU(), svd.singularValues());
  } else {
    Eigen::JacobiSVD<CMatrix> svd(stack, Eigen::ComputeThinU);
    harvest(svd.matrixU(), svd.singularValues());
  }
  return out;
}

}  // namespace detail

inline CVector span_coords(const Subalgebra& a, const CMatrix& m) {
  if (m.rows() != a.ambient_dim || m.cols() != a.ambient_dim) {
    throw DimensionMismatch("span_coords: ambient mismatch");
  }
  CVector c(a.dim());
  for (Index k = 0; k < a.dim(); ++k) c(k) = hs_inner(a.basis[static_cast<size_t>(k)], m);
  return c;
}

inline CMatrix from_coords(const Subalgebra& a, const CVector& c) {
  if (c.size() != a.dim()) throw DimensionMismatch("from_coords: coordinate size mismatch");
  CMatrix m = CMatrix::Zero(a.ambient_dim, a.ambient_dim);
  for (Index k = 0; k < a.dim(); ++k) m += c(k) * a.basis[static_cast<size_t>(k)];
  return m;
}

inline CMatrix hs_project(const Subalgebra& a, const CMatrix& m) {
  return from_coords(a, span_coords(a, m));
}

// Hilbert-Schmidt distance from m to the linear span of a.
inline double span_distance(const Subalgebra& a, const CMatrix& m) {
  return hs_norm(m - hs_project(a, m));
}

inline bool contains(const Subalgebra& a, const CMatrix& m, double tol = 1e-9) {
  return span_distance(a, m) <= tol;
}

// Smallest unital *-subalgebra of M_n containing the generators: adjoints and
// pairwise products are adjoined and re-orthonormalized until the dimension
// stabilizes.
inline Subalgebra generate(Index n, const std::vector<CMatrix>& generators) {
  std::vector<CMatrix> seed = generators;
  seed.push_back(identity(n));
  std::vector<CMatrix> basis = detail::orthonormalize(n, seed);
  const Index full = n * n;
  for (Index round = 0; round <= full; ++round) {
    if (static_cast<Index>(basis.size()) == full) break;  // whole of M_n, closed
    std::vector<CMatrix> cand = basis;
    for (const CMatrix& b : basis) cand.push_back(b.adjoint());
    for (const CMatrix& x : basis) {
      for (const CMatrix& y : basis) cand.push_back(x * y);
    }
    std::vector<CMatrix> next = detail::orthonormalize(n, cand);
    const bool stable = next.size() == basis.size();
    basis = std::move(next);
    if (stable) break;
  }
  return Subalgebra{n, std::move(basis)};
}

inline Subalgebra generated_by(const Subalgebra& a, const Subalgebra& b) {
  if (a.ambient_dim != b.ambient_dim) throw DimensionMismatch("generated_by: ambient mismatch");
  std::vector<CMatrix> gens = a.basis;
  gens.insert(gens.end(), b.basis.begin(), b.basis.end());
  return generate(a.ambient_dim, gens);
}

// Relative commutant c' intersect d: all x in span(d) commuting with span(c).
inline Subalgebra relative_commutant(const Subalgebra& c, const Subalgebra& d) {
  if (c.ambient_dim != d.ambient_dim) {
    throw DimensionMismatch("relative_commutant: ambient mismatch");
  }
  for (const CMatrix& g : c.basis) {
    if (!contains(d, g, 1e-8)) {
      throw NotNested("relative_commutant: first algebra is not contained in the second");
    }
  }
  const Index n = d.ambient_dim;
  const Index nd = d.dim();
  CMatrix stacked(n * n * c.dim(), nd);
  for (Index i = 0; i < c.dim(); ++i) {
    const CMatrix& g = c.basis[static_cast<size_t>(i)];
    for (Index j = 0; j < nd; ++j) {
      stacked.block(i * n * n, j, n * n, 1) = vec(commutator(d.basis[static_cast<size_t>(j)], g));
    }
  }
  Eigen::JacobiSVD<CMatrix> svd(stacked, Eigen::ComputeFullV);
  const RVector sv = svd.singularValues();
  const double thresh = 1e-10 * std::max(1.0, sv.size() ? sv(0) : 0.0);
  std::vector<CMatrix> basis;
  for (Index k = 0; k < nd; ++k) {
    const double s = k < sv.size() ? sv(k) : 0.0;
    if (s <= thresh) basis.push_back(from_coords(d, svd.matrixV().col(k)));
  }
  return Subalgebra{n, std::move(basis)};
}

inline Subalgebra center(const Subalgebra& a) { return relative_commutant(a, a); }

inline bool is_simple(const Subalgebra& a) { return center(a).dim() == 1; }

// Hausdorff-style span discrepancy: largest HS distance from a basis element
// of either algebra to the span of the other.
inline double span_discrepancy(const Subalgebra& a, const Subalgebra& b) {
  double worst = 0.0;
  for (const CMatrix& m : a.basis) worst = std::max(worst, span_distance(b, m));
  for (const CMatrix& m : b.basis) worst = std::max(worst, span_distance(a, m));
  return worst;
}

// --- constructions used throughout the catalog -----------------------------

inline Subalgebra scalar_algebra(Index n) {
  return Subalgebra{n, {identity(n) / std::sqrt(static_cast<double>(n))}};
}

inline Subalgebra diagonal_algebra(Index n) {
  std::vector<CMatrix> basis;
  for (Index k = 0; k < n; ++k) {
    CMatrix e = CMatrix::Zero(n, n);
    e(k, k) = 1.0;
    basis.push_back(std::move(e));
  }
  return Subalgebra{n, std::move(basis)};
}

inline Subalgebra full_algebra(Index n) {
  std::vector<CMatrix> basis;
  basis.reserve(static_cast<size_t>(n * n));
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      CMatrix e = CMatrix::Zero(n, n);
      e(i, j) = 1.0;
      basis.push_back(std::move(e));
    }
  }
  return Subalgebra{n, std::move(basis)};
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// M_k tensor 1_m inside M_{km}, with an HS-orthonormal basis.
inline Subalgebra left_tensor_factor(Index k, Index m) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  std::vector<CMatrix> basis;
  const Subalgebra fk = full_algebra(k);
  basis.reserve(fk.basis.size());
  for (const CMatrix& e : fk.basis) basis.push_back(scale * kron(e, identity(m)));
  return Subalgebra{k * m, std::move(basis)};
}

// 1_k tensor M_m inside M_{km}.
inline Subalgebra right_tensor_factor(Index k, Index m) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(k));
  std::vector<CMatrix> basis;
  const Subalgebra fm = full_algebra(m);
  basis.reserve(fm.basis.size());
  for (const CMatrix& e : fm.basis) basis.push_back(scale * kron(identity(k), e));
  return Subalgebra{k * m, std::move(basis)};
}

inline Subalgebra conjugated(const Subalgebra& a, const CMatrix& u) {
  if (u.rows() != a.ambient_dim || u.cols() != a.ambient_dim) {
    throw DimensionMismatch("conjugated: ambient mismatch");
  }
  std::vector<CMatrix> basis;
  basis.reserve(a.basis.size());
  const CMatrix uh = u.adjoint();
  for (const CMatrix& b : a.basis) basis.push_back(u * b * uh);
  return Subalgebra{a.ambient_dim, std::move(basis)};
}

}  // namespace cstar
