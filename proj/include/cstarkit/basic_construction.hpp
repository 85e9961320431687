#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cstarkit/expectation.hpp"
#include "cstarkit/matrix.hpp"
#include "cstarkit/subalgebra.hpp"

namespace cstar {

// The source algebra D of a faithful expectation E: D -> C, viewed as a
// Hilbert space under <x, y> = tau(E(x* y)) (tau the normalized ambient
// trace), together with an orthonormal coordinate system for it.  Left
// multiplication and the Jones projections of compatible intermediate
// expectations act here as concrete matrices.
struct LocalizedModule {
  Subalgebra ambient;        // D
  CondExpectation base;      // E: D -> C
  Eigen::MatrixXcd gram;     // tau(E(s_j* s_k)) over the stored basis of D
  Eigen::MatrixXcd gram_half, gram_half_inv;
  std::vector<CMatrix> onb;  // module-orthonormal basis, as ambient matrices
  std::uint64_t content_hash{};

  Index mdim() const { return gram.rows(); }

  // Module coordinates of an ambient element.
  CVector eta(const CMatrix& x) const { return gram_half * span_coords(ambient, x); }

  CMatrix from_eta(const CVector& v) const {
    return from_coords(ambient, gram_half_inv * v);
  }
};

using ModulePtr = std::shared_ptr<const LocalizedModule>;

struct ModuleOperator {
  ModulePtr module;
  Eigen::MatrixXcd mat;  // mdim x mdim, in the module's orthonormal coordinates
};

namespace detail {

inline std::uint64_t fnv1a(const unsigned char* data, size_t len, std::uint64_t h) {
  for (size_t i = 0; i < len; ++i) {
    h ^= data[i];
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t hash_matrix(const Eigen::MatrixXcd& m, std::uint64_t h) {
  return fnv1a(reinterpret_cast<const unsigned char*>(m.data()),
               sizeof(Complex) * static_cast<size_t>(m.size()), h);
}

inline void require_same_module(const ModuleOperator& x, const ModuleOperator& y) {
  if (!x.module || !y.module || x.module->content_hash != y.module->content_hash) {
    throw PreconditionFailed("module operators live on different modules");
  }
}

}  // namespace detail

inline ModuleOperator module_op(ModulePtr mod, Eigen::MatrixXcd m) {
  if (m.rows() != mod->mdim() || m.cols() != mod->mdim()) {
    throw DimensionMismatch("module operator has wrong size");
  }
  return ModuleOperator{std::move(mod), std::move(m)};
}

inline double module_op_norm(const ModuleOperator& x) { return op_norm(x.mat); }

inline ModuleOperator module_identity(ModulePtr mod) {
  const Index m = mod->mdim();
  return ModuleOperator{std::move(mod), Eigen::MatrixXcd::Identity(m, m)};
}

inline ModuleOperator operator*(const ModuleOperator& x, const ModuleOperator& y) {
  detail::require_same_module(x, y);
  return ModuleOperator{x.module, x.mat * y.mat};
}

inline ModuleOperator operator+(const ModuleOperator& x, const ModuleOperator& y) {
  detail::require_same_module(x, y);
  return ModuleOperator{x.module, x.mat + y.mat};
}

inline ModuleOperator operator-(const ModuleOperator& x, const ModuleOperator& y) {
  detail::require_same_module(x, y);
  return ModuleOperator{x.module, x.mat - y.mat};
}

inline ModuleOperator adjoint(const ModuleOperator& x) {
  return ModuleOperator{x.module, x.mat.adjoint()};
}

// Localize the source of a faithful expectation at the normalized trace.
inline ModulePtr localize(const CondExpectation& e) {
  auto mod = std::make_shared<LocalizedModule>();
  mod->ambient = e.source;
  mod->base = e;
  mod->gram = expectation_gram(e);
  const auto roots =
      detail::hermitian_roots<DegenerateForm>(mod->gram, 1e-10, "localized sesquilinear form");
  mod->gram_half = roots.half;
  mod->gram_half_inv = roots.half_inv;
  mod->onb.reserve(static_cast<size_t>(mod->mdim()));
  for (Index k = 0; k < mod->mdim(); ++k) {
    mod->onb.push_back(from_coords(e.source, mod->gram_half_inv.col(k)));
  }
  std::uint64_t h = 1469598103934665603ULL;
  h = detail::hash_matrix(mod->gram, h);
  for (const CMatrix& b : e.source.basis) h = detail::hash_matrix(b, h);
  for (const CMatrix& b : e.target.basis) h = detail::hash_matrix(b, h);
  h = detail::hash_matrix(e.map, h);
  mod->content_hash = h;
  return mod;
}

// Left multiplication by an ambient element, as a module operator.
inline ModuleOperator lambda_op(const ModulePtr& mod, const CMatrix& b) {
  if (b.rows() != mod->ambient.ambient_dim || b.cols() != mod->ambient.ambient_dim) {
    throw DimensionMismatch("lambda_op: ambient mismatch");
  }
  if (span_distance(mod->ambient, b) > 1e-8 * std::max(1.0, hs_norm(b))) {
    throw NotInAlgebra("lambda_op: element is not in the ambient algebra");
  }
  Eigen::MatrixXcd m(mod->mdim(), mod->mdim());
  for (Index k = 0; k < mod->mdim(); ++k) {
    m.col(k) = mod->eta(b * mod->onb[static_cast<size_t>(k)]);
  }
  return ModuleOperator{mod, std::move(m)};
}

// Jones projection of a compatible intermediate expectation e_ad: the module
// operator sending eta(x) to eta(E_ad(x)); an orthogonal projection exactly
// because e_ad is compatible with the base expectation.
inline ModuleOperator jones_projection(const ModulePtr& mod, const CondExpectation& e_ad) {
  const double res = compatibility_residual(mod->base, e_ad);
  if (res > 1e-8) {
    throw CompatibilityRequired("jones_projection: compatibility residual " +
                                std::to_string(res));
  }
  Eigen::MatrixXcd m(mod->mdim(), mod->mdim());
  for (Index k = 0; k < mod->mdim(); ++k) {
    m.col(k) = mod->eta(e_ad.apply(mod->onb[static_cast<size_t>(k)]));
  }
  return ModuleOperator{mod, std::move(m)};
}

// C*-algebra generated by { lambda(x_i) e_C lambda(x_j) } over a basis of D,
// where e_C is the Jones projection of the base expectation.  As a subalgebra
// of the module-operator matrix algebra.
inline Subalgebra basic_construction_algebra(const ModulePtr& mod) {
  const ModuleOperator e_c = jones_projection(mod, mod->base);
  std::vector<ModuleOperator> lambdas;
  lambdas.reserve(mod->ambient.basis.size());
  for (const CMatrix& x : mod->ambient.basis) lambdas.push_back(lambda_op(mod, x));
  std::vector<CMatrix> gens;
  gens.reserve(lambdas.size() * lambdas.size());
  for (const ModuleOperator& lx : lambdas) {
    for (const ModuleOperator& ly : lambdas) {
      gens.push_back(lx.mat * e_c.mat * ly.mat);
    }
  }
  return generate(mod->mdim(), gens);
}

// The expectation from the basic construction back onto lambda(D), determined
// by E(lambda(x) e_C lambda(y)) = lambda(Index^{-1} x y) and extended by
// linearity; least squares certifies well-definedness on the spanning family.
inline CondExpectation dual_expectation(const ModulePtr& mod, const QuasiBasis& qb_base) {
  const auto lam =
      detail::hermitian_roots<NotInvertible>(qb_base.index_element, 1e-12, "index element");
  const ModuleOperator e_c = jones_projection(mod, mod->base);
  const Index ds = mod->ambient.dim();
  const Index m = mod->mdim();
  std::vector<Eigen::MatrixXcd> lambda_mats;
  lambda_mats.reserve(static_cast<size_t>(ds));
  for (const CMatrix& x : mod->ambient.basis) lambda_mats.push_back(lambda_op(mod, x).mat);
  // Spanning family and its prescribed images.
  Eigen::MatrixXcd in(m * m, ds * ds), out(m * m, ds * ds);
  Index col = 0;
  for (Index i = 0; i < ds; ++i) {
    for (Index j = 0; j < ds; ++j, ++col) {
      in.col(col) = vec(CMatrix(lambda_mats[static_cast<size_t>(i)] * e_c.mat *
                                lambda_mats[static_cast<size_t>(j)]));
      const CMatrix prod = CMatrix(lam.inv) * mod->ambient.basis[static_cast<size_t>(i)] *
                           mod->ambient.basis[static_cast<size_t>(j)];
      out.col(col) = vec(lambda_op(mod, prod).mat);
    }
  }
  const auto pinv_times = [&](const auto& svd) {
    const RVector sv = svd.singularValues();
    const double cut = 1e-10 * std::max(1.0, sv.size() ? sv(0) : 0.0);
    CVector inv_sv = CVector::Zero(sv.size());
    for (Index k = 0; k < sv.size(); ++k) {
      if (sv(k) > cut) inv_sv(k) = 1.0 / sv(k);
    }
    return Eigen::MatrixXcd(out * svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().adjoint());
  };
  Eigen::MatrixXcd l;  // minimal-norm map with L * in = out
  if (std::min(in.rows(), in.cols()) > 64) {
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(in, Eigen::ComputeThinU | Eigen::ComputeThinV);
    l = pinv_times(svd);
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(in, Eigen::ComputeThinU | Eigen::ComputeThinV);
    l = pinv_times(svd);
  }
  double scale = 1.0, resid = 0.0;
  for (Index c = 0; c < in.cols(); ++c) {
    scale = std::max(scale, out.col(c).norm());
    resid = std::max(resid, (l * in.col(c) - out.col(c)).norm());
  }
  if (resid > 1e-8 * scale) {
    throw IllDefined("dual expectation is not well defined on the spanning family: residual " +
                     std::to_string(resid));
  }
  // Package as an expectation from the basic construction onto lambda(D).
  const Subalgebra bc = basic_construction_algebra(mod);
  Subalgebra lambda_d{m, detail::orthonormalize(m, lambda_mats)};
  Eigen::MatrixXcd map(bc.dim(), bc.dim());
  for (Index k = 0; k < bc.dim(); ++k) {
    const CMatrix img = unvec(l * vec(bc.basis[static_cast<size_t>(k)]), m, m);
    map.col(k) = span_coords(bc, img);
  }
  return CondExpectation{bc, lambda_d, std::move(map)};
}

}  // namespace cstar
