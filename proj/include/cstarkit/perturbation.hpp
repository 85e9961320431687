#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "cstarkit/basic_construction.hpp"
#include "cstarkit/expectation.hpp"
#include "cstarkit/matrix.hpp"
#include "cstarkit/subalgebra.hpp"

namespace cstar {

struct BoundCheck {
  std::string name;
  double lhs{};
  double rhs{};

  double slack() const { return rhs - lhs; }
  bool holds(double tol = 0.0) const { return lhs <= rhs + tol; }
};

// Linear map between subalgebras of the same ambient matrix algebra, stored
// as domain-HS-coordinates -> vectorized ambient matrix.  Residuals record
// how far it is from a unital *-homomorphism fixing the distinguished small
// algebra.
struct HomomorphismMap {
  Subalgebra domain;
  Subalgebra codomain;
  Eigen::MatrixXcd map;  // n^2 x dim(domain)
  double mult_residual{};
  double unital_residual{};
  double fixes_c_residual{};

  CMatrix apply(const CMatrix& x) const {
    return unvec(map * span_coords(domain, x), domain.ambient_dim, domain.ambient_dim);
  }
};

inline HomomorphismMap make_hom(const Subalgebra& domain, const Subalgebra& codomain,
                                const std::vector<CMatrix>& images, const Subalgebra& c) {
  if (images.size() != static_cast<size_t>(domain.dim())) {
    throw DimensionMismatch("make_hom: one image per domain basis element required");
  }
  const Index n = domain.ambient_dim;
  if (codomain.ambient_dim != n || c.ambient_dim != n) {
    throw DimensionMismatch("make_hom: ambient mismatch");
  }
  HomomorphismMap h;
  h.domain = domain;
  h.codomain = codomain;
  h.map.resize(n * n, domain.dim());
  for (Index j = 0; j < domain.dim(); ++j) h.map.col(j) = vec(images[static_cast<size_t>(j)]);
  for (Index i = 0; i < domain.dim(); ++i) {
    for (Index j = 0; j < domain.dim(); ++j) {
      const CMatrix prod = domain.basis[static_cast<size_t>(i)] * domain.basis[static_cast<size_t>(j)];
      h.mult_residual =
          std::max(h.mult_residual, op_norm(h.apply(prod) - images[static_cast<size_t>(i)] *
                                                                images[static_cast<size_t>(j)]));
    }
  }
  h.unital_residual = op_norm(h.apply(identity(n)) - identity(n));
  for (const CMatrix& g : c.basis) {
    h.fixes_c_residual = std::max(h.fixes_c_residual, op_norm(h.apply(g) - g));
  }
  return h;
}

inline HomomorphismMap identity_hom(const Subalgebra& a, const Subalgebra& c) {
  return make_hom(a, a, a.basis, c);
}

// Certified upper bound for the operator norm of f - g as a map between
// operator-norm unit balls: the HS-coordinate operator norm picks up at most
// sqrt(n) against the ambient operator norm.
inline double hom_distance_upper(const HomomorphismMap& f, const HomomorphismMap& g) {
  if (f.domain.ambient_dim != g.domain.ambient_dim || f.domain.dim() != g.domain.dim()) {
    throw DimensionMismatch("hom_distance_upper: domains differ");
  }
  return std::sqrt(static_cast<double>(f.domain.ambient_dim)) * op_norm(f.map - g.map);
}

// Sampled lower estimate of the same distance (max over random unitaries of
// the domain).
inline double hom_distance_sampled(const HomomorphismMap& f, const HomomorphismMap& g,
                                   int samples, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int t = 0; t < samples; ++t) {
    const CMatrix u = random_unitary_in(f.domain, rng);
    worst = std::max(worst, op_norm(f.apply(u) - g.apply(u)));
  }
  return worst;
}

struct MultiplicativityDefect {
  double max_defect{};       // max ||phi(xy) - phi(x)phi(y)|| over sampled contractions
  double diff_norm_upper{};  // certified ||phi - psi||
  double max_violation{};    // max of defect - 3 ||phi-psi|| ||x|| ||y||
  int samples{};
};

// Audit: a map at distance r from a *-homomorphism is 3r-multiplicative on
// contractions.
inline MultiplicativityDefect multiplicativity_defect(const HomomorphismMap& phi,
                                                      const HomomorphismMap& psi, int samples,
                                                      std::uint64_t seed) {
  MultiplicativityDefect out;
  out.samples = samples;
  out.diff_norm_upper = hom_distance_upper(phi, psi);
  out.max_violation = -std::numeric_limits<double>::infinity();
  Rng rng(seed);
  for (int t = 0; t < samples; ++t) {
    CMatrix x, y;
    if (t % 2 == 0) {
      x = random_unitary_in(phi.domain, rng);
      y = random_unitary_in(phi.domain, rng);
    } else {
      x = random_span_element(phi.domain, rng);
      x /= std::max(1e-300, op_norm(x));
      y = random_span_element(phi.domain, rng);
      y /= std::max(1e-300, op_norm(y));
    }
    const double defect = op_norm(phi.apply(x * y) - phi.apply(x) * phi.apply(y));
    out.max_defect = std::max(out.max_defect, defect);
    out.max_violation = std::max(out.max_violation, defect - 3.0 * out.diff_norm_upper);
  }
  return out;
}

struct InclusionDefect {
  BoundCheck near_identity;        // max ||E_B(x) - x|| on A_1  vs  2 d_upper
  BoundCheck near_multiplicative;  // max ||E_B(xy) - E_B(x)E_B(y)||  vs  6 d_upper
  int samples{};
};

// Audit: the expectation onto a nearby subalgebra restricts to A almost as
// the identity and is almost multiplicative there.
inline InclusionDefect expectation_vs_inclusion(const CondExpectation& e_bd, const Subalgebra& a,
                                                double d_upper, int samples, std::uint64_t seed) {
  InclusionDefect out;
  out.samples = samples;
  out.near_identity = BoundCheck{"expectation_near_identity_on_a", 0.0, 2.0 * d_upper};
  out.near_multiplicative = BoundCheck{"expectation_near_multiplicative_on_a", 0.0, 6.0 * d_upper};
  Rng rng(seed);
  std::vector<CMatrix> pool;
  for (const CMatrix& b : a.basis) pool.push_back(b / std::max(1e-300, op_norm(b)));
  for (int t = 0; t < samples; ++t) {
    if (t % 2 == 0) {
      pool.push_back(random_unitary_in(a, rng));
    } else {
      CMatrix x = random_span_element(a, rng);
      pool.push_back(x / std::max(1e-300, op_norm(x)));
    }
  }
  for (const CMatrix& x : pool) {
    out.near_identity.lhs = std::max(out.near_identity.lhs, op_norm(e_bd.apply(x) - x));
  }
  for (size_t t = 0; t + 1 < pool.size(); t += 2) {
    const CMatrix& x = pool[t];
    const CMatrix& y = pool[t + 1];
    out.near_multiplicative.lhs =
        std::max(out.near_multiplicative.lhs,
                 op_norm(e_bd.apply(x * y) - e_bd.apply(x) * e_bd.apply(y)));
  }
  return out;
}

struct DistanceEstimate {
  double lower{};
  double upper{};
  double jones_bound{};  // ||Index E_C^D|| * ||e_A - e_B||
  double jones_gap{};    // ||e_A - e_B||
  double sweep_bound{};  // symmetric expectation sweep over sampled unit balls
  std::string method_notes;
};

// Certified estimate of the unit-ball Hausdorff distance between two
// intermediate subalgebras with compatible expectations.
inline DistanceEstimate distance_estimate(const Subalgebra& a, const Subalgebra& b,
                                          const ModulePtr& mod, const CondExpectation& e_ad,
                                          const CondExpectation& e_bd, int samples,
                                          std::uint64_t seed) {
  DistanceEstimate est;
  const double index_norm = op_norm(quasi_basis(mod->base).index_element);
  const ModuleOperator e_a = jones_projection(mod, e_ad);
  const ModuleOperator e_b = jones_projection(mod, e_bd);
  est.jones_gap = op_norm(e_a.mat - e_b.mat);
  est.jones_bound = index_norm * est.jones_gap;
  const double root_n = std::sqrt(static_cast<double>(a.ambient_dim));
  Rng rng(seed);
  const auto one_sided = [&](const Subalgebra& from, const Subalgebra& to,
                             const CondExpectation& e_to) {
    double sweep = 0.0;
    std::vector<CMatrix> pool;
    for (const CMatrix& g : from.basis) pool.push_back(g / std::max(1e-300, op_norm(g)));
    for (int t = 0; t < samples; ++t) {
      if (t % 2 == 0) {
        pool.push_back(random_unitary_in(from, rng));
      } else {
        CMatrix x = random_span_element(from, rng);
        pool.push_back(x / std::max(1e-300, op_norm(x)));
      }
    }
    for (const CMatrix& x : pool) {
      CMatrix y = e_to.apply(x);
      const double ny = op_norm(y);
      if (ny > 1.0) y /= ny;  // keep the candidate in the unit ball
      sweep = std::max(sweep, op_norm(x - y));
      est.lower = std::max(est.lower, span_distance(to, x) / root_n);
    }
    return sweep;
  };
  const double ab = one_sided(a, b, e_bd);
  const double ba = one_sided(b, a, e_ad);
  est.sweep_bound = std::max(ab, ba);
  est.upper = std::min(est.jones_bound, est.sweep_bound);
  est.method_notes =
      "upper = min(index norm x Jones-projection gap, symmetric expectation sweep over sampled "
      "unit balls); lower = max HS span residual / sqrt(n) over the same samples";
  return est;
}

struct CloseHomResult {
  HomomorphismMap psi;
  double delta{};               // ||sym(t) - e_B||, must be < 1/2
  double readback_residual{};   // worst HS distance of a read-back image from span(B)
  QuasiBasis target_unit_qb;    // {E_A(u_i)}: unit-ball quasi-basis for the restriction to A
};

// From a unit-ball quasi-basis {u_i} of the base expectation and compatible
// expectations onto A and B, build a unital *-homomorphism psi: A -> B fixing
// C: compress lambda(A) by a unitary that carries the Jones projection of B
// onto the spectral window of t = sum_i lambda(Lambda^{-1} v_i) e_B
// lambda(v_i*), v_i = E_A(u_i).
inline CloseHomResult close_homomorphism(const ModulePtr& mod, const Subalgebra& a,
                                         const Subalgebra& b, const CondExpectation& e_ad,
                                         const CondExpectation& e_bd,
                                         const QuasiBasis& qb_unit) {
  if (!qb_unit.in_unit_ball) {
    throw PreconditionFailed("close_homomorphism: quasi-basis must be unit-ball rescaled");
  }
  const Index n = mod->ambient.ambient_dim;
  std::vector<CMatrix> v;
  v.reserve(qb_unit.elements.size());
  CMatrix lambda_a = CMatrix::Zero(n, n);
  for (const CMatrix& u : qb_unit.elements) {
    CMatrix vi = e_ad.apply(u);
    lambda_a += vi * vi.adjoint();
    v.push_back(std::move(vi));
  }
  lambda_a = hermitian_part(lambda_a);
  const auto lam = detail::hermitian_roots<NotInvertible>(lambda_a, 1e-12, "index element");
  const ModuleOperator e_b = jones_projection(mod, e_bd);
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(mod->mdim(), mod->mdim());
  for (const CMatrix& vi : v) {
    const Eigen::MatrixXcd left = lambda_op(mod, CMatrix(lam.inv * vi)).mat;
    const Eigen::MatrixXcd right = lambda_op(mod, vi).mat.adjoint();
    t.noalias() += left * e_b.mat * right;
  }
  CloseHomResult out;
  const Eigen::MatrixXcd t_sym = hermitian_part(t);
  out.delta = op_norm(t_sym - e_b.mat);
  if (!(out.delta < 0.5)) {
    throw TooFar("close_homomorphism: spectral splitting delta = " + std::to_string(out.delta) +
                 " >= 1/2");
  }
  const CMatrix q = spectral_window_projection(t_sym, 1.0 - out.delta, 1.0 + out.delta);
  const CMatrix w = projection_intertwiner(e_b.mat, q);
  const CVector eta_one = mod->eta(identity(n));
  std::vector<CMatrix> images;
  images.reserve(a.basis.size());
  for (const CMatrix& x : a.basis) {
    const Eigen::MatrixXcd psi_prime =
        e_b.mat * w.adjoint() * lambda_op(mod, x).mat * w * e_b.mat;
    const CMatrix raw = mod->from_eta(psi_prime * eta_one);
    out.readback_residual = std::max(out.readback_residual, span_distance(b, raw));
    images.push_back(hs_project(b, raw));
  }
  if (out.readback_residual > 1e-7) {
    throw ReadbackFailed("close_homomorphism: image leaves the target span by " +
                         std::to_string(out.readback_residual));
  }
  out.psi = make_hom(a, b, images, mod->base.target);
  out.target_unit_qb.elements = std::move(v);
  out.target_unit_qb.index_element = lambda_a;
  out.target_unit_qb.in_unit_ball = true;
  return out;
}

struct IntertwinerResult {
  CMatrix u;
  double s_dist{};            // ||s - 1||
  double diff_norm_upper{};   // certified ||phi1 - phi2||
};

// Averaging unitary: s = sum_i phi1(Lambda^{-1} v_i) phi2(v_i*) intertwines
// phi1 and phi2; its polar factor conjugates phi2 onto phi1 and commutes with
// everything both maps fix.
inline IntertwinerResult intertwining_unitary(const HomomorphismMap& phi1,
                                              const HomomorphismMap& phi2,
                                              const QuasiBasis& qb_a) {
  if (phi1.fixes_c_residual > 1e-8 || phi2.fixes_c_residual > 1e-8) {
    throw PreconditionFailed("intertwining_unitary: maps do not fix the small algebra");
  }
  const auto lam =
      detail::hermitian_roots<NotInvertible>(qb_a.index_element, 1e-12, "index element");
  const Index n = phi1.domain.ambient_dim;
  CMatrix s = CMatrix::Zero(n, n);
  for (const CMatrix& vi : qb_a.elements) {
    s += phi1.apply(CMatrix(lam.inv * vi)) * phi2.apply(CMatrix(vi.adjoint()));
  }
  IntertwinerResult out;
  out.diff_norm_upper = hom_distance_upper(phi1, phi2);
  out.s_dist = op_norm(s - identity(n));
  if (!(out.s_dist < 1.0)) {
    throw TooFar("intertwining_unitary: ||s - 1|| = " + std::to_string(out.s_dist) + " >= 1");
  }
  out.u = polar_unitary(s);
  return out;
}

inline double gamma_threshold(Index n_basis) {
  if (n_basis < 1) throw PreconditionFailed("gamma_threshold: basis size must be >= 1");
  const double t = 10.0 * static_cast<double>(n_basis);
  return 1.0 / (t * t * t * t);
}

struct PerturbOptions {
  int samples{64};
  std::uint64_t seed{0};
  double tol{1e-9};
};

struct StageTime {
  std::string stage;
  double ms{};
};

struct PerturbationReport {
  bool success{false};
  std::string scenario;
  double planted_eps{-1.0};
  CMatrix unitary;
  DistanceEstimate distance;
  int n_quasi_basis{};
  double gamma{};
  bool d_upper_below_gamma{};
  double delta{};
  double conjugation_residual{};
  double u_commutes_with_c_residual{};
  double u_in_generated_residual{};
  double psi_mult_residual{};
  double psi_unital_residual{};
  double psi_fixes_c_residual{};
  std::vector<BoundCheck> bounds;
  std::vector<StageTime> timings;
  std::uint64_t seed{};
};

// Full pipeline: compatible expectations onto A and B, certified distance,
// the near-inclusion homomorphism psi: A -> B, and a unitary u with
// u A u* = B, u in C*(A, B), u commuting with C.  Every quantitative step
// lands in the bounds table.
inline PerturbationReport perturb(const CondExpectation& e_cd, const Subalgebra& a,
                                  const Subalgebra& b, const PerturbOptions& opts = {}) {
  using clock = std::chrono::steady_clock;
  PerturbationReport rep;
  rep.seed = opts.seed;
  auto mark = clock::now();
  const auto lap = [&](const std::string& stage) {
    const auto now = clock::now();
    rep.timings.push_back(
        {stage, std::chrono::duration<double, std::milli>(now - mark).count()});
    mark = now;
  };

  // 1: compatible expectations onto both intermediates.
  CondExpectation e_ad, e_bd;
  try {
    e_ad = izumi_expectation(e_cd, a, quasi_basis(restriction(e_cd, a)));
    e_bd = izumi_expectation(e_cd, b, quasi_basis(restriction(e_cd, b)));
  } catch (const Error& err) {
    throw CompatibilityRequired(std::string("perturb: building compatible expectations failed: ") +
                                err.what());
  }
  lap("intermediate_expectations");

  // 2: unit-ball quasi-basis of the base expectation.
  const QuasiBasis qb_unit = unit_ball_rescale(quasi_basis(e_cd));
  rep.n_quasi_basis = static_cast<int>(qb_unit.elements.size());
  rep.gamma = gamma_threshold(rep.n_quasi_basis);
  lap("base_quasi_basis");

  // 3: localized module and certified distance.
  const ModulePtr mod = localize(e_cd);
  rep.distance = distance_estimate(a, b, mod, e_ad, e_bd, opts.samples, opts.seed);
  rep.d_upper_below_gamma = rep.distance.upper < rep.gamma;
  lap("distance_estimate");

  // 4: the near-inclusion homomorphism.
  CloseHomResult ch;
  try {
    ch = close_homomorphism(mod, a, b, e_ad, e_bd, qb_unit);
  } catch (const TooFar& err) {
    throw TooFar(std::string("perturb[close_homomorphism]: ") + err.what() +
                 "; d_upper = " + std::to_string(rep.distance.upper));
  }
  rep.delta = ch.delta;
  rep.psi_mult_residual = ch.psi.mult_residual;
  rep.psi_unital_residual = ch.psi.unital_residual;
  rep.psi_fixes_c_residual = ch.psi.fixes_c_residual;
  lap("close_homomorphism");

  // 5: intertwining unitary against the identity inclusion of A.
  const HomomorphismMap id_a = identity_hom(a, e_cd.target);
  IntertwinerResult iw;
  try {
    iw = intertwining_unitary(ch.psi, id_a, ch.target_unit_qb);
  } catch (const TooFar& err) {
    throw TooFar(std::string("perturb[intertwining_unitary]: ") + err.what() +
                 "; d_upper = " + std::to_string(rep.distance.upper));
  }
  rep.unitary = iw.u;
  lap("intertwining_unitary");

  // 6: verify the conjugation u A u* = B (span match plus equal dimensions).
  if (a.dim() != b.dim()) {
    throw ConjugationFailed("perturb: intermediates have different dimensions " +
                            std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
  const CMatrix uh = rep.unitary.adjoint();
  for (const CMatrix& x : a.basis) {
    rep.conjugation_residual =
        std::max(rep.conjugation_residual, span_distance(b, rep.unitary * x * uh));
  }
  if (rep.conjugation_residual > 1e-7) {
    throw ConjugationFailed("perturb: conjugation residual " +
                            std::to_string(rep.conjugation_residual));
  }
  lap("conjugation_check");

  // 7: locate u: inside C*(A, B) and the commutant of C.
  for (const CMatrix& g : e_cd.target.basis) {
    rep.u_commutes_with_c_residual =
        std::max(rep.u_commutes_with_c_residual, op_norm(commutator(rep.unitary, g)));
  }
  rep.u_in_generated_residual = span_distance(generated_by(a, b), rep.unitary);

  const double n_basis = static_cast<double>(rep.n_quasi_basis);
  const double d_upper = rep.distance.upper;
  HomomorphismMap eb_on_a;  // E_B restricted to A, as a map A -> B
  {
    std::vector<CMatrix> images;
    images.reserve(a.basis.size());
    for (const CMatrix& x : a.basis) images.push_back(e_bd.apply(x));
    eb_on_a = make_hom(a, b, images, e_cd.target);
  }
  const double psi_vs_eb = hom_distance_upper(ch.psi, eb_on_a);
  const double psi_vs_id = hom_distance_upper(ch.psi, id_a);
  const double eb_vs_id = hom_distance_upper(eb_on_a, id_a);
  rep.bounds.push_back({"psi_vs_expectation_onto_b", psi_vs_eb,
                        8.0 * std::sqrt(3.0) * n_basis * std::sqrt(d_upper)});
  rep.bounds.push_back({"delta_spectral_split", rep.delta, n_basis * std::sqrt(6.0 * d_upper)});
  rep.bounds.push_back({"psi_vs_identity_triangle", psi_vs_id, psi_vs_eb + eb_vs_id});
  rep.bounds.push_back(
      {"unitary_near_identity", op_norm(rep.unitary - identity(a.ambient_dim)),
       std::numbers::sqrt2 * n_basis * psi_vs_id});
  rep.bounds.push_back({"sweep_vs_jones", rep.distance.sweep_bound, rep.distance.jones_bound});
  const InclusionDefect incl =
      expectation_vs_inclusion(e_bd, a, d_upper, opts.samples, opts.seed);
  rep.bounds.push_back(incl.near_identity);
  rep.bounds.push_back(incl.near_multiplicative);
  lap("bounds_table");

  bool ok = is_unitary(rep.unitary, 1e-9) && rep.conjugation_residual <= 1e-7 &&
            rep.u_commutes_with_c_residual <= 1e-8 && rep.psi_mult_residual <= 1e-7 &&
            rep.psi_unital_residual <= 1e-8 && rep.psi_fixes_c_residual <= 1e-8;
  for (const BoundCheck& bc : rep.bounds) ok = ok && bc.holds(1e-7);
  rep.success = ok;
  return rep;
}

struct ClusterItem {
  Subalgebra algebra;
  CondExpectation expectation;
};

struct PairAttempt {
  int i{};
  int j{};
  double jones_gap{};
  bool attempted{};
  bool merged{};
  std::string error;
  CMatrix witness;  // empty unless merged
};

struct ClusterReport {
  double epsilon{};
  int n_quasi_basis{};
  double index_norm{};
  std::vector<PairAttempt> pairs;
  std::vector<std::vector<int>> classes;
};

// Group intermediates into unitary-conjugacy classes: pairs whose Jones
// projections are closer than epsilon = (2 (10N)^4 ||Index||)^{-1} get the
// full pipeline; successes merge classes (union-find, smallest index is the
// representative).  Per-pair failures are recorded, never fatal.
inline ClusterReport cluster_intermediates(const CondExpectation& e_cd,
                                           const std::vector<ClusterItem>& items,
                                           const PerturbOptions& opts = {}) {
  ClusterReport rep;
  const QuasiBasis qb_unit = unit_ball_rescale(quasi_basis(e_cd));
  rep.n_quasi_basis = static_cast<int>(qb_unit.elements.size());
  rep.index_norm = op_norm(qb_unit.index_element);
  const double tenn = 10.0 * static_cast<double>(rep.n_quasi_basis);
  rep.epsilon = 1.0 / (2.0 * tenn * tenn * tenn * tenn * rep.index_norm);
  const ModulePtr mod = localize(e_cd);
  const int count = static_cast<int>(items.size());
  std::vector<Eigen::MatrixXcd> jones(static_cast<size_t>(count));
  std::vector<std::string> jones_err(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    try {
      jones[static_cast<size_t>(i)] = jones_projection(mod, items[static_cast<size_t>(i)].expectation).mat;
    } catch (const Error& err) {
      jones_err[static_cast<size_t>(i)] = err.what();
    }
  }
  std::vector<int> parent(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) parent[static_cast<size_t>(i)] = i;
  const auto find = [&](int x) {
    while (parent[static_cast<size_t>(x)] != x) x = parent[static_cast<size_t>(x)];
    return x;
  };
  for (int i = 0; i < count; ++i) {
    for (int j = i + 1; j < count; ++j) {
      PairAttempt pa;
      pa.i = i;
      pa.j = j;
      if (!jones_err[static_cast<size_t>(i)].empty() || !jones_err[static_cast<size_t>(j)].empty()) {
        pa.error = "jones projection unavailable: " + jones_err[static_cast<size_t>(i)] +
                   jones_err[static_cast<size_t>(j)];
        rep.pairs.push_back(std::move(pa));
        continue;
      }
      pa.jones_gap = op_norm(jones[static_cast<size_t>(i)] - jones[static_cast<size_t>(j)]);
      pa.attempted = pa.jones_gap < rep.epsilon;
      if (pa.attempted) {
        try {
          PerturbationReport pr = perturb(e_cd, items[static_cast<size_t>(i)].algebra,
                                          items[static_cast<size_t>(j)].algebra, opts);
          pa.merged = pr.success;
          if (pr.success) {
            pa.witness = pr.unitary;
            const int ri = find(i), rj = find(j);
            const int lo = std::min(ri, rj), hi = std::max(ri, rj);
            parent[static_cast<size_t>(hi)] = lo;
          } else {
            pa.error = "pipeline completed without certifying the conjugation";
          }
        } catch (const Error& err) {
          pa.error = err.what();
        }
      }
      rep.pairs.push_back(std::move(pa));
    }
  }
  std::vector<std::vector<int>> buckets(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) buckets[static_cast<size_t>(find(i))].push_back(i);
  for (auto& cls : buckets) {
    if (!cls.empty()) rep.classes.push_back(std::move(cls));
  }
  return rep;
}

}  // namespace cstar
