#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "cstarkit/expectation.hpp"
#include "cstarkit/matrix.hpp"
#include "cstarkit/perturbation.hpp"
#include "cstarkit/subalgebra.hpp"

namespace cstar {

// A named inclusion C subset A subset D together with the trace-compatible
// expectation D -> C and the known value of its index element.
struct Scenario {
  std::string name;
  std::string description;
  Subalgebra c;
  Subalgebra a;  // intermediate; equals d for two-level scenarios
  Subalgebra d;
  CondExpectation e_cd;
  CMatrix expected_index;
};

inline std::vector<std::string> catalog_names() {
  return {"scalars-in-m2", "scalars-in-m3", "scalars-in-m4", "diag-in-m2",  "diag-in-m3",
          "diag-in-m4",    "m2-in-m4",      "m2-in-m6",      "m3-in-m6",    "m3-in-m9",
          "pauli-fixed-m2", "tower-m2-in-m4", "tower-diag-in-m2"};
}

inline Scenario make_scenario(const std::string& name) {
  Scenario s;
  s.name = name;
  const auto flat = [&](Index n, const Subalgebra& c, double index_scale,
                        const std::string& what) {
    s.c = c;
    s.d = full_algebra(n);
    s.a = s.d;
    s.e_cd = trace_preserving_expectation(s.d, s.c);
    s.expected_index = index_scale * identity(n);
    s.description = what;
  };
  if (name == "scalars-in-m2" || name == "scalars-in-m3" || name == "scalars-in-m4") {
    const Index n = name.back() - '0';
    flat(n, scalar_algebra(n), static_cast<double>(n * n),
         "scalars inside the full matrix algebra");
  } else if (name == "diag-in-m2" || name == "diag-in-m3" || name == "diag-in-m4") {
    const Index n = name.back() - '0';
    flat(n, diagonal_algebra(n), static_cast<double>(n),
         "diagonal matrices inside the full matrix algebra");
  } else if (name == "m2-in-m4" || name == "m2-in-m6" || name == "m3-in-m6" ||
             name == "m3-in-m9") {
    const Index k = name[1] - '0';
    const Index n = name.back() - '0';
    const Index m = n / k;
    flat(n, left_tensor_factor(k, m), static_cast<double>(m * m),
         "left tensor factor inside the full matrix algebra");
  } else if (name == "pauli-fixed-m2") {
    s.c = scalar_algebra(2);
    s.d = full_algebra(2);
    s.a = s.d;
    CMatrix x(2, 2), y(2, 2), z(2, 2);
    x << 0, 1, 1, 0;
    y << 0, Complex(0, -1), Complex(0, 1), 0;
    z << 1, 0, 0, -1;
    s.e_cd = averaging_expectation(s.d, s.c, {identity(2), x, y, z});
    s.expected_index = 4.0 * identity(2);
    s.description = "fixed points of the Pauli group action, expectation by group averaging";
  } else if (name == "tower-m2-in-m4") {
    s.c = scalar_algebra(4);
    s.a = left_tensor_factor(2, 2);
    s.d = full_algebra(4);
    s.e_cd = trace_preserving_expectation(s.d, s.c);
    s.expected_index = 16.0 * identity(4);
    s.description = "three-level tower: scalars inside a tensor factor inside M4";
  } else if (name == "tower-diag-in-m2") {
    s.c = scalar_algebra(2);
    s.a = diagonal_algebra(2);
    s.d = full_algebra(2);
    s.e_cd = trace_preserving_expectation(s.d, s.c);
    s.expected_index = 4.0 * identity(2);
    s.description = "three-level tower: scalars inside the diagonal inside M2";
  } else {
    throw PreconditionFailed("unknown scenario: " + name);
  }
  return s;
}

// Plant B = u0 A u0* with ||u0 - 1|| = eps and run the full pipeline.
inline PerturbationReport run_recover(const Scenario& sc, double eps, std::uint64_t seed,
                                      PerturbOptions opts = {}) {
  opts.seed = seed;
  Rng rng(seed);
  const CMatrix u0 = random_unitary_near_identity(sc.d.ambient_dim, eps, rng);
  const Subalgebra b = conjugated(sc.a, u0);
  PerturbationReport rep = perturb(sc.e_cd, sc.a, b, opts);
  rep.scenario = sc.name;
  rep.planted_eps = eps;
  return rep;
}

struct LemmaAudit {
  std::string name;
  double max_violation{};
  int trials{};
};

struct AuditReport {
  int trials{};
  std::uint64_t seed{};
  std::vector<LemmaAudit> lemmas;

  bool pass(double tol = 1e-7) const {
    for (const LemmaAudit& l : lemmas) {
      if (!(l.max_violation <= tol)) return false;
    }
    return true;
  }
};

namespace detail {

inline CMatrix random_projection(Index n, Rng& rng) {
  const CMatrix h = random_hermitian(n, rng);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const Index k = 1 + static_cast<Index>(rng.uniform() * static_cast<double>(n - 1));
  CMatrix p = CMatrix::Zero(n, n);
  for (Index i = 0; i < k; ++i) {
    p += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
  }
  return p;
}

}  // namespace detail

// Randomized audits of the quantitative one-liners the pipeline leans on.
// Each entry reports max over trials of (left side - right side); all should
// be <= 0 up to numerical noise.
inline AuditReport run_audit(int trials, std::uint64_t seed) {
  AuditReport rep;
  rep.trials = trials;
  rep.seed = seed;

  {  // polar factor of an invertible x: ||u - 1|| <= sqrt(2) ||x - 1||
    Rng rng(seed);
    LemmaAudit l{"polar_factor_near_identity", -std::numeric_limits<double>::infinity(), trials};
    for (int t = 0; t < trials; ++t) {
      const Index n = 2 + t % 3;
      CMatrix g = random_matrix(n, rng);
      g /= std::max(1e-300, op_norm(g));
      const double r = 0.95 * rng.uniform();
      const CMatrix x = identity(n) + r * g;
      const CMatrix u = polar_unitary(x);
      l.max_violation = std::max(
          l.max_violation, op_norm(u - identity(n)) - std::numbers::sqrt2 * op_norm(x - identity(n)));
    }
    if (!std::isfinite(l.max_violation)) l.max_violation = 0.0;
    rep.lemmas.push_back(l);
  }

  {  // spectral window of a near a projection p: ||chi(a) - p|| <= 2 ||a - p||
    Rng rng(seed + 1);
    LemmaAudit l{"spectral_window_close_projection", -std::numeric_limits<double>::infinity(), trials};
    for (int t = 0; t < trials; ++t) {
      const Index n = 2 + t % 3;
      const CMatrix p = detail::random_projection(n, rng);
      CMatrix h = random_hermitian(n, rng);
      h /= std::max(1e-300, op_norm(h));
      const double delta = 0.499 * rng.uniform();
      const CMatrix a = p + delta * h;
      const double d = op_norm(a - p);
      const CMatrix q = spectral_window_projection(a, 1.0 - d, 1.0 + d);
      const double proj_defect = op_norm(q * q - q);
      l.max_violation =
          std::max({l.max_violation, op_norm(q - p) - 2.0 * d, proj_defect});
    }
    if (!std::isfinite(l.max_violation)) l.max_violation = 0.0;
    rep.lemmas.push_back(l);
  }

  {  // intertwiner of close projections: w p w* = q, ||w - 1|| <= sqrt(2) ||p - q||
    Rng rng(seed + 2);
    LemmaAudit l{"projection_intertwiner_near_identity", -std::numeric_limits<double>::infinity(), trials};
    for (int t = 0; t < trials; ++t) {
      const Index n = 2 + t % 3;
      const CMatrix p = detail::random_projection(n, rng);
      const double eps = 0.9 * rng.uniform();
      const CMatrix u0 = random_unitary_near_identity(n, eps, rng);
      const CMatrix q = u0 * p * u0.adjoint();
      const double d = op_norm(p - q);
      if (d >= 1.0) continue;
      const CMatrix w = projection_intertwiner(p, q);
      l.max_violation = std::max({l.max_violation,
                                  op_norm(w - identity(n)) - std::numbers::sqrt2 * d,
                                  op_norm(w * p * w.adjoint() - q)});
    }
    if (!std::isfinite(l.max_violation)) l.max_violation = 0.0;
    rep.lemmas.push_back(l);
  }

  {  // a map at distance r from a *-homomorphism is 3r-multiplicative
    Rng rng(seed + 3);
    LemmaAudit l{"near_homomorphism_near_multiplicative", -std::numeric_limits<double>::infinity(), trials};
    const Subalgebra m3 = full_algebra(3);
    const Subalgebra c3 = scalar_algebra(3);
    const HomomorphismMap id3 = identity_hom(m3, c3);
    const int rounds = std::max(1, trials / 50);
    for (int t = 0; t < rounds; ++t) {
      const double r = 0.3 * rng.uniform();
      std::vector<CMatrix> images;
      images.reserve(m3.basis.size());
      for (const CMatrix& x : m3.basis) {
        images.push_back((1.0 - r) * x + r * (x.trace() / 3.0) * identity(3));
      }
      const HomomorphismMap phi = make_hom(m3, m3, images, c3);
      const MultiplicativityDefect md =
          multiplicativity_defect(phi, id3, 50, rng.raw());
      l.max_violation = std::max(l.max_violation, md.max_violation);
    }
    if (!std::isfinite(l.max_violation)) l.max_violation = 0.0;
    rep.lemmas.push_back(l);
  }

  {  // expectation onto a close subalgebra: near-identity and near-multiplicative on A
    Rng rng(seed + 4);
    LemmaAudit l{"expectation_close_inclusion", -std::numeric_limits<double>::infinity(), trials};
    const Scenario sc = make_scenario("tower-m2-in-m4");
    const ModulePtr mod = localize(sc.e_cd);
    const int rounds = std::max(1, trials / 100);
    const int samples = std::min(trials, 100);
    for (int t = 0; t < rounds; ++t) {
      const double eps = 0.02 * (0.1 + rng.uniform());
      const CMatrix u0 = random_unitary_near_identity(4, eps, rng);
      const Subalgebra b = conjugated(sc.a, u0);
      const CondExpectation e_ad =
          izumi_expectation(sc.e_cd, sc.a, quasi_basis(restriction(sc.e_cd, sc.a)));
      const CondExpectation e_bd =
          izumi_expectation(sc.e_cd, b, quasi_basis(restriction(sc.e_cd, b)));
      const DistanceEstimate dist =
          distance_estimate(sc.a, b, mod, e_ad, e_bd, samples, rng.raw());
      const InclusionDefect incl =
          expectation_vs_inclusion(e_bd, sc.a, dist.upper, samples, rng.raw());
      l.max_violation = std::max({l.max_violation,
                                  incl.near_identity.lhs - incl.near_identity.rhs,
                                  incl.near_multiplicative.lhs - incl.near_multiplicative.rhs});
    }
    if (!std::isfinite(l.max_violation)) l.max_violation = 0.0;
    rep.lemmas.push_back(l);
  }

  {  // per-element distance sweep is dominated by ||Index|| ||e_A - e_B||
    Rng rng(seed + 5);
    LemmaAudit l{"jones_projection_controls_distance", -std::numeric_limits<double>::infinity(), trials};
    const Scenario sc = make_scenario("tower-m2-in-m4");
    const ModulePtr mod = localize(sc.e_cd);
    const int rounds = std::max(1, trials / 100);
    const int samples = std::min(trials, 100);
    for (int t = 0; t < rounds; ++t) {
      const double eps = 0.01 * (0.1 + rng.uniform());
      const CMatrix u0 = random_unitary_near_identity(4, eps, rng);
      const Subalgebra b = conjugated(sc.a, u0);
      const CondExpectation e_ad =
          izumi_expectation(sc.e_cd, sc.a, quasi_basis(restriction(sc.e_cd, sc.a)));
      const CondExpectation e_bd =
          izumi_expectation(sc.e_cd, b, quasi_basis(restriction(sc.e_cd, b)));
      const DistanceEstimate dist =
          distance_estimate(sc.a, b, mod, e_ad, e_bd, samples, rng.raw());
      l.max_violation = std::max(l.max_violation, dist.sweep_bound - dist.jones_bound);
    }
    if (!std::isfinite(l.max_violation)) l.max_violation = 0.0;
    rep.lemmas.push_back(l);
  }

  {  // index element dominates the identity and E(x*x) >= xx / ||Index||
    Rng rng(seed + 6);
    LemmaAudit l{"index_dominates_identity", -std::numeric_limits<double>::infinity(), trials};
    const int per = std::max(1, trials / 4);
    for (const char* name : {"scalars-in-m2", "diag-in-m3", "m2-in-m4", "pauli-fixed-m2"}) {
      const Scenario sc = make_scenario(name);
      const QuasiBasis qb = quasi_basis(sc.e_cd);
      l.max_violation =
          std::max(l.max_violation,
                   -min_eigenvalue(CMatrix(qb.index_element - identity(sc.d.ambient_dim))));
      const PimsnerPopaAudit pp = pimsner_popa_audit(sc.e_cd, per, rng.raw());
      l.max_violation = std::max(l.max_violation, -pp.min_eigenvalue);
    }
    if (!std::isfinite(l.max_violation)) l.max_violation = 0.0;
    rep.lemmas.push_back(l);
  }

  return rep;
}

}  // namespace cstar
