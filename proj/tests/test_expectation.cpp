// Conditional expectations: trace-compatible and group-averaged
// constructions, quasi-bases via the frame algorithm, index elements,
// unit-ball rescaling, compatibility, and uniqueness.

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <cstarkit/expectation.hpp>
#include <cstarkit/matrix.hpp>
#include <cstarkit/subalgebra.hpp>

using namespace cstar;

namespace {

// Independent closed-form oracle: expectation onto M_k tensor 1_m is the
// normalized partial trace over the right factor.
CMatrix partial_trace_oracle(const CMatrix& x, Index k, Index m) {
  CMatrix y = CMatrix::Zero(k, k);
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < k; ++j) {
      for (Index s = 0; s < m; ++s) y(i, j) += x(i * m + s, j * m + s);
    }
  }
  return kron(CMatrix(y / static_cast<double>(m)), identity(m));
}

std::vector<CMatrix> pauli_matrices() {
  CMatrix x(2, 2), y(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  y << 0, Complex(0, -1), Complex(0, 1), 0;
  z << 1, 0, 0, -1;
  return {identity(2), x, y, z};
}

}  // namespace

TEST(Expectation, TracePreservingOntoDiagonalKeepsDiagonalPart) {
  const Subalgebra d = full_algebra(3);
  const CondExpectation e = trace_preserving_expectation(d, diagonal_algebra(3));
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const CMatrix x = random_matrix(3, rng);
    const CMatrix got = e.apply(x);
    EXPECT_LE(op_norm(got - CMatrix(x.diagonal().asDiagonal())), 1e-12);
  }
}

TEST(Expectation, TracePreservingOntoScalarsIsNormalizedTrace) {
  const Subalgebra d = full_algebra(4);
  const CondExpectation e = trace_preserving_expectation(d, scalar_algebra(4));
  Rng rng(2);
  const CMatrix x = random_matrix(4, rng);
  EXPECT_LE(op_norm(e.apply(x) - (x.trace() / 4.0) * identity(4)), 1e-12);
}

TEST(Expectation, TracePreservingOntoTensorFactorIsPartialTrace) {
  const Subalgebra d = full_algebra(6);
  const CondExpectation e = trace_preserving_expectation(d, left_tensor_factor(2, 3));
  Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    const CMatrix x = random_matrix(6, rng);
    EXPECT_LE(op_norm(e.apply(x) - partial_trace_oracle(x, 2, 3)), 1e-12);
  }
}

TEST(Expectation, PauliAveragingEqualsTraceExpectation) {
  const Subalgebra d = full_algebra(2);
  const Subalgebra c = scalar_algebra(2);
  const CondExpectation avg = averaging_expectation(d, c, pauli_matrices());
  const CondExpectation tr = trace_preserving_expectation(d, c);
  for (const CMatrix& s : d.basis) {
    EXPECT_LE(op_norm(avg.apply(s) - tr.apply(s)), 1e-12);
  }
}

TEST(Expectation, AuditPassesOnCatalogStyleExpectations) {
  const struct {
    Subalgebra d, c;
  } cases[] = {
      {full_algebra(2), scalar_algebra(2)},
      {full_algebra(3), diagonal_algebra(3)},
      {full_algebra(4), left_tensor_factor(2, 2)},
  };
  for (const auto& cs : cases) {
    const ExpectationAudit audit =
        audit_expectation(trace_preserving_expectation(cs.d, cs.c), 100, 5);
    EXPECT_TRUE(audit.pass(1e-8))
        << "onto=" << audit.onto_target << " fixes=" << audit.fixes_target
        << " idem=" << audit.idempotent << " unital=" << audit.unital
        << " bimodule=" << audit.bimodule << " pos=" << audit.positivity_min;
  }
}

TEST(Expectation, FrameQuasiBasisReconstructsAndMatchesIndexOracles) {
  const struct {
    Subalgebra d, c;
    double index_scale;
  } cases[] = {
      {full_algebra(2), scalar_algebra(2), 4.0},
      {full_algebra(3), scalar_algebra(3), 9.0},
      {full_algebra(3), diagonal_algebra(3), 3.0},
      {full_algebra(4), left_tensor_factor(2, 2), 4.0},
  };
  for (const auto& cs : cases) {
    const Index n = cs.d.ambient_dim;
    const CondExpectation e = trace_preserving_expectation(cs.d, cs.c);
    const QuasiBasis qb = quasi_basis(e);
    EXPECT_LE(reconstruction_residual(qb, e), 1e-10);
    EXPECT_LE(op_norm(CMatrix(qb.index_element - cs.index_scale * identity(n))), 1e-10);
    EXPECT_LE(op_norm(CMatrix(watatani_index(e) - qb.index_element)), 1e-12);
  }
}

TEST(Expectation, QuasiBasisIndexIsCentralAndDominatesIdentity) {
  const Subalgebra d = full_algebra(3);
  const CondExpectation e = trace_preserving_expectation(d, diagonal_algebra(3));
  const QuasiBasis qb = quasi_basis(e);
  for (const CMatrix& s : d.basis) {
    EXPECT_LE(op_norm(commutator(qb.index_element, s)), 1e-10);
  }
  EXPECT_GE(min_eigenvalue(qb.index_element), 1.0 - 1e-10);
}

TEST(Expectation, UnitBallRescalePreservesReconstructionAndIndex) {
  const Subalgebra d = full_algebra(2);
  const CondExpectation e = trace_preserving_expectation(d, scalar_algebra(2));
  const QuasiBasis qb = quasi_basis(e);  // elements of norm sqrt(2)
  const QuasiBasis unit = unit_ball_rescale(qb);
  EXPECT_TRUE(unit.in_unit_ball);
  EXPECT_EQ(unit.elements.size(), 2 * qb.elements.size());  // K = 2
  for (const CMatrix& u : unit.elements) EXPECT_LE(op_norm(u), 1.0 + 1e-9);
  EXPECT_LE(reconstruction_residual(unit, e), 1e-10);
  EXPECT_LE(op_norm(CMatrix(unit.index_element - qb.index_element)), 1e-12);
  CMatrix resum = CMatrix::Zero(2, 2);
  for (const CMatrix& u : unit.elements) resum += u * u.adjoint();
  EXPECT_LE(op_norm(CMatrix(resum - qb.index_element)), 1e-12);
}

TEST(Expectation, UnitBallRescaleSplitsASingleLargeElement) {
  // a single element of norm 2: K = ceil(4) copies, each of norm 1, with the
  // sum of u u* preserved exactly
  QuasiBasis qb;
  qb.elements = {2.0 * identity(2)};
  qb.index_element = 4.0 * identity(2);
  const QuasiBasis unit = unit_ball_rescale(qb);
  EXPECT_EQ(unit.elements.size(), 4u);
  CMatrix resum = CMatrix::Zero(2, 2);
  for (const CMatrix& u : unit.elements) {
    EXPECT_NEAR(op_norm(u), 1.0, 1e-12);
    resum += u * u.adjoint();
  }
  EXPECT_LE(op_norm(CMatrix(resum - qb.index_element)), 1e-12);
}

TEST(Expectation, SingularFrameIsDetected) {
  const Subalgebra d = full_algebra(2);
  CondExpectation dead = trace_preserving_expectation(d, diagonal_algebra(2));
  dead.map.setZero();  // not an expectation any more: the frame degenerates
  EXPECT_THROW(quasi_basis(dead), SingularFrame);
}

TEST(Expectation, RestrictionAgreesWithDirectConstruction) {
  const Subalgebra d = full_algebra(4);
  const Subalgebra a = left_tensor_factor(2, 2);
  const Subalgebra c = scalar_algebra(4);
  const CondExpectation e_cd = trace_preserving_expectation(d, c);
  const CondExpectation r = restriction(e_cd, a);
  const CondExpectation direct = trace_preserving_expectation(a, Subalgebra{4, c.basis});
  for (const CMatrix& s : a.basis) {
    EXPECT_LE(op_norm(r.apply(s) - direct.apply(s)), 1e-12);
  }
}

TEST(Expectation, IzumiExpectationMatchesTracePreservingOnTower) {
  const Subalgebra d = full_algebra(4);
  const Subalgebra a = left_tensor_factor(2, 2);
  const Subalgebra c = scalar_algebra(4);
  const CondExpectation e_cd = trace_preserving_expectation(d, c);
  const CondExpectation e_ad = izumi_expectation(e_cd, a, quasi_basis(restriction(e_cd, a)));
  const CondExpectation direct = trace_preserving_expectation(d, a);
  for (const CMatrix& s : d.basis) {
    EXPECT_LE(op_norm(e_ad.apply(s) - direct.apply(s)), 1e-9);
  }
  EXPECT_LE(compatibility_residual(e_cd, e_ad), 1e-10);
  EXPECT_TRUE(audit_expectation(e_ad, 100, 8).pass(1e-8));
}

TEST(Expectation, IzumiRejectsNonIntermediateAlgebra) {
  const Subalgebra d = full_algebra(2);
  const CondExpectation e_cd = trace_preserving_expectation(d, scalar_algebra(2));
  // the span of a single corner projection misses the identity, so the
  // scalars do not sit inside it
  CMatrix e00 = CMatrix::Zero(2, 2);
  e00(0, 0) = 1.0;
  const Subalgebra not_intermediate{2, {e00}};
  EXPECT_THROW(
      izumi_expectation(e_cd, not_intermediate,
                        quasi_basis(trace_preserving_expectation(d, scalar_algebra(2)))),
      NotIntermediate);
}

TEST(Expectation, IzumiRejectsIncompatibleBase) {
  const Subalgebra d = full_algebra(4);
  const Subalgebra a = left_tensor_factor(2, 2);
  const Subalgebra c = scalar_algebra(4);
  CondExpectation corrupted = trace_preserving_expectation(d, c);
  corrupted.map(0, 3) += 0.1;  // no longer an expectation
  EXPECT_THROW(
      izumi_expectation(corrupted, a, quasi_basis(restriction(corrupted, a))),
      CompatibilityResidualExceeded);
}

TEST(Expectation, PimsnerPopaPositivityAcrossExamples) {
  const struct {
    Subalgebra d, c;
    double index_norm;
  } cases[] = {
      {full_algebra(2), scalar_algebra(2), 4.0},
      {full_algebra(3), diagonal_algebra(3), 3.0},
      {full_algebra(4), left_tensor_factor(2, 2), 4.0},
  };
  for (const auto& cs : cases) {
    const PimsnerPopaAudit pp =
        pimsner_popa_audit(trace_preserving_expectation(cs.d, cs.c), 300, 13);
    EXPECT_NEAR(pp.index_norm, cs.index_norm, 1e-9);
    EXPECT_GE(pp.min_eigenvalue, -1e-9);
  }
}

TEST(Expectation, CompatibleExpectationIsUnique) {
  const Subalgebra d = full_algebra(4);
  const Subalgebra a = left_tensor_factor(2, 2);
  const Subalgebra c = scalar_algebra(4);
  const CondExpectation e_cd = trace_preserving_expectation(d, c);
  const CondExpectation e1 = izumi_expectation(e_cd, a, quasi_basis(restriction(e_cd, a)));
  const CondExpectation e2 = trace_preserving_expectation(d, a);
  std::vector<CMatrix> group;
  for (const CMatrix& g : pauli_matrices()) group.push_back(kron(identity(2), g));
  const CondExpectation e3 = averaging_expectation(d, a, group);
  EXPECT_LE(uniqueness_check(e_cd, e1, e2), 1e-9);
  EXPECT_LE(uniqueness_check(e_cd, e2, e3), 1e-9);
  EXPECT_LE(uniqueness_check(e_cd, e1, e3), 1e-9);
}

TEST(Expectation, UniquenessCheckRejectsMismatchedTargets) {
  const Subalgebra d = full_algebra(4);
  const CondExpectation e_cd = trace_preserving_expectation(d, scalar_algebra(4));
  const CondExpectation onto_left = trace_preserving_expectation(d, left_tensor_factor(2, 2));
  const CondExpectation onto_right = trace_preserving_expectation(d, right_tensor_factor(2, 2));
  EXPECT_THROW(uniqueness_check(e_cd, onto_left, onto_right), PreconditionFailed);
}
