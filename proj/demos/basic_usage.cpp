// End-to-end tour of the library API on a hand-built inclusion: generate the
// algebras, build the trace-compatible expectation, extract a quasi-basis and
// the index element, localize, and recover a planted unitary conjugacy.

#include <cstdio>

#include <cstarkit/cstarkit.hpp>

using namespace cstar;

int main() {
  // The three-level tower: scalars inside M2(C) x 1 inside M4(C).
  const Subalgebra c = scalar_algebra(4);
  const Subalgebra a = left_tensor_factor(2, 2);
  const Subalgebra d = full_algebra(4);
  const CondExpectation e_cd = trace_preserving_expectation(d, c);

  // Quasi-basis and index element of the base expectation.
  const QuasiBasis qb = quasi_basis(e_cd);
  std::printf("quasi-basis size %zu, ||Index|| = %.6g, reconstruction residual = %.3e\n",
              qb.elements.size(), op_norm(qb.index_element),
              reconstruction_residual(qb, e_cd));

  // The localized module carries left multiplications and Jones projections.
  const ModulePtr mod = localize(e_cd);
  const CondExpectation e_ad = izumi_expectation(e_cd, a, quasi_basis(restriction(e_cd, a)));
  const ModuleOperator e_a = jones_projection(mod, e_ad);
  std::printf("module dimension %td, Jones projection rank residual = %.3e\n", mod->mdim(),
              module_op_norm(e_a * e_a - e_a));

  // Plant a conjugate of the intermediate and recover the unitary.
  Rng rng(7);
  const CMatrix u0 = random_unitary_near_identity(4, 1e-6, rng);
  const Subalgebra b = conjugated(a, u0);
  const PerturbationReport rep = perturb(e_cd, a, b);
  std::printf("planted eps = 1e-6: success = %s, d_upper = %.3e, ||u - 1|| = %.3e, "
              "conjugation residual = %.3e\n",
              rep.success ? "yes" : "no", rep.distance.upper,
              op_norm(rep.unitary - identity(4)), rep.conjugation_residual);
  for (const BoundCheck& bc : rep.bounds) {
    std::printf("  bound %-36s lhs = %.3e  rhs = %.3e\n", bc.name.c_str(), bc.lhs, bc.rhs);
  }
  return rep.success ? 0 : 1;
}
