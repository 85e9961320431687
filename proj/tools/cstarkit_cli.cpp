// Command-line front end: scenario catalog, quasi-bases and index elements,
// certified distances, the perturbation pipeline, lemma audits, and
// conjugacy-class clustering.  All machine output is JSON on stdout.

#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <cstarkit/cstarkit.hpp>

namespace {

using namespace cstar;

struct GlobalOpts {
  double tol{1e-9};
  bool as_json{false};
  std::uint64_t seed{0};
};

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

Subalgebra flipped_intermediate(const Scenario& sc) {
  if (sc.name == "tower-m2-in-m4") return right_tensor_factor(2, 2);
  if (sc.name == "tower-diag-in-m2") {
    CMatrix h(2, 2);
    h << 1, 1, 1, -1;
    h /= std::numbers::sqrt2;
    return conjugated(sc.a, h);
  }
  throw PreconditionFailed("--flip needs a tower scenario (tower-m2-in-m4 or tower-diag-in-m2)");
}

CondExpectation intermediate_expectation(const Scenario& sc, const Subalgebra& b) {
  return izumi_expectation(sc.e_cd, b, quasi_basis(restriction(sc.e_cd, b)));
}

int cmd_demo(const GlobalOpts& g) {
  json catalog = json::array();
  for (const std::string& name : catalog_names()) {
    const Scenario sc = make_scenario(name);
    const QuasiBasis qb = quasi_basis(sc.e_cd);
    const double recon = reconstruction_residual(qb, sc.e_cd);
    const double expected_gap = op_norm(CMatrix(qb.index_element - sc.expected_index));
    catalog.push_back(json{{"scenario", name},
                           {"ambient_dim", sc.d.ambient_dim},
                           {"dim_c", sc.c.dim()},
                           {"dim_a", sc.a.dim()},
                           {"n_quasi_basis", static_cast<int>(qb.elements.size())},
                           {"index_norm", op_norm(qb.index_element)},
                           {"reconstruction_residual", recon},
                           {"expected_index_gap", expected_gap}});
    if (!g.as_json) {
      std::printf("%-18s  n=%td  dim C=%td  dim A=%td  ||Index||=%.6g  recon=%.3e  oracle gap=%.3e\n",
                  name.c_str(), sc.d.ambient_dim, sc.c.dim(), sc.a.dim(),
                  op_norm(qb.index_element), recon, expected_gap);
    }
  }
  const Scenario sc = make_scenario("tower-diag-in-m2");
  const PerturbationReport rep = run_recover(sc, 1e-6, g.seed);
  if (g.as_json) {
    emit(json{{"catalog", std::move(catalog)}, {"recover", to_json(rep)}});
  } else {
    std::printf("\nrecovery demo (%s, planted eps=1e-6): success=%s  d_upper=%.3e  "
                "conjugation residual=%.3e  ||u-1||=%.3e\n",
                rep.scenario.c_str(), rep.success ? "yes" : "no", rep.distance.upper,
                rep.conjugation_residual, op_norm(rep.unitary - identity(sc.d.ambient_dim)));
  }
  return rep.success ? 0 : 1;
}

int cmd_index(const GlobalOpts& g, const std::string& scenario) {
  const Scenario sc = make_scenario(scenario);
  const QuasiBasis qb = quasi_basis(sc.e_cd);
  const double recon = reconstruction_residual(qb, sc.e_cd);
  const double gap = op_norm(CMatrix(qb.index_element - sc.expected_index));
  const double min_eig = min_eigenvalue(qb.index_element);
  const bool ok = recon <= std::max(g.tol, 1e-9) * 10.0 && gap <= std::max(g.tol, 1e-9) * 10.0;
  if (g.as_json) {
    emit(json{{"scenario", scenario},
              {"index", to_json(qb.index_element)},
              {"index_norm", op_norm(qb.index_element)},
              {"min_eigenvalue", min_eig},
              {"n_elements", static_cast<int>(qb.elements.size())},
              {"reconstruction_residual", recon},
              {"expected_index_gap", gap},
              {"ok", ok}});
  } else {
    std::printf("scenario %s: ||Index||=%.9g  min eig=%.9g  elements=%zu  recon=%.3e  oracle gap=%.3e\n",
                scenario.c_str(), op_norm(qb.index_element), min_eig, qb.elements.size(), recon,
                gap);
  }
  return ok ? 0 : 1;
}

int cmd_quasi_basis(const GlobalOpts& g, const std::string& scenario, bool unit_ball) {
  const Scenario sc = make_scenario(scenario);
  QuasiBasis qb = quasi_basis(sc.e_cd);
  if (unit_ball) qb = unit_ball_rescale(qb);
  if (g.as_json) {
    emit(to_json(qb));
  } else {
    std::printf("scenario %s: %zu quasi-basis elements (unit ball: %s), ||Index||=%.9g, "
                "reconstruction residual %.3e\n",
                scenario.c_str(), qb.elements.size(), qb.in_unit_ball ? "yes" : "no",
                op_norm(qb.index_element), reconstruction_residual(qb, sc.e_cd));
  }
  return 0;
}

int cmd_distance(const GlobalOpts& g, const std::string& scenario, double eps, int samples) {
  const Scenario sc = make_scenario(scenario);
  Rng rng(g.seed);
  const CMatrix u0 = random_unitary_near_identity(sc.d.ambient_dim, eps, rng);
  const Subalgebra b = conjugated(sc.a, u0);
  const CondExpectation e_ad = intermediate_expectation(sc, sc.a);
  const CondExpectation e_bd = intermediate_expectation(sc, b);
  const ModulePtr mod = localize(sc.e_cd);
  const DistanceEstimate est = distance_estimate(sc.a, b, mod, e_ad, e_bd, samples, g.seed);
  if (g.as_json) {
    json out = to_json(est);
    out["scenario"] = scenario;
    out["planted_eps"] = eps;
    out["seed"] = g.seed;
    emit(out);
  } else {
    std::printf("scenario %s, planted eps=%.3e: lower=%.3e upper=%.3e (jones=%.3e, sweep=%.3e)\n",
                scenario.c_str(), eps, est.lower, est.upper, est.jones_bound, est.sweep_bound);
  }
  return 0;
}

int cmd_perturb(const GlobalOpts& g, const std::string& scenario, double eps, int samples) {
  const Scenario sc = make_scenario(scenario);
  PerturbOptions opts;
  opts.samples = samples;
  opts.tol = g.tol;
  const PerturbationReport rep = run_recover(sc, eps, g.seed, opts);
  if (g.as_json) {
    emit(to_json(rep));
  } else {
    std::printf("scenario %s, planted eps=%.3e, seed %llu\n", scenario.c_str(), eps,
                static_cast<unsigned long long>(g.seed));
    std::printf("  distance: lower=%.3e upper=%.3e  gamma(N=%d)=%.3e  below gamma: %s\n",
                rep.distance.lower, rep.distance.upper, rep.n_quasi_basis, rep.gamma,
                rep.d_upper_below_gamma ? "yes" : "no");
    std::printf("  delta=%.3e  conjugation residual=%.3e  [u,C] residual=%.3e\n", rep.delta,
                rep.conjugation_residual, rep.u_commutes_with_c_residual);
    for (const BoundCheck& b : rep.bounds) {
      std::printf("  bound %-36s lhs=%.6e rhs=%.6e %s\n", b.name.c_str(), b.lhs, b.rhs,
                  b.holds(1e-7) ? "ok" : "VIOLATED");
    }
    std::printf("  success: %s\n", rep.success ? "yes" : "no");
  }
  return rep.success ? 0 : 1;
}

int cmd_audit(const GlobalOpts& g, int trials) {
  const AuditReport rep = run_audit(trials, g.seed);
  if (g.as_json) {
    emit(to_json(rep));
  } else {
    for (const LemmaAudit& l : rep.lemmas) {
      std::printf("%-42s trials=%-5d max violation=% .3e\n", l.name.c_str(), l.trials,
                  l.max_violation);
    }
    std::printf("pass: %s\n", rep.pass() ? "yes" : "no");
  }
  return rep.pass() ? 0 : 1;
}

int cmd_cluster(const GlobalOpts& g, const std::string& scenario, double eps, int count,
                bool flip, int samples) {
  const Scenario sc = make_scenario(scenario);
  std::vector<ClusterItem> items;
  items.push_back({sc.a, intermediate_expectation(sc, sc.a)});
  Rng rng(g.seed);
  for (int k = 1; k < count; ++k) {
    const CMatrix u0 = random_unitary_near_identity(sc.d.ambient_dim, eps, rng);
    const Subalgebra b = conjugated(sc.a, u0);
    items.push_back({b, intermediate_expectation(sc, b)});
  }
  if (flip) {
    const Subalgebra f = flipped_intermediate(sc);
    items.push_back({f, intermediate_expectation(sc, f)});
  }
  PerturbOptions opts;
  opts.samples = samples;
  opts.seed = g.seed;
  opts.tol = g.tol;
  const ClusterReport rep = cluster_intermediates(sc.e_cd, items, opts);
  if (g.as_json) {
    json out = to_json(rep);
    out["scenario"] = scenario;
    out["planted_eps"] = eps;
    out["seed"] = g.seed;
    emit(out);
  } else {
    std::printf("scenario %s: %zu items, epsilon gate %.3e\n", scenario.c_str(), items.size(),
                rep.epsilon);
    for (const PairAttempt& p : rep.pairs) {
      std::printf("  pair (%d,%d): jones gap=%.3e attempted=%s merged=%s%s%s\n", p.i, p.j,
                  p.jones_gap, p.attempted ? "yes" : "no", p.merged ? "yes" : "no",
                  p.error.empty() ? "" : " error: ", p.error.c_str());
    }
    std::printf("  classes:");
    for (const auto& cls : rep.classes) {
      std::printf(" {");
      for (size_t i = 0; i < cls.size(); ++i) std::printf(i ? ",%d" : "%d", cls[i]);
      std::printf("}");
    }
    std::printf("\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-dimensional toolkit for inclusions of matrix C*-algebras"};
  app.fallthrough();
  GlobalOpts g;
  app.add_option("--tol", g.tol, "base numerical tolerance")->capture_default_str();
  app.add_flag("--json", g.as_json, "emit JSON instead of text");
  app.add_option("--seed", g.seed, "seed for all randomized steps")->capture_default_str();

  std::string scenario = "tower-m2-in-m4";
  double eps = 1e-6;
  int trials = 1000;
  int samples = 64;
  int count = 2;
  bool unit_ball = false;
  bool flip = false;

  CLI::App* demo = app.add_subcommand("demo", "catalog overview plus a quick planted recovery");
  CLI::App* perturb_cmd =
      app.add_subcommand("perturb", "plant a conjugate of the intermediate and recover it");
  perturb_cmd->add_option("--scenario", scenario, "catalog scenario name")->capture_default_str();
  perturb_cmd->add_option("--eps", eps, "size of the planted perturbation")->capture_default_str();
  perturb_cmd->add_option("--samples", samples, "sweep samples per side")->capture_default_str();
  CLI::App* audit_cmd = app.add_subcommand("audit", "randomized audits of the quantitative lemmas");
  audit_cmd->add_option("--trials", trials, "trials per audit")->capture_default_str();
  CLI::App* index_cmd = app.add_subcommand("index", "index element of a catalog scenario");
  index_cmd->add_option("--scenario", scenario, "catalog scenario name")->capture_default_str();
  CLI::App* qb_cmd = app.add_subcommand("quasi-basis", "quasi-basis of a catalog scenario");
  qb_cmd->add_option("--scenario", scenario, "catalog scenario name")->capture_default_str();
  qb_cmd->add_flag("--unit-ball", unit_ball, "rescale into the unit ball");
  CLI::App* dist_cmd =
      app.add_subcommand("distance", "certified distance between the intermediate and a planted conjugate");
  dist_cmd->add_option("--scenario", scenario, "catalog scenario name")->capture_default_str();
  dist_cmd->add_option("--eps", eps, "size of the planted perturbation")->capture_default_str();
  dist_cmd->add_option("--samples", samples, "sweep samples per side")->capture_default_str();
  CLI::App* cluster_cmd =
      app.add_subcommand("cluster", "group intermediates into unitary-conjugacy classes");
  cluster_cmd->add_option("--scenario", scenario, "catalog scenario name")->capture_default_str();
  cluster_cmd->add_option("--eps", eps, "size of the planted perturbations")->capture_default_str();
  cluster_cmd->add_option("--count", count, "number of planted copies including the original")
      ->capture_default_str();
  cluster_cmd->add_flag("--flip", flip, "add a genuinely different intermediate");
  cluster_cmd->add_option("--samples", samples, "sweep samples per side")->capture_default_str();
  app.require_subcommand(1);

  CLI11_PARSE(app, argc, argv);

  try {
    if (demo->parsed()) return cmd_demo(g);
    if (perturb_cmd->parsed()) return cmd_perturb(g, scenario, eps, samples);
    if (audit_cmd->parsed()) return cmd_audit(g, trials);
    if (index_cmd->parsed()) return cmd_index(g, scenario);
    if (qb_cmd->parsed()) return cmd_quasi_basis(g, scenario, unit_ball);
    if (dist_cmd->parsed()) return cmd_distance(g, scenario, eps, samples);
    if (cluster_cmd->parsed()) return cmd_cluster(g, scenario, eps, count, flip, samples);
  } catch (const cstar::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (dynamic_cast<const cstar::TooFar*>(&e)) return 2;
    if (dynamic_cast<const cstar::SingularFrame*>(&e) ||
        dynamic_cast<const cstar::DegenerateForm*>(&e) ||
        dynamic_cast<const cstar::IllDefined*>(&e) ||
        dynamic_cast<const cstar::ReadbackFailed*>(&e) ||
        dynamic_cast<const cstar::ConjugationFailed*>(&e) ||
        dynamic_cast<const cstar::NotInvertible*>(&e) ||
        dynamic_cast<const cstar::CompatibilityResidualExceeded*>(&e) ||
        dynamic_cast<const cstar::CompatibilityRequired*>(&e)) {
      return 3;
    }
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
