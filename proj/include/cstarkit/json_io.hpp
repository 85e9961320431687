#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "cstarkit/basic_construction.hpp"
#include "cstarkit/expectation.hpp"
#include "cstarkit/matrix.hpp"
#include "cstarkit/perturbation.hpp"
#include "cstarkit/scenarios.hpp"
#include "cstarkit/subalgebra.hpp"

namespace cstar {

using json = nlohmann::json;

inline json to_json(const CMatrix& m) {
  require_square(m);
  const Index n = m.rows();
  json re = json::array(), im = json::array();
  for (Index i = 0; i < n; ++i) {
    json rrow = json::array(), irow = json::array();
    for (Index j = 0; j < n; ++j) {
      rrow.push_back(m(i, j).real());
      irow.push_back(m(i, j).imag());
    }
    re.push_back(std::move(rrow));
    im.push_back(std::move(irow));
  }
  return json{{"dim", n}, {"re", std::move(re)}, {"im", std::move(im)}};
}

inline CMatrix matrix_from_json(const json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("re") || !j.contains("im")) {
    throw PreconditionFailed("matrix json requires keys dim, re, im");
  }
  const Index n = j.at("dim").get<Index>();
  if (n < 0) throw DimensionMismatch("matrix json: negative dim");
  const json& re = j.at("re");
  const json& im = j.at("im");
  if (!re.is_array() || !im.is_array() || static_cast<Index>(re.size()) != n ||
      static_cast<Index>(im.size()) != n) {
    throw DimensionMismatch("matrix json: re/im must be dim x dim arrays");
  }
  CMatrix m(n, n);
  for (Index i = 0; i < n; ++i) {
    const json& rrow = re.at(static_cast<size_t>(i));
    const json& irow = im.at(static_cast<size_t>(i));
    if (static_cast<Index>(rrow.size()) != n || static_cast<Index>(irow.size()) != n) {
      throw DimensionMismatch("matrix json: ragged row");
    }
    for (Index jj = 0; jj < n; ++jj) {
      m(i, jj) = Complex(rrow.at(static_cast<size_t>(jj)).get<double>(),
                         irow.at(static_cast<size_t>(jj)).get<double>());
    }
  }
  return m;
}

inline json to_json(const Subalgebra& a) {
  json basis = json::array();
  for (const CMatrix& b : a.basis) basis.push_back(to_json(b));
  return json{{"ambient_dim", a.ambient_dim}, {"basis", std::move(basis)}};
}

inline Subalgebra subalgebra_from_json(const json& j) {
  if (!j.is_object() || !j.contains("ambient_dim") || !j.contains("basis")) {
    throw PreconditionFailed("subalgebra json requires keys ambient_dim, basis");
  }
  Subalgebra a;
  a.ambient_dim = j.at("ambient_dim").get<Index>();
  for (const json& jb : j.at("basis")) {
    CMatrix m = matrix_from_json(jb);
    if (m.rows() != a.ambient_dim) {
      throw DimensionMismatch("subalgebra json: basis element dim mismatch");
    }
    a.basis.push_back(std::move(m));
  }
  return a;
}

inline json to_json(const CondExpectation& e) {
  json cols = json::array();
  for (Index c = 0; c < e.map.cols(); ++c) {
    json rrow = json::array(), irow = json::array();
    for (Index r = 0; r < e.map.rows(); ++r) {
      rrow.push_back(e.map(r, c).real());
      irow.push_back(e.map(r, c).imag());
    }
    cols.push_back(json{{"re", std::move(rrow)}, {"im", std::move(irow)}});
  }
  return json{{"source", to_json(e.source)},
              {"target", to_json(e.target)},
              {"matrix", json{{"rows", e.map.rows()}, {"cols", e.map.cols()},
                              {"columns", std::move(cols)}}}};
}

inline CondExpectation expectation_from_json(const json& j) {
  if (!j.is_object() || !j.contains("source") || !j.contains("target") || !j.contains("matrix")) {
    throw PreconditionFailed("expectation json requires keys source, target, matrix");
  }
  CondExpectation e;
  e.source = subalgebra_from_json(j.at("source"));
  e.target = subalgebra_from_json(j.at("target"));
  const json& jm = j.at("matrix");
  const Index rows = jm.at("rows").get<Index>();
  const Index cols = jm.at("cols").get<Index>();
  if (rows != e.source.dim() || cols != e.source.dim()) {
    throw DimensionMismatch("expectation json: the map must be square in source coordinates");
  }
  e.map.resize(rows, cols);
  const json& jcols = jm.at("columns");
  if (static_cast<Index>(jcols.size()) != cols) {
    throw DimensionMismatch("expectation json: wrong number of columns");
  }
  for (Index c = 0; c < cols; ++c) {
    const json& col = jcols.at(static_cast<size_t>(c));
    const json& re = col.at("re");
    const json& im = col.at("im");
    if (static_cast<Index>(re.size()) != rows || static_cast<Index>(im.size()) != rows) {
      throw DimensionMismatch("expectation json: column length mismatch");
    }
    for (Index r = 0; r < rows; ++r) {
      e.map(r, c) = Complex(re.at(static_cast<size_t>(r)).get<double>(),
                            im.at(static_cast<size_t>(r)).get<double>());
    }
  }
  return e;
}

inline json to_json(const QuasiBasis& qb) {
  json els = json::array();
  for (const CMatrix& u : qb.elements) els.push_back(to_json(u));
  return json{{"elements", std::move(els)},
              {"index", to_json(qb.index_element)},
              {"unit_ball", qb.in_unit_ball}};
}

inline QuasiBasis quasi_basis_from_json(const json& j) {
  if (!j.is_object() || !j.contains("elements") || !j.contains("index") ||
      !j.contains("unit_ball")) {
    throw PreconditionFailed("quasi-basis json requires keys elements, index, unit_ball");
  }
  QuasiBasis qb;
  for (const json& je : j.at("elements")) qb.elements.push_back(matrix_from_json(je));
  qb.index_element = matrix_from_json(j.at("index"));
  qb.in_unit_ball = j.at("unit_ball").get<bool>();
  return qb;
}

inline std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

inline json to_json(const ModuleOperator& op) {
  return json{{"matrix", to_json(CMatrix(op.mat))}, {"module_hash", hash_hex(op.module->content_hash)}};
}

inline ModuleOperator module_operator_from_json(const json& j, const ModulePtr& mod) {
  if (!j.is_object() || !j.contains("matrix") || !j.contains("module_hash")) {
    throw PreconditionFailed("module operator json requires keys matrix, module_hash");
  }
  if (j.at("module_hash").get<std::string>() != hash_hex(mod->content_hash)) {
    throw PreconditionFailed("module operator json: hash does not match the supplied module");
  }
  ModuleOperator op{mod, matrix_from_json(j.at("matrix"))};
  if (op.mat.rows() != mod->mdim()) {
    throw DimensionMismatch("module operator json: matrix dim does not match module");
  }
  return op;
}

inline json to_json(const BoundCheck& b) {
  return json{{"name", b.name}, {"lhs", b.lhs}, {"rhs", b.rhs}, {"slack", b.slack()}};
}

inline json to_json(const DistanceEstimate& d) {
  return json{{"lower", d.lower},
              {"upper", d.upper},
              {"jones_bound", d.jones_bound},
              {"jones_gap", d.jones_gap},
              {"sweep_bound", d.sweep_bound},
              {"method_notes", d.method_notes}};
}

inline json to_json(const PerturbationReport& r, bool include_timings = true) {
  json bounds = json::array();
  for (const BoundCheck& b : r.bounds) bounds.push_back(to_json(b));
  json out{{"success", r.success},
           {"scenario", r.scenario},
           {"planted_eps", r.planted_eps},
           {"unitary", r.unitary.size() ? to_json(r.unitary) : json(nullptr)},
           {"distance", to_json(r.distance)},
           {"n_quasi_basis", r.n_quasi_basis},
           {"gamma", r.gamma},
           {"d_upper_below_gamma", r.d_upper_below_gamma},
           {"delta", r.delta},
           {"conjugation_residual", r.conjugation_residual},
           {"u_commutes_with_c_residual", r.u_commutes_with_c_residual},
           {"u_in_generated_residual", r.u_in_generated_residual},
           {"psi_mult_residual", r.psi_mult_residual},
           {"psi_unital_residual", r.psi_unital_residual},
           {"psi_fixes_c_residual", r.psi_fixes_c_residual},
           {"bounds", std::move(bounds)},
           {"seed", r.seed}};
  if (include_timings) {
    json t = json::array();
    for (const StageTime& st : r.timings) t.push_back(json{{"stage", st.stage}, {"ms", st.ms}});
    out["timings"] = std::move(t);
  }
  return out;
}

inline json to_json(const ClusterReport& r) {
  json pairs = json::array();
  for (const PairAttempt& p : r.pairs) {
    json jp{{"i", p.i},
            {"j", p.j},
            {"jones_gap", p.jones_gap},
            {"attempted", p.attempted},
            {"merged", p.merged},
            {"error", p.error}};
    jp["witness"] = p.merged && p.witness.size() ? to_json(p.witness) : json(nullptr);
    pairs.push_back(std::move(jp));
  }
  return json{{"epsilon", r.epsilon},
              {"n_quasi_basis", r.n_quasi_basis},
              {"index_norm", r.index_norm},
              {"pairs", std::move(pairs)},
              {"classes", r.classes}};
}

inline json to_json(const ExpectationAudit& a) {
  return json{{"onto_target", a.onto_target},
              {"fixes_target", a.fixes_target},
              {"idempotent", a.idempotent},
              {"unital", a.unital},
              {"bimodule", a.bimodule},
              {"positivity_min", a.positivity_min},
              {"gram_min_eig", a.gram_min_eig}};
}

inline json to_json(const AuditReport& r) {
  json lemmas = json::array();
  for (const LemmaAudit& l : r.lemmas) {
    lemmas.push_back(json{{"name", l.name}, {"max_violation", l.max_violation}, {"trials", l.trials}});
  }
  return json{
      {"trials", r.trials}, {"seed", r.seed}, {"pass", r.pass()}, {"lemmas", std::move(lemmas)}};
}

}  // namespace cstar
