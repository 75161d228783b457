#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>
#include <vector>

#include "pfml/errors.hpp"
#include "pfml/metrics.hpp"
#include "pfml/model.hpp"
#include "pfml/semantics.hpp"
#include "pfml/synthesis.hpp"
#include "pfml/syntax.hpp"
#include "pfml/workbench.hpp"

namespace py = pybind11;
using namespace pfml;

namespace {

Model load_model(const std::string& json_text, const std::string& role) {
  return model_from_json_text(json_text, role);
}

py::dict validate_json(const std::string& json_text) {
  py::dict out;
  py::list violations;
  try {
    auto outcome = validate_model(raw_model_from_json_text(json_text));
    out["valid"] = outcome.ok();
    for (const auto& v : outcome.violations) {
      py::dict d;
      d["location"] = v.location;
      d["message"] = v.message;
      violations.append(d);
    }
  } catch (const Error& e) {
    out["valid"] = false;
    py::dict d;
    d["location"] = "file";
    d["message"] = std::string(e.what());
    violations.append(d);
  }
  out["violations"] = violations;
  return out;
}

std::map<std::string, std::string> eval_concept_py(const Model& m,
                                                   const std::string& text) {
  Concept c = parse_concept(text);
  Valuation v = eval_concept(m, c);
  std::map<std::string, std::string> out;
  for (int s = 0; s < m.num_states(); ++s) out[m.state_name(s)] = v[s].str();
  return out;
}

std::string eval_formula_py(const Model& m, const std::string& text,
                            const std::map<std::string, std::string>& env) {
  Formula f = parse_formula(text);
  Env e;
  for (const auto& [var, state] : env) e[var] = m.state_index(state);
  return eval_formula(m, f, e).str();
}

Method method_from(const std::string& name) {
  auto m = parse_method(name);
  if (!m || *m == Method::LogicalLB || *m == Method::LogicalWitness)
    throw Error("method must be wasserstein, kantorovich or game");
  return *m;
}

std::string distance_py(const Model& m, int depth, const std::string& a,
                        const std::string& b, const std::string& method,
                        int support_bound) {
  MetricEngine engine(m, method_from(method), support_bound);
  return engine.distance(depth, m.state_index(a), m.state_index(b)).str();
}

py::list distance_table_py(const Model& m, int depth, const std::string& method,
                           int support_bound) {
  MetricEngine engine(m, method_from(method), support_bound);
  DistanceTable t = engine.table(depth);
  py::list out;
  for (int i = 0; i < t.n; ++i)
    for (int j = i + 1; j < t.n; ++j) {
      py::dict d;
      d["a"] = m.state_name(i);
      d["b"] = m.state_name(j);
      d["value"] = t.at(i, j).str();
      out.append(d);
    }
  return out;
}

py::dict synthesize_py(const Model& m, int depth, const std::string& a,
                       const std::string& b) {
  WitnessCertificate cert =
      synthesize_witness(m, depth, m.state_index(a), m.state_index(b));
  py::dict out;
  out["pair"] = py::make_tuple(a, b);
  out["depth"] = depth;
  out["concept"] = print_concept(cert.concept_);
  out["achieved"] = cert.achieved.str();
  out["target"] = cert.claimed.str();
  out["valid"] = cert.valid;
  return out;
}

std::string gaifman_py(const Model& m, const std::string& a, const std::string& b) {
  auto d = gaifman_distance(m, m.state_index(a), m.state_index(b));
  return d ? std::to_string(*d) : std::string("inf");
}

Model restrict_py(const Model& m, const std::string& a, int k) {
  return restrict_model(m, m.state_index(a), k);
}

py::tuple unravel_py(const Model& m, const std::string& a, int k) {
  auto [tree, root] = unravel(m, m.state_index(a), k);
  std::string root_name = tree.state_name(root);
  return py::make_tuple(std::move(tree), root_name);
}

Model union_py(const Model& m, const Model& other) {
  return disjoint_union({&m, &other}).model;
}

}  // namespace

PYBIND11_MODULE(_pfml, mod) {
  mod.doc() = "Exact workbench for probabilistic fuzzy modal logic: evaluation, "
              "behavioural distances, distinguishing-concept synthesis.";

  py::register_exception<Error>(mod, "PfmlError");

  py::class_<Model>(mod, "Model")
      .def_property_readonly("states", &Model::states)
      .def_property_readonly("atoms", &Model::atom_names)
      .def_property_readonly("roles", &Model::role_names)
      .def("to_json", &model_to_json_text)
      .def("hash", &model_hash)
      .def("__repr__", [](const Model& m) {
        return "<pfml.Model with " + std::to_string(m.num_states()) + " states>";
      });

  mod.def("load_model", &load_model, py::arg("json_text"), py::arg("role") = "r");
  mod.def("load_model_file", &model_from_file, py::arg("path"), py::arg("role") = "r");
  mod.def("validate", &validate_json, py::arg("json_text"));
  mod.def("eval_concept", &eval_concept_py, py::arg("model"), py::arg("concept"));
  mod.def("eval_formula", &eval_formula_py, py::arg("model"), py::arg("formula"),
          py::arg("env") = std::map<std::string, std::string>{});
  mod.def("distance", &distance_py, py::arg("model"), py::arg("depth"),
          py::arg("a"), py::arg("b"), py::arg("method") = "wasserstein",
          py::arg("support_bound") = 5);
  mod.def("distance_table", &distance_table_py, py::arg("model"), py::arg("depth"),
          py::arg("method") = "wasserstein", py::arg("support_bound") = 5);
  mod.def("synthesize", &synthesize_py, py::arg("model"), py::arg("depth"),
          py::arg("a"), py::arg("b"));
  mod.def("concept_rank",
          [](const std::string& text) { return rank(parse_concept(text)); });
  mod.def("formula_qrank",
          [](const std::string& text) { return qrank(parse_formula(text)); });
  mod.def("standard_translation", [](const std::string& text, const std::string& x) {
    return print_formula(standard_translation(parse_concept(text), x));
  });
  mod.def("gaifman_distance", &gaifman_py, py::arg("model"), py::arg("a"), py::arg("b"));
  mod.def("restrict", &restrict_py, py::arg("model"), py::arg("a"), py::arg("k"));
  mod.def("unravel", &unravel_py, py::arg("model"), py::arg("a"), py::arg("k"));
  mod.def("disjoint_union", &union_py, py::arg("model"), py::arg("other"));
}
