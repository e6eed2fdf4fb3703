#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "causalkit/dag.hpp"
#include "causalkit/dataset.hpp"
#include "causalkit/errors.hpp"
#include "causalkit/estimators.hpp"
#include "causalkit/highdim.hpp"
#include "causalkit/json_io.hpp"
#include "causalkit/propensity.hpp"
#include "causalkit/sem.hpp"

namespace py = pybind11;
using namespace causalkit;

#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)

namespace {

// The registered python exception type; written once at module init.
py::handle g_error_type;

py::object json_to_py(const nlohmann::json& j) {
  using vt = nlohmann::json::value_t;
  switch (j.type()) {
    case vt::boolean:
      return py::bool_(j.get<bool>());
    case vt::number_integer:
      return py::int_(j.get<long long>());
    case vt::number_unsigned:
      return py::int_(j.get<unsigned long long>());
    case vt::number_float:
      return py::float_(j.get<double>());
    case vt::string:
      return py::str(j.get<std::string>());
    case vt::array: {
      py::list out;
      for (const auto& item : j) out.append(json_to_py(item));
      return out;
    }
    case vt::object: {
      py::dict out;
      for (const auto& item : j.items()) out[py::str(item.key())] = json_to_py(item.value());
      return out;
    }
    default:
      return py::none();
  }
}

// "plugin", "cv", or a number; folds and seed only matter for "cv".
LambdaRule rule_from(const py::object& lam, int folds, std::uint64_t seed) {
  if (py::isinstance<py::str>(lam)) {
    const std::string name = lam.cast<std::string>();
    if (name == "plugin") return LambdaRule::plugin();
    if (name == "cv") return LambdaRule::cv(folds, seed);
    fail(ErrorCode::kArgument, "lambda must be 'plugin', 'cv', or a number: " + name);
  }
  return LambdaRule::fixed(lam.cast<double>());
}

Dataset dataset_from_dict(const py::dict& columns) {
  std::vector<std::string> names;
  std::vector<std::vector<double>> data;
  for (const auto& item : columns) {
    names.push_back(item.first.cast<std::string>());
    data.push_back(item.second.cast<std::vector<double>>());
  }
  return Dataset(std::move(names), std::move(data));
}

nlohmann::json lasso_json(const LassoFit& fit) {
  nlohmann::json j;
  j["coefficients"] = std::vector<double>(
      fit.coefficients.data(), fit.coefficients.data() + fit.coefficients.size());
  j["intercept"] = fit.intercept;
  j["lambda"] = fit.lambda;
  j["active"] = fit.active;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["kkt_violation"] = fit.kkt_violation;
  return j;
}

nlohmann::json choice_json(const LambdaChoice& choice) {
  nlohmann::json j;
  j["lambda"] = choice.lambda;
  j["loadings"] = std::vector<double>(choice.loadings.data(),
                                      choice.loadings.data() + choice.loadings.size());
  if (choice.sigma_hat > 0) j["sigma_hat"] = choice.sigma_hat;
  if (!choice.grid.empty()) {
    j["grid"] = choice.grid;
    j["cv_error"] = choice.cv_error;
  }
  return j;
}

Eigen::VectorXd default_loadings(const Eigen::MatrixXd& x) {
  Eigen::VectorXd out(x.cols());
  for (int j = 0; j < x.cols(); ++j) {
    const double mean = x.col(j).mean();
    out(j) = std::sqrt((x.col(j).array() - mean).square().mean());
  }
  return out;
}

py::object run_dml(const Dataset& ds, const std::string& method,
                   const py::object& lam, double level, int folds,
                   std::uint64_t seed) {
  const LambdaRule rule = rule_from(lam, folds, seed);
  DmlReport rep;
  if (method == "po") rep = partial_out(ds, rule, level);
  else if (method == "ds") rep = double_selection(ds, rule, level);
  else if (method == "db") rep = debiased_lasso(ds, rule, level);
  else rep = single_selection(ds, rule, level);
  return json_to_py(dml_json(rep, ds.covariate_names()));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "DAG identification queries, structural simulation, and "
            "treatment-effect estimation";

  g_error_type = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string msg =
          std::string(error_code_name(e.code())) + ": " + e.what();
      py::set_error(g_error_type, msg.c_str());
    }
  });

  py::class_<Dag>(m, "Dag")
      .def_static("parse", &Dag::parse, py::arg("text"),
                  "Build a graph from '#' comments, 'node NAME' lines, and "
                  "'A -> B' edges.")
      .def("serialize", &Dag::serialize)
      .def_property_readonly("nodes", &Dag::nodes)
      .def_property_readonly("edges", &Dag::edges)
      .def("has_node", &Dag::has_node, py::arg("name"))
      .def("has_edge", &Dag::has_edge, py::arg("from_node"), py::arg("to_node"))
      .def("parents", [](const Dag& g, const std::string& n) {
        return g.relatives(n, Relation::kParents);
      }, py::arg("node"))
      .def("children", [](const Dag& g, const std::string& n) {
        return g.relatives(n, Relation::kChildren);
      }, py::arg("node"))
      .def("ancestors", [](const Dag& g, const std::string& n) {
        return g.relatives(n, Relation::kAncestors);
      }, py::arg("node"), "Ancestors, the node itself included.")
      .def("descendants", [](const Dag& g, const std::string& n) {
        return g.relatives(n, Relation::kDescendants);
      }, py::arg("node"), "Strict descendants, the node itself excluded.")
      .def("topological_order", &Dag::topological_order)
      .def("__repr__", [](const Dag& g) {
        return "Dag(" + std::to_string(g.size()) + " nodes, " +
               std::to_string(g.edges().size()) + " edges)";
      });

  m.def("d_separated", &d_separated, py::arg("dag"), py::arg("x"), py::arg("y"),
        py::arg("given") = std::vector<std::string>{});
  m.def("backdoor_check",
        [](const Dag& g, const std::string& d, const std::string& y,
           const std::vector<std::string>& set) {
          return json_to_py(backdoor_json(check_backdoor_set(g, d, y, set)));
        },
        py::arg("dag"), py::arg("treatment"), py::arg("outcome"),
        py::arg("set") = std::vector<std::string>{});
  m.def("minimal_backdoor_sets", &minimal_backdoor_sets, py::arg("dag"),
        py::arg("treatment"), py::arg("outcome"), py::arg("max_size") = -1);
  m.def("swig",
        [](const Dag& g, const std::string& node, const std::string& label) {
          return json_to_py(swig_json(make_swig(g, node, label)));
        },
        py::arg("dag"), py::arg("node"), py::arg("label"),
        "Split-node intervention graph, serialized with its node mapping.");

  py::class_<Dataset>(m, "Dataset")
      .def(py::init(&dataset_from_dict), py::arg("columns"),
           "Column name -> list of values, in the given order.")
      .def_static("read_csv", &Dataset::read_csv, py::arg("path"))
      .def_static("from_csv_text", &Dataset::from_csv_text, py::arg("text"))
      .def("to_csv_text", &Dataset::to_csv_text)
      .def("write_csv", &Dataset::write_csv, py::arg("path"))
      .def_property_readonly("n_rows", &Dataset::n_rows)
      .def_property_readonly("columns", &Dataset::columns)
      .def("column", &Dataset::column, py::arg("name"))
      .def("set_roles", &Dataset::set_roles, py::arg("outcome"),
           py::arg("treatment"), py::arg("covariates") = std::vector<std::string>{})
      .def("__repr__", [](const Dataset& ds) {
        return "Dataset(" + std::to_string(ds.n_rows()) + " rows, " +
               std::to_string(ds.n_cols()) + " columns)";
      });

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("name", &Scenario::name)
      .def_readonly("outcome", &Scenario::outcome)
      .def_readonly("treatment", &Scenario::treatment)
      .def_readonly("covariates", &Scenario::covariates)
      .def("simulate",
           [](const Scenario& sc, int n, std::uint64_t seed) {
             Dataset ds = sc.model.simulate(n, seed);
             ds.set_roles(sc.outcome, sc.treatment, sc.covariates);
             return ds;
           },
           py::arg("n"), py::arg("seed"),
           "Draw a dataset with the scenario's roles already assigned.")
      .def("oracle",
           [](const Scenario& sc, int n, std::uint64_t seed) {
             const CounterfactualDraws cf = counterfactual_pairs(
                 sc.model, sc.treatment, sc.outcome, n, seed);
             double ate = 0;
             for (int i = 0; i < n; ++i) ate += cf.y1[i] - cf.y0[i];
             py::dict out;
             out["oracle_ate"] = ate / n;
             out["y0"] = cf.y0;
             out["y1"] = cf.y1;
             out["natural"] = cf.natural;
             return out;
           },
           py::arg("n"), py::arg("seed"),
           "Shared-noise counterfactual draws and their mean contrast.");

  m.def("make_scenario", &make_scenario, py::arg("name"),
        py::arg("params") = std::map<std::string, double>{});

  m.def("ate_wald",
        [](const Dataset& ds, double level) {
          return json_to_py(effect_json(ate_wald(ds, level)));
        },
        py::arg("dataset"), py::arg("level") = 0.95);
  m.def("risk_measures",
        [](const Dataset& ds) { return json_to_py(risk_json(risk_measures(ds))); },
        py::arg("dataset"));
  m.def("standardized_contrast",
        [](const Dataset& ds, const std::string& stratum) {
          return json_to_py(standardized_json(standardized_contrast(ds, stratum)));
        },
        py::arg("dataset"), py::arg("stratum"));
  m.def("relative_effect",
        [](const Dataset& ds, double level) {
          return json_to_py(effect_json(relative_effect(ds, level)));
        },
        py::arg("dataset"), py::arg("level") = 0.95);
  m.def("cate_interaction",
        [](const Dataset& ds, double level) {
          return json_to_py(cate_json(cate_interaction(ds, level)));
        },
        py::arg("dataset"), py::arg("level") = 0.95);

  m.def("fit_propensity",
        [](const Dataset& ds) {
          const PropensityModel model = fit_propensity(ds);
          nlohmann::json j = propensity_json(model, ds.covariate_names());
          j["scores"] = model.scores;
          return json_to_py(j);
        },
        py::arg("dataset"));
  m.def("ipw_ate",
        [](const Dataset& ds, const std::vector<double>& scores, bool stabilized,
           std::optional<std::pair<double, double>> truncate, double level) {
          IpwOptions opts;
          opts.stabilized = stabilized;
          opts.truncate_pct = truncate;
          return json_to_py(effect_json(ipw_ate(ds, scores, opts, level)));
        },
        py::arg("dataset"), py::arg("scores"), py::arg("stabilized") = false,
        py::arg("truncate") = std::nullopt, py::arg("level") = 0.95);
  m.def("balance_check",
        [](const Dataset& ds, const std::vector<double>& scores,
           const std::string& dict) {
          BalanceDictionary kind;
          if (dict == "raw") kind = BalanceDictionary::kRaw;
          else if (dict == "squares") kind = BalanceDictionary::kSquares;
          else if (dict == "interactions") kind = BalanceDictionary::kInteractions;
          else if (dict == "full") kind = BalanceDictionary::kFull;
          else fail(ErrorCode::kArgument, "unknown dictionary: " + dict);
          std::vector<std::string> terms;
          const Eigen::MatrixXd design = balance_dictionary(ds, kind, &terms);
          return json_to_py(balance_json(balance_check(ds, scores, design, terms)));
        },
        py::arg("dataset"), py::arg("scores"), py::arg("dict") = "full");

  m.def("lasso",
        [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lam,
           std::optional<Eigen::VectorXd> loadings) {
          const Eigen::VectorXd psi =
              loadings ? *loadings : default_loadings(x);
          return json_to_py(lasso_json(lasso(x, y, lam, psi)));
        },
        py::arg("x"), py::arg("y"), py::arg("lam"),
        py::arg("loadings") = std::nullopt,
        "Penalized fit; loadings default to the column standard deviations.");
  m.def("select_lambda",
        [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
           const py::object& rule, int folds, std::uint64_t seed) {
          return json_to_py(choice_json(select_lambda(x, y, rule_from(rule, folds, seed))));
        },
        py::arg("x"), py::arg("y"), py::arg("rule") = "plugin",
        py::arg("folds") = 10, py::arg("seed") = 0);

  const auto dml_doc = "Report dict matching the CLI JSON shape.";
  m.def("partial_out",
        [](const Dataset& ds, const py::object& lam, double level, int folds,
           std::uint64_t seed) { return run_dml(ds, "po", lam, level, folds, seed); },
        py::arg("dataset"), py::arg("lam") = "plugin", py::arg("level") = 0.95,
        py::arg("folds") = 10, py::arg("seed") = 0, dml_doc);
  m.def("double_selection",
        [](const Dataset& ds, const py::object& lam, double level, int folds,
           std::uint64_t seed) { return run_dml(ds, "ds", lam, level, folds, seed); },
        py::arg("dataset"), py::arg("lam") = "plugin", py::arg("level") = 0.95,
        py::arg("folds") = 10, py::arg("seed") = 0, dml_doc);
  m.def("debiased_lasso",
        [](const Dataset& ds, const py::object& lam, double level, int folds,
           std::uint64_t seed) { return run_dml(ds, "db", lam, level, folds, seed); },
        py::arg("dataset"), py::arg("lam") = "plugin", py::arg("level") = 0.95,
        py::arg("folds") = 10, py::arg("seed") = 0, dml_doc);
  m.def("single_selection",
        [](const Dataset& ds, const py::object& lam, double level, int folds,
           std::uint64_t seed) { return run_dml(ds, "ss", lam, level, folds, seed); },
        py::arg("dataset"), py::arg("lam") = "plugin", py::arg("level") = 0.95,
        py::arg("folds") = 10, py::arg("seed") = 0, dml_doc);
  m.def("ortho_check",
        [](const Dataset& ds, const std::string& probe, const py::object& lam,
           double level, int folds, std::uint64_t seed,
           const std::vector<double>& t_grid) {
          const LambdaRule rule = rule_from(lam, folds, seed);
          DmlReport rep;
          if (probe == "po") rep = partial_out(ds, rule, level);
          else if (probe == "single") rep = single_selection(ds, rule, level);
          else fail(ErrorCode::kArgument, "probe must be 'po' or 'single': " + probe);
          nlohmann::json j = ortho_json(orthogonality_check(ds, rep, t_grid, seed));
          j["fit"] = dml_json(rep, ds.covariate_names());
          return json_to_py(j);
        },
        py::arg("dataset"), py::arg("probe") = "po", py::arg("lam") = "plugin",
        py::arg("level") = 0.95, py::arg("folds") = 10, py::arg("seed") = 0,
        py::arg("t_grid") = std::vector<double>{1e-3, 1e-2, 1e-1},
        "Moment drift of the fitted estimator under nuisance perturbations.");

#ifdef CAUSALKIT_VERSION
  m.attr("__version__") = MACRO_STRINGIFY(CAUSALKIT_VERSION);
#else
  m.attr("__version__") = "dev";
#endif
}
