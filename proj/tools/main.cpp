#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "causalkit/dag.hpp"
#include "causalkit/dataset.hpp"
#include "causalkit/errors.hpp"
#include "causalkit/estimators.hpp"
#include "causalkit/highdim.hpp"
#include "causalkit/json_io.hpp"
#include "causalkit/propensity.hpp"
#include "causalkit/sem.hpp"

using namespace causalkit;

namespace {

// 0 ok; 2 the input text failed to parse; 3 the query or estimate failed on
// otherwise well-formed inputs; 4 the request itself was malformed.
int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse:
    case ErrorCode::kCycle:
      return 2;
    case ErrorCode::kArgument:
      return 4;
    default:
      return 3;
  }
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("CAUSAL_KIT_SEED")) {
    char* end = nullptr;
    const std::uint64_t value = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
      fail(ErrorCode::kArgument, "CAUSAL_KIT_SEED must be an unsigned integer");
    }
    return value;
  }
  return 0;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kParse, "cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit_doc(const nlohmann::json& doc, const std::string& out_path) {
  const std::string text = dump_json(doc);
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) fail(ErrorCode::kArgument, "cannot open output file: " + out_path);
  out << text;
}

nlohmann::json run_doc(const std::string& command, nlohmann::json config,
                       nlohmann::json result) {
  nlohmann::json j;
  j["schema"] = kJsonSchema;
  j["command"] = command;
  j["config"] = std::move(config);
  j["result"] = std::move(result);
  return j;
}

// An explicit empty value ("--given ''" or a trailing comma) means "none".
std::vector<std::string> drop_empty(std::vector<std::string> names) {
  std::erase(names, std::string());
  return names;
}

double parse_number(const std::string& text, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double value = std::stod(text, &pos);
    if (pos != text.size()) fail(ErrorCode::kArgument, "");
    return value;
  } catch (const Error&) {
    fail(ErrorCode::kArgument, what + " is not a number: " + text);
  } catch (const std::exception&) {
    fail(ErrorCode::kArgument, what + " is not a number: " + text);
  }
}

// --- dag ------------------------------------------------------------------

struct DagArgs {
  std::string file;
  std::string x, y, d, node, label;
  std::vector<std::string> given, set;
  int max_size = -1;
  std::string out;
};

void run_dsep(const DagArgs& a) {
  const Dag dag = Dag::parse(read_file(a.file));
  const std::vector<std::string> given = drop_empty(a.given);
  const bool separated = d_separated(dag, a.x, a.y, given);
  nlohmann::json config{{"file", a.file}, {"x", a.x}, {"y", a.y}, {"given", given}};
  emit_doc(run_doc("dag dsep", config, {{"d_separated", separated}}), a.out);
}

void run_backdoor(const DagArgs& a) {
  const Dag dag = Dag::parse(read_file(a.file));
  const std::vector<std::string> set = drop_empty(a.set);
  const BackdoorCheck check = check_backdoor_set(dag, a.d, a.y, set);
  nlohmann::json config{{"file", a.file}, {"d", a.d}, {"y", a.y}, {"set", set}};
  emit_doc(run_doc("dag backdoor", config, backdoor_json(check)), a.out);
}

void run_minsets(const DagArgs& a) {
  const Dag dag = Dag::parse(read_file(a.file));
  const auto sets = minimal_backdoor_sets(dag, a.d, a.y, a.max_size);
  nlohmann::json config{
      {"file", a.file}, {"d", a.d}, {"y", a.y}, {"max_size", a.max_size}};
  emit_doc(run_doc("dag minsets", config, {{"sets", sets}}), a.out);
}

void run_swig(const DagArgs& a) {
  const Dag dag = Dag::parse(read_file(a.file));
  const Swig swig = make_swig(dag, a.node, a.label);
  nlohmann::json config{{"file", a.file}, {"node", a.node}, {"label", a.label}};
  emit_doc(run_doc("dag swig", config, swig_json(swig)), a.out);
}

// --- simulate -------------------------------------------------------------

struct SimulateArgs {
  std::string scenario;
  std::string out_csv;
  int n = 0;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> params;
  std::string sidecar;
};

void run_simulate(const SimulateArgs& a) {
  if (a.n < 1) fail(ErrorCode::kArgument, "n must be a positive integer");
  std::map<std::string, double> params;
  for (const std::string& kv : a.params) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      fail(ErrorCode::kArgument, "parameters take the form name=value: " + kv);
    }
    params[kv.substr(0, eq)] = parse_number(kv.substr(eq + 1), "parameter " + kv.substr(0, eq));
  }
  const std::uint64_t seed = resolve_seed(a.seed);

  Scenario sc = make_scenario(a.scenario, params);
  Dataset ds = sc.model.simulate(a.n, seed);
  ds.set_roles(sc.outcome, sc.treatment, sc.covariates);
  ds.write_csv(a.out_csv);

  // Shared-noise oracle for the same seed; rows line up with the CSV.
  const CounterfactualDraws cf =
      counterfactual_pairs(sc.model, sc.treatment, sc.outcome, a.n, seed);
  double oracle_ate = 0;
  for (int i = 0; i < a.n; ++i) oracle_ate += cf.y1[i] - cf.y0[i];
  oracle_ate /= a.n;

  nlohmann::json result;
  result["oracle_ate"] = oracle_ate;
  bool natural_binary = true;
  for (double v : cf.natural) natural_binary = natural_binary && (v == 0 || v == 1);
  if (natural_binary) {
    double att = 0, atc = 0;
    int n1 = 0, n0 = 0;
    for (int i = 0; i < a.n; ++i) {
      if (cf.natural[i] == 1) {
        att += cf.y1[i] - cf.y0[i];
        ++n1;
      } else {
        atc += cf.y1[i] - cf.y0[i];
        ++n0;
      }
    }
    if (n1 > 0) result["oracle_att"] = att / n1;
    if (n0 > 0) result["oracle_atc"] = atc / n0;
    if (n1 > 0 && n0 > 0) {
      const GroupMeans gm = group_means(ds);
      result["crude_contrast"] = gm.theta1 - gm.theta0;
    }
  }
  result["params"] = params.empty() ? nlohmann::json::object() : nlohmann::json(params);
  result["seed"] = seed;
  result["roles"] = {{"y", sc.outcome}, {"d", sc.treatment}, {"x", sc.covariates}};

  nlohmann::json config{{"scenario", a.scenario},
                        {"n", a.n},
                        {"seed", seed},
                        {"params", result["params"]},
                        {"csv", a.out_csv}};
  const std::string sidecar = a.sidecar.empty() ? a.out_csv + ".json" : a.sidecar;
  config["sidecar"] = sidecar;
  const nlohmann::json doc = run_doc("simulate", config, result);
  emit_doc(doc, sidecar);
  std::cout << dump_json(doc);
}

// --- estimate -------------------------------------------------------------

struct EstimateArgs {
  std::string method;
  std::string data;
  std::string y, d;
  std::vector<std::string> x;
  std::string stratum;
  std::string scores = "fit";
  double level = 0.95;
  std::optional<std::uint64_t> seed;
  std::string lambda = "plugin";
  int folds = 10;
  std::vector<double> truncate;
  bool stabilized = false;
  int jobs = 1;
  int boot = -1;
  std::string dict = "full";
  std::string probe = "po";
  std::string out;
};

LambdaRule lambda_rule(const EstimateArgs& a, std::uint64_t seed) {
  if (a.lambda == "plugin") return LambdaRule::plugin();
  if (a.lambda == "cv") return LambdaRule::cv(a.folds, seed);
  return LambdaRule::fixed(parse_number(a.lambda, "--lambda"));
}

BalanceDictionary dictionary_kind(const std::string& name) {
  if (name == "raw") return BalanceDictionary::kRaw;
  if (name == "squares") return BalanceDictionary::kSquares;
  if (name == "interactions") return BalanceDictionary::kInteractions;
  if (name == "full") return BalanceDictionary::kFull;
  fail(ErrorCode::kArgument,
       "--dict must be raw, squares, interactions, or full: " + name);
}

// Score source: the literal "fit" refits a logistic model; anything else
// names a CSV column of known scores.
std::vector<double> resolve_scores(const Dataset& ds, const std::string& mode,
                                   PropensityModel* model) {
  if (mode == "fit") {
    *model = fit_propensity(ds);
    return model->scores;
  }
  return ds.column(mode);
}

void run_estimate(const EstimateArgs& a) {
  Dataset ds = Dataset::read_csv(a.data);
  std::vector<std::string> covs = drop_empty(a.x);
  if (covs.empty()) {
    for (const std::string& col : ds.columns()) {
      if (col == a.y || col == a.d || col == a.stratum) continue;
      if (a.scores != "fit" && col == a.scores) continue;
      covs.push_back(col);
    }
  }
  ds.set_roles(a.y, a.d, covs);
  const std::uint64_t seed = resolve_seed(a.seed);
  const int boot = a.boot >= 0 ? a.boot : (a.method == "ipw" ? 200 : 0);

  nlohmann::json config{{"data", a.data}, {"y", a.y},         {"d", a.d},
                        {"x", covs},      {"level", a.level}, {"seed", seed}};
  nlohmann::json result;

  if (a.method == "ate") {
    result = effect_json(ate_wald(ds, a.level));
  } else if (a.method == "risk") {
    result = risk_json(risk_measures(ds));
  } else if (a.method == "standardize") {
    if (a.stratum.empty()) fail(ErrorCode::kArgument, "standardize needs --stratum");
    config["stratum"] = a.stratum;
    result = standardized_json(standardized_contrast(ds, a.stratum));
  } else if (a.method == "relative") {
    config["boot"] = boot;
    result = effect_json(relative_effect(ds, a.level));
    if (boot > 0) {
      const auto stat = [&](const Dataset& draw) {
        return relative_effect(draw, a.level).estimate;
      };
      result["bootstrap"] =
          bootstrap_json(bootstrap(stat, ds, boot, seed, a.level, a.jobs));
    }
  } else if (a.method == "cate") {
    result = cate_json(cate_interaction(ds, a.level));
  } else if (a.method == "ipw") {
    config["scores"] = a.scores;
    config["stabilized"] = a.stabilized;
    config["boot"] = boot;
    config["jobs"] = a.jobs;
    IpwOptions opts;
    opts.stabilized = a.stabilized;
    if (!a.truncate.empty()) {
      if (a.truncate.size() != 2) {
        fail(ErrorCode::kArgument, "--truncate takes two percentiles, e.g. 1,99");
      }
      opts.truncate_pct = {a.truncate[0], a.truncate[1]};
      config["truncate"] = a.truncate;
    }
    PropensityModel model;
    const std::vector<double> scores = resolve_scores(ds, a.scores, &model);
    result = effect_json(ipw_ate(ds, scores, opts, a.level));
    if (a.scores == "fit") result["propensity"] = propensity_json(model, covs);
    if (boot > 0) {
      // The honest interval: refit the score model inside every replicate.
      const auto stat = [&](const Dataset& draw) {
        PropensityModel m;
        return ipw_ate(draw, resolve_scores(draw, a.scores, &m), opts, a.level)
            .estimate;
      };
      result["bootstrap"] =
          bootstrap_json(bootstrap(stat, ds, boot, seed, a.level, a.jobs));
    }
  } else if (a.method == "balance") {
    config["scores"] = a.scores;
    config["dict"] = a.dict;
    PropensityModel model;
    const std::vector<double> scores = resolve_scores(ds, a.scores, &model);
    std::vector<std::string> terms;
    const Eigen::MatrixXd dict = balance_dictionary(ds, dictionary_kind(a.dict), &terms);
    result = balance_json(balance_check(ds, scores, dict, terms));
    if (a.scores == "fit") result["propensity"] = propensity_json(model, covs);
  } else if (a.method == "dml-po" || a.method == "dml-ds" || a.method == "dml-db") {
    config["lambda"] = a.lambda;
    if (a.lambda == "cv") config["folds"] = a.folds;
    const LambdaRule rule = lambda_rule(a, seed);
    DmlReport rep;
    if (a.method == "dml-po") rep = partial_out(ds, rule, a.level);
    if (a.method == "dml-ds") rep = double_selection(ds, rule, a.level);
    if (a.method == "dml-db") rep = debiased_lasso(ds, rule, a.level);
    result = dml_json(rep, covs);
  } else if (a.method == "ortho-check") {
    config["lambda"] = a.lambda;
    if (a.lambda == "cv") config["folds"] = a.folds;
    config["probe"] = a.probe;
    const LambdaRule rule = lambda_rule(a, seed);
    DmlReport rep;
    if (a.probe == "po") {
      rep = partial_out(ds, rule, a.level);
    } else if (a.probe == "single") {
      rep = single_selection(ds, rule, a.level);
    } else {
      fail(ErrorCode::kArgument, "--probe must be po or single: " + a.probe);
    }
    result = ortho_json(orthogonality_check(ds, rep, {1e-3, 1e-2, 1e-1}, seed));
    result["fit"] = dml_json(rep, covs);
  }

  emit_doc(run_doc("estimate " + a.method, config, result), a.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DAG queries, structural simulation, and treatment-effect estimation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "causalkit 0.1.0");

  DagArgs dsep_args, backdoor_args, minsets_args, swig_args;
  CLI::App* dag_cmd = app.add_subcommand("dag", "queries on a DAG text file");
  dag_cmd->require_subcommand(1);

  CLI::App* dsep = dag_cmd->add_subcommand("dsep", "test d-separation of two nodes");
  dsep->add_option("file", dsep_args.file, "DAG file")->required();
  dsep->add_option("--x", dsep_args.x, "first node")->required();
  dsep->add_option("--y", dsep_args.y, "second node")->required();
  dsep->add_option("--given", dsep_args.given, "conditioning nodes")->delimiter(',');
  dsep->add_option("--out", dsep_args.out, "write JSON here instead of stdout");

  CLI::App* backdoor = dag_cmd->add_subcommand("backdoor", "check one adjustment set");
  backdoor->add_option("file", backdoor_args.file, "DAG file")->required();
  backdoor->add_option("--d", backdoor_args.d, "treatment node")->required();
  backdoor->add_option("--y", backdoor_args.y, "outcome node")->required();
  backdoor->add_option("--set", backdoor_args.set, "candidate set")->delimiter(',');
  backdoor->add_option("--out", backdoor_args.out, "write JSON here instead of stdout");

  CLI::App* minsets = dag_cmd->add_subcommand("minsets", "minimal valid adjustment sets");
  minsets->add_option("file", minsets_args.file, "DAG file")->required();
  minsets->add_option("--d", minsets_args.d, "treatment node")->required();
  minsets->add_option("--y", minsets_args.y, "outcome node")->required();
  minsets->add_option("--max-size", minsets_args.max_size, "largest set size; -1 = unbounded");
  minsets->add_option("--out", minsets_args.out, "write JSON here instead of stdout");

  CLI::App* swig = dag_cmd->add_subcommand("swig", "split-node intervention graph");
  swig->add_option("file", swig_args.file, "DAG file")->required();
  swig->add_option("--node", swig_args.node, "node to split")->required();
  swig->add_option("--label", swig_args.label, "intervention label")->required();
  swig->add_option("--out", swig_args.out, "write JSON here instead of stdout");

  SimulateArgs sim_args;
  CLI::App* simulate = app.add_subcommand("simulate", "draw a scenario dataset with its oracle");
  simulate->add_option("scenario", sim_args.scenario, "scenario name")->required();
  simulate->add_option("out", sim_args.out_csv, "output CSV path")->required();
  simulate->add_option("--n", sim_args.n, "rows to draw")->required();
  simulate->add_option("--seed", sim_args.seed, "RNG seed (CAUSAL_KIT_SEED, then 0)");
  simulate->add_option("--param", sim_args.params, "scenario parameter name=value");
  simulate->add_option("--sidecar", sim_args.sidecar, "oracle JSON path (default <out>.json)");

  EstimateArgs est_args;
  CLI::App* estimate = app.add_subcommand("estimate", "run an estimator on a CSV");
  estimate->add_option("method", est_args.method, "estimator")
      ->required()
      ->check(CLI::IsMember({"ate", "risk", "standardize", "relative", "ipw", "balance",
                             "cate", "dml-po", "dml-ds", "dml-db", "ortho-check"}));
  estimate->add_option("data", est_args.data, "input CSV path")->required();
  estimate->add_option("--y", est_args.y, "outcome column")->required();
  estimate->add_option("--d", est_args.d, "treatment column")->required();
  estimate->add_option("--x", est_args.x, "covariate columns (default: all others)")
      ->delimiter(',');
  estimate->add_option("--stratum", est_args.stratum, "stratum column (standardize)");
  estimate->add_option("--scores", est_args.scores,
                       "'fit' or a column of known propensity scores");
  estimate->add_option("--level", est_args.level, "confidence level");
  estimate->add_option("--seed", est_args.seed, "RNG seed (CAUSAL_KIT_SEED, then 0)");
  estimate->add_option("--lambda", est_args.lambda, "plugin, cv, or a fixed value");
  estimate->add_option("--folds", est_args.folds, "cross-validation folds");
  estimate->add_option("--truncate", est_args.truncate, "weight percentiles, e.g. 1,99")
      ->delimiter(',');
  estimate->add_flag("--stabilized", est_args.stabilized, "normalize weights within arms");
  estimate->add_option("--jobs", est_args.jobs, "bootstrap worker threads");
  estimate->add_option("--boot", est_args.boot, "bootstrap replicates (ipw default 200)");
  estimate->add_option("--dict", est_args.dict, "balance dictionary: raw|squares|interactions|full");
  estimate->add_option("--probe", est_args.probe, "ortho-check target: po|single");
  estimate->add_option("--out", est_args.out, "write JSON here instead of stdout");

  dsep->callback([&] { run_dsep(dsep_args); });
  backdoor->callback([&] { run_backdoor(backdoor_args); });
  minsets->callback([&] { run_minsets(minsets_args); });
  swig->callback([&] { run_swig(swig_args); });
  simulate->callback([&] { run_simulate(sim_args); });
  estimate->callback([&] { run_estimate(est_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << error_json(Error(ErrorCode::kArgument, e.what()));
    return 4;
  } catch (const Error& e) {
    std::cerr << error_json(e);
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << error_json(Error(ErrorCode::kEstimation, e.what()));
    return 3;
  }
  return 0;
}
