#include "causalkit/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace causalkit {

namespace {

void write_double(double x, std::string& out) {
  if (!std::isfinite(x)) {
    out += "null";
    return;
  }
  // %.16e = one leading digit plus sixteen fractional ones: 17 significant
  // digits, enough to reproduce any double exactly.
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  out += buf;
}

void write_value(const nlohmann::json& v, std::string& out, int depth) {
  const std::string pad(2 * depth, ' ');
  const std::string inner(2 * (depth + 1), ' ');
  switch (v.type()) {
    case nlohmann::json::value_t::null:
      out += "null";
      break;
    case nlohmann::json::value_t::boolean:
      out += v.get<bool>() ? "true" : "false";
      break;
    case nlohmann::json::value_t::number_integer:
      out += std::to_string(v.get<long long>());
      break;
    case nlohmann::json::value_t::number_unsigned:
      out += std::to_string(v.get<unsigned long long>());
      break;
    case nlohmann::json::value_t::number_float:
      write_double(v.get<double>(), out);
      break;
    case nlohmann::json::value_t::string:
      out += nlohmann::json(v.get<std::string>()).dump();
      break;
    case nlohmann::json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        break;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        out += inner;
        write_value(v[i], out, depth + 1);
        if (i + 1 < v.size()) out += ",";
        out += "\n";
      }
      out += pad + "]";
      break;
    }
    case nlohmann::json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        break;
      }
      out += "{\n";
      std::size_t i = 0;
      for (const auto& item : v.items()) {
        out += inner + nlohmann::json(item.key()).dump() + ": ";
        write_value(item.value(), out, depth + 1);
        if (++i < v.size()) out += ",";
        out += "\n";
      }
      out += pad + "}";
      break;
    }
    default:
      out += "null";
      break;
  }
}

nlohmann::json loadings_summary(const Eigen::VectorXd& loadings) {
  std::vector<double> v(loadings.data(), loadings.data() + loadings.size());
  std::sort(v.begin(), v.end());
  nlohmann::json j;
  j["min"] = v.front();
  j["median"] = v[v.size() / 2];
  j["max"] = v.back();
  return j;
}

std::vector<std::string> names_of(const std::vector<int>& indices,
                                  const std::vector<std::string>& covariates) {
  std::vector<std::string> out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(covariates.at(static_cast<size_t>(i)));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::string dump_json(const nlohmann::json& value) {
  std::string out;
  write_value(value, out, 0);
  out += "\n";
  return out;
}

std::string error_json(const Error& err) {
  nlohmann::json j;
  j["error"]["code"] = error_code_name(err.code());
  j["error"]["message"] = err.what();
  j["schema"] = kJsonSchema;
  return j.dump() + "\n";
}

nlohmann::json effect_json(const EffectReport& report) {
  nlohmann::json j;
  j["method"] = report.method;
  j["estimate"] = report.estimate;
  j["se"] = report.se;
  j["ci_low"] = report.ci_low;
  j["ci_high"] = report.ci_high;
  j["level"] = report.level;
  j["n"] = report.n;
  j["diagnostics"] = nlohmann::json::object();
  for (const auto& [key, value] : report.diagnostics) j["diagnostics"][key] = value;
  return j;
}

nlohmann::json risk_json(const RiskMeasures& measures) {
  nlohmann::json j;
  j["n_control"] = measures.means.n0;
  j["n_treated"] = measures.means.n1;
  j["risk_control"] = measures.means.theta0;
  j["risk_treated"] = measures.means.theta1;
  j["risk_difference"] = measures.rd;
  if (measures.rr) j["risk_ratio"] = *measures.rr;
  if (measures.odds_ratio) j["odds_ratio"] = *measures.odds_ratio;
  if (measures.nnt) j["nnt"] = *measures.nnt;
  return j;
}

nlohmann::json standardized_json(const StandardizedContrast& contrast) {
  nlohmann::json j;
  j["crude_risk0"] = contrast.crude_risk0;
  j["crude_risk1"] = contrast.crude_risk1;
  j["std_risk0"] = contrast.std_risk0;
  j["std_risk1"] = contrast.std_risk1;
  if (contrast.crude_rr) j["crude_rr"] = *contrast.crude_rr;
  if (contrast.std_rr) j["std_rr"] = *contrast.std_rr;
  j["table"] = nlohmann::json::array();
  for (const StratumRow& row : contrast.table) {
    nlohmann::json r;
    r["value"] = row.value;
    r["n_treated"] = row.n_treated;
    r["n_control"] = row.n_control;
    r["risk_treated"] = row.risk_treated;
    r["risk_control"] = row.risk_control;
    r["weight"] = row.weight;
    j["table"].push_back(std::move(r));
  }
  return j;
}

nlohmann::json cate_json(const CateReport& report) {
  nlohmann::json j;
  j["ate"] = effect_json(report.ate);
  j["intercept"] = report.intercept;
  j["modifiers"] = nlohmann::json::array();
  for (std::size_t i = 0; i < report.covariates.size(); ++i) {
    nlohmann::json r;
    r["name"] = report.covariates[i];
    r["baseline_coef"] = report.baseline_coef[i];
    r["baseline_se"] = report.baseline_se[i];
    r["interaction_coef"] = report.interaction_coef[i];
    r["interaction_se"] = report.interaction_se[i];
    j["modifiers"].push_back(std::move(r));
  }
  return j;
}

nlohmann::json propensity_json(const PropensityModel& model,
                               const std::vector<std::string>& covariates) {
  nlohmann::json j;
  j["converged"] = model.converged;
  j["iterations"] = model.iterations;
  j["clipped"] = model.clipped;
  j["coefficients"]["(intercept)"] = model.coefficients(0);
  for (std::size_t i = 0; i < covariates.size(); ++i) {
    j["coefficients"][covariates[i]] = model.coefficients(static_cast<int>(i) + 1);
  }
  return j;
}

nlohmann::json balance_json(const BalanceReport& report) {
  nlohmann::json j;
  j["f_stat"] = report.f_stat;
  j["f_p"] = report.f_p;
  j["robust_wald"] = report.robust_wald;
  j["robust_p"] = report.robust_p;
  j["df1"] = report.df1;
  j["df2"] = report.df2;
  j["terms"] = nlohmann::json::array();
  for (std::size_t i = 0; i < report.terms.size(); ++i) {
    nlohmann::json r;
    r["name"] = report.terms[i];
    r["coef"] = report.coef[i];
    r["t_robust"] = report.t_robust[i];
    j["terms"].push_back(std::move(r));
  }
  return j;
}

nlohmann::json bootstrap_json(const BootstrapResult& result) {
  nlohmann::json j;
  j["se"] = result.se;
  j["ci_low"] = result.ci_low;
  j["ci_high"] = result.ci_high;
  j["level"] = result.level;
  j["requested"] = result.requested;
  j["failures"] = result.failures;
  return j;
}

nlohmann::json dml_json(const DmlReport& report,
                        const std::vector<std::string>& covariates) {
  const bool has_d_stage = report.method != "single_selection";
  nlohmann::json j;
  j["method"] = report.method;
  j["alpha_hat"] = report.alpha_hat;
  j["se"] = report.se;
  j["ci_low"] = report.ci_low;
  j["ci_high"] = report.ci_high;
  j["level"] = report.level;
  j["n"] = report.n;
  j["lambda"]["y"] = report.lambda_y;
  j["selected"]["y"] = names_of(report.selected_y, covariates);
  j["loadings"]["y"] = loadings_summary(report.fit_y.loadings);
  if (has_d_stage) {
    j["lambda"]["d"] = report.lambda_d;
    j["selected"]["d"] = names_of(report.selected_d, covariates);
    j["loadings"]["d"] = loadings_summary(report.fit_d.loadings);
  }
  std::set<std::string> uni;
  for (int i : report.selected_y) uni.insert(covariates.at(static_cast<size_t>(i)));
  if (has_d_stage) {
    for (int i : report.selected_d) uni.insert(covariates.at(static_cast<size_t>(i)));
  }
  j["selected_controls"] = std::vector<std::string>(uni.begin(), uni.end());
  j["kkt_max_violation"] = report.kkt_max_violation;
  if (!report.final_controls.empty() || report.method == "double_selection" ||
      report.method == "single_selection") {
    j["final_controls"] = names_of(report.final_controls, covariates);
  }
  return j;
}

nlohmann::json ortho_json(const OrthogonalityReport& report) {
  nlohmann::json j;
  j["moment_at_zero"] = report.moment_at_zero;
  j["slope"] = report.slope;
  j["rows"] = nlohmann::json::array();
  for (const OrthogonalityRow& row : report.rows) {
    nlohmann::json r;
    r["t"] = row.t;
    r["moment_abs"] = row.moment_abs;
    j["rows"].push_back(std::move(r));
  }
  return j;
}

nlohmann::json backdoor_json(const BackdoorCheck& check) {
  nlohmann::json j;
  j["valid"] = check.valid;
  switch (check.failure) {
    case BackdoorFailure::kNone:
      j["failure"] = "none";
      break;
    case BackdoorFailure::kDescendantInSet:
      j["failure"] = "descendant_in_set";
      j["offending_node"] = check.offending_node;
      break;
    case BackdoorFailure::kOpenBackdoorPath:
      j["failure"] = "open_backdoor_path";
      j["witness_path"] = check.witness_path->to_string();
      break;
  }
  return j;
}

nlohmann::json swig_json(const Swig& swig) {
  nlohmann::json j;
  j["graph"] = swig.graph.serialize();
  j["split_node"] = swig.split_node;
  j["natural_node"] = swig.natural_node;
  j["intervention_node"] = swig.intervention_node;
  j["label"] = swig.label;
  j["renamed"] = nlohmann::json::object();
  for (const auto& [original, renamed] : swig.renamed) j["renamed"][original] = renamed;
  return j;
}

}  // namespace causalkit
