#include "causalkit/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>

#include "causalkit/errors.hpp"
#include "causalkit/linalg.hpp"
#include "causalkit/rng.hpp"

namespace causalkit {
namespace {

constexpr std::uint64_t kResampleKey = 0x626f6f74;  // distinct draw family

void check_level(double level) {
  if (!(level > 0 && level < 1)) {
    fail(ErrorCode::kArgument, "confidence level must lie in (0, 1)");
  }
}

void check_binary_outcome(const Dataset& ds) {
  for (double v : ds.outcome()) {
    if (v != 0.0 && v != 1.0) {
      fail(ErrorCode::kArgument,
           "outcome column '" + ds.outcome_name() + "' is not binary 0/1");
    }
  }
}

struct ArmStats {
  double mean0 = 0, mean1 = 0;
  double var0 = 0, var1 = 0;  // n_d - 1 denominators
  int n0 = 0, n1 = 0;
};

// Two-pass per-arm means and variances; requires at least two rows per arm.
ArmStats arm_stats(const Dataset& ds) {
  const GroupMeans gm = group_means(ds);
  if (gm.n0 < 2 || gm.n1 < 2) {
    fail(ErrorCode::kEstimation,
         "each arm needs at least two rows for a variance");
  }
  ArmStats st;
  st.mean0 = gm.theta0;
  st.mean1 = gm.theta1;
  st.n0 = gm.n0;
  st.n1 = gm.n1;
  const auto& y = ds.outcome();
  const auto& d = ds.treatment();
  for (size_t i = 0; i < y.size(); ++i) {
    if (d[i] == 1.0) {
      st.var1 += (y[i] - st.mean1) * (y[i] - st.mean1);
    } else {
      st.var0 += (y[i] - st.mean0) * (y[i] - st.mean0);
    }
  }
  st.var0 /= gm.n0 - 1;
  st.var1 /= gm.n1 - 1;
  return st;
}

EffectReport wald_report(std::string method, double estimate, double se,
                         double level, int n) {
  EffectReport r;
  r.method = std::move(method);
  r.estimate = estimate;
  r.se = se;
  r.level = level;
  r.n = n;
  const double z = z_quantile(level);
  r.ci_low = estimate - z * se;
  r.ci_high = estimate + z * se;
  return r;
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0;
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

GroupMeans group_means(const Dataset& ds) {
  ds.require_binary_treatment();
  const auto& y = ds.outcome();
  const auto& d = ds.treatment();
  GroupMeans gm;
  double sum0 = 0, sum1 = 0;
  for (size_t i = 0; i < y.size(); ++i) {
    if (d[i] == 1.0) {
      sum1 += y[i];
      ++gm.n1;
    } else {
      sum0 += y[i];
      ++gm.n0;
    }
  }
  if (gm.n1 == 0) fail(ErrorCode::kEmptyArm, "treated arm is empty");
  if (gm.n0 == 0) fail(ErrorCode::kEmptyArm, "control arm is empty");
  gm.theta0 = sum0 / gm.n0;
  gm.theta1 = sum1 / gm.n1;
  return gm;
}

EffectReport ate_wald(const Dataset& ds, double level) {
  check_level(level);
  const ArmStats st = arm_stats(ds);
  const double se = std::sqrt(st.var0 / st.n0 + st.var1 / st.n1);
  EffectReport r = wald_report("ate_wald", st.mean1 - st.mean0, se, level,
                               st.n0 + st.n1);
  r.diagnostics["mean_control"] = st.mean0;
  r.diagnostics["mean_treated"] = st.mean1;
  r.diagnostics["var_control"] = st.var0;
  r.diagnostics["var_treated"] = st.var1;
  return r;
}

RiskMeasures risk_measures(const Dataset& ds) {
  check_binary_outcome(ds);
  RiskMeasures rm;
  rm.means = group_means(ds);
  rm.rd = rm.means.theta1 - rm.means.theta0;
  if (rm.means.theta0 != 0) rm.rr = rm.means.theta1 / rm.means.theta0;
  // exact 2x2 cell counts: events/non-events by arm
  long a = 0, c = 0;
  const auto& y = ds.outcome();
  const auto& d = ds.treatment();
  for (size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 1.0) (d[i] == 1.0 ? a : c) += 1;
  }
  const long b = rm.means.n1 - a;
  const long dd = rm.means.n0 - c;
  if (a > 0 && b > 0 && c > 0 && dd > 0) {
    rm.odds_ratio = (static_cast<double>(a) * static_cast<double>(dd)) /
                    (static_cast<double>(b) * static_cast<double>(c));
  }
  if (rm.rd != 0) rm.nnt = 1.0 / rm.rd;
  return rm;
}

StandardizedContrast standardized_contrast(const Dataset& ds,
                                           const std::string& stratum_col) {
  check_binary_outcome(ds);
  ds.require_binary_treatment();
  if (stratum_col == ds.outcome_name() || stratum_col == ds.treatment_name()) {
    fail(ErrorCode::kArgument,
         "stratum column may not be the outcome or the treatment");
  }
  const auto& strata = ds.column(stratum_col);
  const auto& y = ds.outcome();
  const auto& d = ds.treatment();
  const int n = ds.n_rows();
  if (n == 0) fail(ErrorCode::kArgument, "dataset is empty");

  struct Cell {
    int n1 = 0, n0 = 0;
    double events1 = 0, events0 = 0;
  };
  std::map<double, Cell> cells;
  for (int i = 0; i < n; ++i) {
    Cell& cell = cells[strata[i]];
    if (d[i] == 1.0) {
      ++cell.n1;
      cell.events1 += y[i];
    } else {
      ++cell.n0;
      cell.events0 += y[i];
    }
  }

  StandardizedContrast out;
  out.std_risk1 = 0;
  out.std_risk0 = 0;
  for (const auto& [value, cell] : cells) {
    if (cell.n1 == 0 || cell.n0 == 0) {
      fail(ErrorCode::kPositivity,
           "stratum " + std::to_string(value) + " lacks " +
               (cell.n1 == 0 ? "treated" : "control") + " rows");
    }
    StratumRow row;
    row.value = value;
    row.n_treated = cell.n1;
    row.n_control = cell.n0;
    row.risk_treated = cell.events1 / cell.n1;
    row.risk_control = cell.events0 / cell.n0;
    row.weight = static_cast<double>(cell.n1 + cell.n0) / n;
    out.std_risk1 += row.weight * row.risk_treated;
    out.std_risk0 += row.weight * row.risk_control;
    out.table.push_back(row);
  }

  const GroupMeans crude = group_means(ds);
  out.crude_risk1 = crude.theta1;
  out.crude_risk0 = crude.theta0;
  if (out.std_risk0 != 0) out.std_rr = out.std_risk1 / out.std_risk0;
  if (out.crude_risk0 != 0) out.crude_rr = out.crude_risk1 / out.crude_risk0;
  return out;
}

EffectReport relative_effect(const Dataset& ds, double level) {
  check_level(level);
  const ArmStats st = arm_stats(ds);
  if (st.mean0 == 0) {
    fail(ErrorCode::kEstimation,
         "control mean is zero; the relative effect is undefined");
  }
  const int n = st.n0 + st.n1;
  const double p0 = static_cast<double>(st.n0) / n;
  const double p1 = static_cast<double>(st.n1) / n;
  const double g0 = -st.mean1 / (st.mean0 * st.mean0);
  const double g1 = 1.0 / st.mean0;
  const double quad = g0 * g0 * (st.var0 / p0) + g1 * g1 * (st.var1 / p1);
  const double se = std::sqrt(quad / n);
  EffectReport r = wald_report("relative_effect", st.mean1 / st.mean0 - 1.0,
                               se, level, n);
  r.diagnostics["mean_control"] = st.mean0;
  r.diagnostics["mean_treated"] = st.mean1;
  return r;
}

EffectReport crossover_effect(const std::vector<double>& y0,
                              const std::vector<double>& y1, double level) {
  check_level(level);
  if (y0.size() != y1.size()) {
    fail(ErrorCode::kArgument, "paired columns differ in length");
  }
  const int n = static_cast<int>(y0.size());
  if (n < 2) fail(ErrorCode::kArgument, "need at least two pairs");
  std::vector<double> diff(n);
  for (int i = 0; i < n; ++i) diff[i] = y1[i] - y0[i];
  double mean = 0;
  for (double v : diff) mean += v;
  mean /= n;
  const double se = sample_sd(diff) / std::sqrt(static_cast<double>(n));
  return wald_report("crossover", mean, se, level, n);
}

CateReport cate_interaction(const Dataset& ds, double level) {
  check_level(level);
  ds.require_binary_treatment();
  const int n = ds.n_rows();
  const Eigen::VectorXd y = ds.outcome_vector();
  const Eigen::VectorXd d = ds.treatment_vector();
  const Eigen::MatrixXd x = ds.covariate_matrix();
  const int p = static_cast<int>(x.cols());

  Eigen::MatrixXd design(n, 2 + 2 * p);
  design.col(0).setOnes();
  design.col(1) = d;
  for (int j = 0; j < p; ++j) {
    const Eigen::VectorXd centered = x.col(j).array() - x.col(j).mean();
    design.col(2 + j) = centered;
    design.col(2 + p + j) = d.cwiseProduct(centered);
  }
  const OlsFit fit = ols(design, y);

  CateReport r;
  r.ate =
      wald_report("cate_interaction", fit.coef[1], fit.se_robust[1], level, n);
  r.intercept = fit.coef[0];
  r.covariates = ds.covariate_names();
  for (int j = 0; j < p; ++j) {
    r.baseline_coef.push_back(fit.coef[2 + j]);
    r.baseline_se.push_back(fit.se_robust[2 + j]);
    r.interaction_coef.push_back(fit.coef[2 + p + j]);
    r.interaction_se.push_back(fit.se_robust[2 + p + j]);
  }
  return r;
}

double percentile(std::vector<double> values, double pct) {
  if (values.empty()) fail(ErrorCode::kArgument, "empty sample");
  if (!(pct >= 0 && pct <= 100)) {
    fail(ErrorCode::kArgument, "percentile must lie in [0, 100]");
  }
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1) * pct / 100.0;
  const auto lo = static_cast<size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

BootstrapResult bootstrap(
    const std::function<double(const Dataset&)>& statistic, const Dataset& ds,
    int b, std::uint64_t seed, double level, int jobs) {
  check_level(level);
  if (b < 100) fail(ErrorCode::kArgument, "need at least 100 replicates");
  const int n = ds.n_rows();
  if (n < 1) fail(ErrorCode::kArgument, "dataset is empty");
  if (jobs < 1) jobs = 1;

  std::vector<double> estimates(b);
  std::vector<char> ok(b, 0);
  auto run_replicate = [&](int rep) {
    std::vector<int> rows(n);
    for (int i = 0; i < n; ++i) {
      const double u = keyed_uniform(seed, static_cast<std::uint64_t>(rep),
                                     static_cast<std::uint64_t>(i),
                                     kResampleKey);
      rows[i] = std::min(static_cast<int>(u * n), n - 1);
    }
    try {
      estimates[rep] = statistic(ds.take_rows(rows));
      ok[rep] = 1;
    } catch (const std::exception&) {
      ok[rep] = 0;
    }
  };

  if (jobs == 1) {
    for (int rep = 0; rep < b; ++rep) run_replicate(rep);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) {
      pool.emplace_back([&, t] {
        for (int rep = t; rep < b; rep += jobs) run_replicate(rep);
      });
    }
    for (auto& th : pool) th.join();
  }

  BootstrapResult out;
  out.level = level;
  out.requested = b;
  for (int rep = 0; rep < b; ++rep) {
    if (ok[rep]) {
      out.replicates.push_back(estimates[rep]);
    } else {
      ++out.failures;
    }
  }
  if (out.failures * 10 > b) {
    fail(ErrorCode::kEstimation,
         "bootstrap aborted: " + std::to_string(out.failures) + " of " +
             std::to_string(b) + " replicates failed");
  }
  out.se = sample_sd(out.replicates);
  const double alpha = (1.0 - level) / 2.0;
  out.ci_low = percentile(out.replicates, 100.0 * alpha);
  out.ci_high = percentile(out.replicates, 100.0 * (1.0 - alpha));
  return out;
}

}  // namespace causalkit
