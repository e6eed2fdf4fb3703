#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "causalkit/dataset.hpp"

namespace causalkit {

// Point estimate with a Wald-type confidence interval and free-form numeric
// diagnostics (weight maxima, truncation fractions, ...).
struct EffectReport {
  std::string method;
  double estimate = 0;
  double se = 0;
  double ci_low = 0;
  double ci_high = 0;
  double level = 0.95;
  int n = 0;
  std::map<std::string, double> diagnostics;
};

struct GroupMeans {
  double theta0 = 0;  // mean outcome among controls
  double theta1 = 0;  // mean outcome among treated
  int n0 = 0;
  int n1 = 0;
};

// Arm-specific outcome means; both arms must be non-empty.
GroupMeans group_means(const Dataset& ds);

// Difference in means with the large-sample interval; each arm needs at
// least two rows so the within-arm variances exist.
EffectReport ate_wald(const Dataset& ds, double level = 0.95);

// Effect measures for a binary outcome.  Ratios that would divide by zero
// are reported absent rather than infinite.
struct RiskMeasures {
  GroupMeans means;
  double rd = 0;                      // risk difference
  std::optional<double> rr;           // risk ratio; absent when theta0 = 0
  std::optional<double> odds_ratio;   // absent when any 2x2 cell is empty
  std::optional<double> nnt;          // 1/rd; absent when rd = 0
};
RiskMeasures risk_measures(const Dataset& ds);

struct StratumRow {
  double value = 0;  // the stratum's level
  int n_treated = 0;
  int n_control = 0;
  double risk_treated = 0;
  double risk_control = 0;
  double weight = 0;  // sample share of the stratum
};

// Stratum-weighted risks next to the crude (pooled) ones for a binary
// outcome.  Every stratum must contain both arms.
struct StandardizedContrast {
  std::vector<StratumRow> table;  // sorted by stratum value
  double std_risk1 = 0;
  double std_risk0 = 0;
  double crude_risk1 = 0;
  double crude_risk0 = 0;
  std::optional<double> std_rr;
  std::optional<double> crude_rr;
};
StandardizedContrast standardized_contrast(const Dataset& ds,
                                           const std::string& stratum_col);

// theta1/theta0 - 1 with a delta-method standard error.
EffectReport relative_effect(const Dataset& ds, double level = 0.95);

// Mean within-pair difference y1 - y0 for paired designs.
EffectReport crossover_effect(const std::vector<double>& y0,
                              const std::vector<double>& y1,
                              double level = 0.95);

// OLS of Y on treatment, centered covariates, and their interactions.  ate
// holds the treatment coefficient with its robust interval; the modifier
// arrays describe how the effect moves with each centered covariate.
struct CateReport {
  EffectReport ate;
  double intercept = 0;
  std::vector<std::string> covariates;
  std::vector<double> baseline_coef;     // on X - mean(X)
  std::vector<double> baseline_se;       // robust
  std::vector<double> interaction_coef;  // on D * (X - mean(X))
  std::vector<double> interaction_se;    // robust
};
CateReport cate_interaction(const Dataset& ds, double level = 0.95);

// Nonparametric bootstrap of a scalar statistic: resample rows with
// replacement, recompute, take the replicate spread and percentile interval.
// Replicates that throw are counted; more than 10% of them aborts the run.
// jobs > 1 evaluates replicates concurrently with identical results.
struct BootstrapResult {
  double se = 0;
  double ci_low = 0;
  double ci_high = 0;
  double level = 0.95;
  int requested = 0;
  int failures = 0;
  std::vector<double> replicates;  // successful draws, replicate order
};
BootstrapResult bootstrap(const std::function<double(const Dataset&)>& statistic,
                          const Dataset& ds, int b, std::uint64_t seed,
                          double level = 0.95, int jobs = 1);

// Linear-interpolation percentile (pct in [0, 100]) of a copied, sorted
// sample; shared by weight truncation and bootstrap intervals.
double percentile(std::vector<double> values, double pct);

}  // namespace causalkit
