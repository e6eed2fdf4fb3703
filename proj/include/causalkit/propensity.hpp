#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "causalkit/dataset.hpp"
#include "causalkit/estimators.hpp"

namespace causalkit {

// Logistic regression of treatment on the covariates.
struct PropensityModel {
  Eigen::VectorXd coefficients;  // intercept first, then covariates in order
  std::vector<double> scores;    // fitted, clipped into [1e-6, 1 - 1e-6]
  bool converged = false;
  int iterations = 0;
  int clipped = 0;  // rows whose fitted score hit the clip bounds
};

// Maximum likelihood via iteratively reweighted least squares; stops when
// the largest coefficient change drops below 1e-8 or after 100 rounds.
// Separated data surfaces as converged = false with clipped scores, not as
// an exception.
PropensityModel fit_propensity(const Dataset& ds);

// Signed inverse-probability weight D/e - (1-D)/(1-e) per row.  Scores must
// be strictly inside (0, 1); an exact 0 or 1 is a positivity error naming
// the row.
std::vector<double> ht_transform(const Dataset& ds,
                                 const std::vector<double>& scores);

struct IpwOptions {
  bool stabilized = false;
  // Clamp weight magnitudes at these pooled sample percentiles when set.
  std::optional<std::pair<double, double>> truncate_pct;
};

// Weighting estimate of the mean contrast: the plain average of Y times the
// signed weight, or the within-arm normalized (stabilized) version.  The
// standard error treats the scores as fixed.  Diagnostics report max_weight
// and truncated_fraction.
EffectReport ipw_ate(const Dataset& ds, const std::vector<double>& scores,
                     const IpwOptions& opts = {}, double level = 0.95);

// Transformed-covariate dictionaries for the balance regression.
enum class BalanceDictionary { kRaw, kSquares, kInteractions, kFull };

// Expands the covariates into the requested dictionary.  Squares of binary
// columns reproduce the column and are skipped.  term_names receives one
// label per output column when non-null.
Eigen::MatrixXd balance_dictionary(const Dataset& ds, BalanceDictionary kind,
                                   std::vector<std::string>* term_names);

// Regresses the signed weight on the dictionary: a correct score model
// leaves nothing to predict.  Reports the classical F-test and a robust
// Wald test of all non-intercept terms plus per-term robust t statistics.
struct BalanceReport {
  double f_stat = 0;
  double f_p = 1;
  double robust_wald = 0;
  double robust_p = 1;
  int df1 = 0;  // tested terms
  int df2 = 0;  // residual degrees of freedom
  std::vector<std::string> terms;
  std::vector<double> coef;
  std::vector<double> t_robust;
};
BalanceReport balance_check(const Dataset& ds,
                            const std::vector<double>& scores,
                            const Eigen::MatrixXd& dictionary,
                            const std::vector<std::string>& term_names = {});

}  // namespace causalkit
