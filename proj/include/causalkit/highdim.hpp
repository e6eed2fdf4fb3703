#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "causalkit/dataset.hpp"

namespace causalkit {

// Solution of (1/2n)||y - b0 - X g||^2 + lambda * sum_j psi_j |g_j|.
struct LassoFit {
  Eigen::VectorXd coefficients;  // original scale
  double intercept = 0;
  double lambda = 0;
  Eigen::VectorXd loadings;   // the psi_j the fit was run with
  std::vector<int> active;    // sorted indices of nonzero coefficients
  Eigen::VectorXd residuals;  // y - b0 - X g
  int iterations = 0;         // coordinate sweeps
  bool converged = false;
  double kkt_violation = 0;   // worst subgradient violation across j
};

struct LassoOptions {
  double tol = 1e-10;        // max coefficient change per sweep, standardized
  int max_iterations = 10000;
  double kkt_tol = 1e-8;
};

// Cyclic coordinate descent with an active-set strategy; the problem is
// standardized internally and the solution mapped back, so the returned
// certificate refers to the stated objective as-is.
LassoFit lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
               double lambda, const Eigen::VectorXd& loadings,
               const LassoOptions& opts = {});

// How the penalty level is chosen.
struct LambdaRule {
  enum class Kind { kPlugin, kCv, kFixed };
  Kind kind = Kind::kPlugin;
  double fixed_value = 0;
  int cv_folds = 10;
  std::uint64_t seed = 0;  // fold shuffling
  static LambdaRule plugin();
  static LambdaRule cv(int folds = 10, std::uint64_t seed = 0);
  static LambdaRule fixed(double lambda);
};

struct LambdaChoice {
  double lambda = 0;
  Eigen::VectorXd loadings;        // column standard deviations
  double sigma_hat = 0;            // plugin path only
  std::vector<double> grid;        // cv path only, descending
  std::vector<double> cv_error;    // held-out MSE per grid point
};

// plugin: lambda = 1.1 * sigma_hat * sqrt(2 log(p) / n), where sigma_hat is
// refit twice from the residuals of the previous round.  cv: k-fold
// cross-validation over 100 log-spaced lambdas below the all-zero threshold.
LambdaChoice select_lambda(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const LambdaRule& rule);

// Inference report for the treatment coefficient after Lasso-based control
// selection.
struct DmlReport {
  std::string method;  // partialling_out | double_selection | debiased |
                       // single_selection
  double alpha_hat = 0;
  double variance_hat = 0;
  double se = 0;  // sqrt(variance_hat / n)
  double ci_low = 0;
  double ci_high = 0;
  double level = 0.95;
  int n = 0;
  std::vector<int> selected_y;  // control indices active in the Y stage
  std::vector<int> selected_d;  // control indices active in the D stage
  double lambda_y = 0;
  double lambda_d = 0;
  double kkt_max_violation = 0;
  LassoFit fit_y;
  LassoFit fit_d;
  // Residualization coefficients actually used: a least-squares refit on the
  // selected support (identical to the Lasso solution when lambda is zero).
  Eigen::VectorXd coef_y;
  double intercept_y = 0;
  Eigen::VectorXd coef_d;
  double intercept_d = 0;
  // Populated by the selection-based methods: the closing OLS coefficients
  // (intercept, treatment, then controls) and which controls entered it.
  Eigen::VectorXd final_coef;
  std::vector<int> final_controls;
};

// Residual-on-residual regression: Lasso Y on W and D on W, then regress the
// Y residuals on the D residuals.
DmlReport partial_out(const Dataset& ds, const LambdaRule& rule = {},
                      double level = 0.95);

// Lasso Y on (D, W) and D on W; OLS of Y on D plus the union of the
// selections, with robust standard errors.
DmlReport double_selection(const Dataset& ds, const LambdaRule& rule = {},
                           double level = 0.95);

// Four-step recipe: Lasso Y on (D, W) for beta, Lasso D on W for the
// instrument D - W gamma, then the explicit ratio and its sandwich variance.
DmlReport debiased_lasso(const Dataset& ds, const LambdaRule& rule = {},
                         double level = 0.95);

// Deliberately non-orthogonal baseline: OLS on the controls the Y-stage
// Lasso alone picked, with the raw treatment as its own instrument.
DmlReport single_selection(const Dataset& ds, const LambdaRule& rule = {},
                           double level = 0.95);

struct OrthogonalityRow {
  double t = 0;
  double moment_abs = 0;
};

struct OrthogonalityReport {
  double moment_at_zero = 0;
  std::vector<OrthogonalityRow> rows;
  double slope = 0;  // log-log fit of |moment| against t
};

// Perturbs the report's nuisance coefficients along a seeded unit direction
// and traces the estimating-equation magnitude over the step grid.  A
// first-order-insensitive construction shows slope near 2, a naive one near
// 1.  Accepts partialling_out and single_selection reports.
OrthogonalityReport orthogonality_check(
    const Dataset& ds, const DmlReport& report,
    const std::vector<double>& t_grid = {1e-3, 1e-2, 1e-1},
    std::uint64_t direction_seed = 0);

}  // namespace causalkit
