#pragma once

#include <Eigen/Dense>

namespace causalkit {

struct OlsFit {
  Eigen::VectorXd coef;
  Eigen::VectorXd se_classical;
  Eigen::VectorXd se_robust;   // HC1
  Eigen::MatrixXd cov_robust;  // HC1 covariance of coef
  Eigen::VectorXd residuals;
  double rss = 0;
  double r2 = 0;  // relative to the centered total sum of squares
  int n = 0;
  int k = 0;
};

// Least-squares fit of y on the columns of x.  Supply your own intercept
// column.  Requires n > k and full column rank (kRankDeficient otherwise).
OlsFit ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

// Correlation between the parts of x and y orthogonal to the controls; an
// intercept is always appended to the controls, so with zero control columns
// this is the ordinary correlation.
double partial_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                           const Eigen::MatrixXd& controls);

// Upper-tail probabilities for test statistics.
double f_upper_tail_p(double stat, double df1, double df2);
double chisq_upper_tail_p(double stat, double df);

}  // namespace causalkit
