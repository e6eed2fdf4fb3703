#include "causalkit/linalg.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <cmath>

#include "causalkit/errors.hpp"

namespace causalkit {

OlsFit ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const int n = static_cast<int>(x.rows());
  const int k = static_cast<int>(x.cols());
  if (y.size() != n) fail(ErrorCode::kArgument, "x and y row counts differ");
  if (k == 0) fail(ErrorCode::kArgument, "design matrix has no columns");
  if (n <= k) {
    fail(ErrorCode::kArgument, "need more rows than regressors");
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < k) {
    fail(ErrorCode::kRankDeficient, "design matrix is rank deficient");
  }

  OlsFit fit;
  fit.n = n;
  fit.k = k;
  fit.coef = qr.solve(y);
  fit.residuals = y - x * fit.coef;
  fit.rss = fit.residuals.squaredNorm();

  // (X'X)^{-1} from the factorization: X P = Q R  =>  X'X = P R'R P'.
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(k, k);
  const Eigen::MatrixXd rinv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  Eigen::MatrixXd xtx_inv = rinv * rinv.transpose();
  xtx_inv = qr.colsPermutation() * xtx_inv * qr.colsPermutation().transpose();

  const double sigma2 = fit.rss / (n - k);
  fit.se_classical = (sigma2 * xtx_inv.diagonal()).cwiseSqrt();

  const Eigen::MatrixXd meat =
      x.transpose() * fit.residuals.array().square().matrix().asDiagonal() * x;
  fit.cov_robust =
      (static_cast<double>(n) / (n - k)) * xtx_inv * meat * xtx_inv;
  fit.cov_robust = (0.5 * (fit.cov_robust + fit.cov_robust.transpose())).eval();
  fit.se_robust = fit.cov_robust.diagonal().cwiseSqrt();

  const double tss = (y.array() - y.mean()).square().sum();
  fit.r2 = tss > 0 ? 1.0 - fit.rss / tss : 0.0;
  return fit;
}

double partial_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                           const Eigen::MatrixXd& controls) {
  const int n = static_cast<int>(x.size());
  if (y.size() != n || (controls.cols() > 0 && controls.rows() != n)) {
    fail(ErrorCode::kArgument, "input lengths differ");
  }
  const int kc = static_cast<int>(controls.cols());
  Eigen::MatrixXd z(n, kc + 1);
  z.col(0).setOnes();
  if (kc > 0) z.rightCols(kc) = controls;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
  const Eigen::VectorXd ex = x - z * qr.solve(x);
  const Eigen::VectorXd ey = y - z * qr.solve(y);
  const double nx = ex.norm();
  const double ny = ey.norm();
  const double scale = std::sqrt(
      static_cast<double>(n));  // tolerance on the average squared residual
  if (nx <= 1e-12 * scale || ny <= 1e-12 * scale) {
    fail(ErrorCode::kEstimation,
         "a variable is collinear with the controls; partial correlation is "
         "undefined");
  }
  return ex.dot(ey) / (nx * ny);
}

double f_upper_tail_p(double stat, double df1, double df2) {
  if (!(df1 > 0) || !(df2 > 0)) {
    fail(ErrorCode::kArgument, "degrees of freedom must be positive");
  }
  if (!(stat >= 0)) fail(ErrorCode::kArgument, "F statistic must be >= 0");
  const boost::math::fisher_f dist(df1, df2);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

double chisq_upper_tail_p(double stat, double df) {
  if (!(df > 0)) {
    fail(ErrorCode::kArgument, "degrees of freedom must be positive");
  }
  if (!(stat >= 0)) fail(ErrorCode::kArgument, "statistic must be >= 0");
  const boost::math::chi_squared dist(df);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace causalkit
