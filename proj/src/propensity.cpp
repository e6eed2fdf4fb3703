#include "causalkit/propensity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "causalkit/errors.hpp"
#include "causalkit/linalg.hpp"
#include "causalkit/rng.hpp"

namespace causalkit {
namespace {

constexpr double kScoreClip = 1e-6;

double logistic(double eta) {
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

struct ArmTotals {
  int n1 = 0, n0 = 0;
};

ArmTotals count_arms(const Dataset& ds) {
  ds.require_binary_treatment();
  ArmTotals t;
  for (double v : ds.treatment()) (v == 1.0 ? t.n1 : t.n0) += 1;
  if (t.n1 == 0) fail(ErrorCode::kEmptyArm, "treated arm is empty");
  if (t.n0 == 0) fail(ErrorCode::kEmptyArm, "control arm is empty");
  return t;
}

}  // namespace

PropensityModel fit_propensity(const Dataset& ds) {
  count_arms(ds);
  const int n = ds.n_rows();
  const Eigen::VectorXd d = ds.treatment_vector();
  const Eigen::MatrixXd xcov = ds.covariate_matrix();
  const int k = static_cast<int>(xcov.cols()) + 1;
  if (n <= k) {
    fail(ErrorCode::kArgument, "need more rows than coefficients");
  }
  Eigen::MatrixXd x(n, k);
  x.col(0).setOnes();
  if (k > 1) x.rightCols(k - 1) = xcov;
  if (Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(x).rank() < k) {
    fail(ErrorCode::kRankDeficient, "covariate matrix is rank deficient");
  }

  PropensityModel m;
  m.coefficients = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd eta(n), p(n), w(n), z(n);
  for (int iter = 1; iter <= 100; ++iter) {
    m.iterations = iter;
    eta = x * m.coefficients;
    for (int i = 0; i < n; ++i) {
      p[i] = logistic(eta[i]);
      w[i] = std::max(p[i] * (1.0 - p[i]), 1e-10);
      z[i] = eta[i] + (d[i] - p[i]) / w[i];
    }
    const Eigen::MatrixXd xw = w.asDiagonal() * x;
    const Eigen::VectorXd next =
        (x.transpose() * xw).ldlt().solve(x.transpose() * (w.asDiagonal() * z));
    if (!next.allFinite()) break;  // diverged; keep the last finite iterate
    const double change = (next - m.coefficients).cwiseAbs().maxCoeff();
    m.coefficients = next;
    if (change < 1e-8) {
      m.converged = true;
      break;
    }
  }

  eta = x * m.coefficients;
  m.scores.resize(n);
  for (int i = 0; i < n; ++i) {
    double s = logistic(eta[i]);
    if (s < kScoreClip || s > 1.0 - kScoreClip) {
      s = std::clamp(s, kScoreClip, 1.0 - kScoreClip);
      ++m.clipped;
    }
    m.scores[i] = s;
  }
  return m;
}

std::vector<double> ht_transform(const Dataset& ds,
                                 const std::vector<double>& scores) {
  ds.require_binary_treatment();
  const auto& d = ds.treatment();
  if (scores.size() != d.size()) {
    fail(ErrorCode::kArgument, "scores length does not match the dataset");
  }
  std::vector<double> h(d.size());
  for (size_t i = 0; i < d.size(); ++i) {
    if (!(scores[i] > 0.0 && scores[i] < 1.0)) {
      fail(ErrorCode::kPositivity,
           "score outside (0, 1) at row " + std::to_string(i));
    }
    h[i] = d[i] == 1.0 ? 1.0 / scores[i] : -1.0 / (1.0 - scores[i]);
  }
  return h;
}

EffectReport ipw_ate(const Dataset& ds, const std::vector<double>& scores,
                     const IpwOptions& opts, double level) {
  if (!(level > 0 && level < 1)) {
    fail(ErrorCode::kArgument, "confidence level must lie in (0, 1)");
  }
  const ArmTotals arms = count_arms(ds);
  const std::vector<double> h = ht_transform(ds, scores);
  const auto& y = ds.outcome();
  const auto& d = ds.treatment();
  const int n = ds.n_rows();

  // Weight magnitudes on the scale truncation acts on.
  std::vector<double> w(n);
  if (opts.stabilized) {
    const double p1 = static_cast<double>(arms.n1) / n;
    const double p0 = static_cast<double>(arms.n0) / n;
    for (int i = 0; i < n; ++i) {
      w[i] = d[i] == 1.0 ? p1 / scores[i] : p0 / (1.0 - scores[i]);
    }
  } else {
    for (int i = 0; i < n; ++i) w[i] = std::abs(h[i]);
  }

  int truncated = 0;
  if (opts.truncate_pct) {
    const auto [lo, hi] = *opts.truncate_pct;
    if (!(lo >= 0 && hi <= 100 && lo < hi)) {
      fail(ErrorCode::kArgument,
           "truncation percentiles must satisfy 0 <= lo < hi <= 100");
    }
    const double wlo = percentile(w, lo);
    const double whi = percentile(w, hi);
    for (double& v : w) {
      const double clamped = std::clamp(v, wlo, whi);
      if (clamped != v) {
        v = clamped;
        ++truncated;
      }
    }
  }

  EffectReport r;
  if (opts.stabilized) {
    double sw1 = 0, sw0 = 0, swy1 = 0, swy0 = 0;
    for (int i = 0; i < n; ++i) {
      if (d[i] == 1.0) {
        sw1 += w[i];
        swy1 += w[i] * y[i];
      } else {
        sw0 += w[i];
        swy0 += w[i] * y[i];
      }
    }
    const double mu1 = swy1 / sw1;
    const double mu0 = swy0 / sw0;
    double v1 = 0, v0 = 0;
    for (int i = 0; i < n; ++i) {
      if (d[i] == 1.0) {
        v1 += w[i] * w[i] * (y[i] - mu1) * (y[i] - mu1);
      } else {
        v0 += w[i] * w[i] * (y[i] - mu0) * (y[i] - mu0);
      }
    }
    const double se = std::sqrt(v1 / (sw1 * sw1) + v0 / (sw0 * sw0));
    r = EffectReport{};
    r.method = "ipw_stabilized";
    r.estimate = mu1 - mu0;
    r.se = se;
    // normalized weights average one inside each arm by construction
    double norm_max = 0, mean1 = 0, mean0 = 0;
    for (int i = 0; i < n; ++i) {
      const double wn = d[i] == 1.0 ? w[i] * arms.n1 / sw1 : w[i] * arms.n0 / sw0;
      norm_max = std::max(norm_max, wn);
      (d[i] == 1.0 ? mean1 : mean0) += wn;
    }
    r.diagnostics["mean_weight_treated"] = mean1 / arms.n1;
    r.diagnostics["mean_weight_control"] = mean0 / arms.n0;
    r.diagnostics["max_weight"] = *std::max_element(w.begin(), w.end());
  } else {
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i) {
      t[i] = y[i] * (h[i] >= 0 ? w[i] : -w[i]);
    }
    double mean = 0;
    for (double v : t) mean += v;
    mean /= n;
    double ss = 0;
    for (double v : t) ss += (v - mean) * (v - mean);
    const double se = std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<double>(n));
    r = EffectReport{};
    r.method = "ipw";
    r.estimate = mean;
    r.se = se;
    r.diagnostics["max_weight"] = *std::max_element(w.begin(), w.end());
  }
  r.level = level;
  r.n = n;
  const double z = z_quantile(level);
  r.ci_low = r.estimate - z * r.se;
  r.ci_high = r.estimate + z * r.se;
  r.diagnostics["truncated_fraction"] = static_cast<double>(truncated) / n;
  r.diagnostics["min_score"] = *std::min_element(scores.begin(), scores.end());
  r.diagnostics["max_score"] = *std::max_element(scores.begin(), scores.end());
  return r;
}

Eigen::MatrixXd balance_dictionary(const Dataset& ds, BalanceDictionary kind,
                                   std::vector<std::string>* term_names) {
  const auto& names = ds.covariate_names();
  if (names.empty()) {
    fail(ErrorCode::kArgument, "no covariates to expand");
  }
  const int n = ds.n_rows();
  const Eigen::MatrixXd x = ds.covariate_matrix();
  const int p = static_cast<int>(x.cols());

  std::vector<Eigen::VectorXd> cols;
  std::vector<std::string> labels;
  for (int j = 0; j < p; ++j) {
    cols.push_back(x.col(j));
    labels.push_back(names[j]);
  }
  const bool squares = kind == BalanceDictionary::kSquares ||
                       kind == BalanceDictionary::kFull;
  const bool products = kind == BalanceDictionary::kInteractions ||
                        kind == BalanceDictionary::kFull;
  if (squares) {
    for (int j = 0; j < p; ++j) {
      const bool binary = (x.col(j).array() == 0.0 || x.col(j).array() == 1.0).all();
      if (binary) continue;  // the square would repeat the column
      cols.push_back(x.col(j).cwiseProduct(x.col(j)));
      labels.push_back(names[j] + "^2");
    }
  }
  if (products) {
    for (int j = 0; j < p; ++j) {
      for (int l = j + 1; l < p; ++l) {
        cols.push_back(x.col(j).cwiseProduct(x.col(l)));
        labels.push_back(names[j] + "*" + names[l]);
      }
    }
  }

  Eigen::MatrixXd out(n, static_cast<int>(cols.size()));
  for (size_t c = 0; c < cols.size(); ++c) {
    out.col(static_cast<int>(c)) = cols[c];
  }
  if (term_names != nullptr) *term_names = labels;
  return out;
}

BalanceReport balance_check(const Dataset& ds,
                            const std::vector<double>& scores,
                            const Eigen::MatrixXd& dictionary,
                            const std::vector<std::string>& term_names) {
  const int n = ds.n_rows();
  const int q = static_cast<int>(dictionary.cols());
  if (q < 1) fail(ErrorCode::kArgument, "dictionary has no columns");
  if (dictionary.rows() != n) {
    fail(ErrorCode::kArgument, "dictionary rows do not match the dataset");
  }
  const std::vector<double> hv = ht_transform(ds, scores);
  const Eigen::VectorXd h =
      Eigen::Map<const Eigen::VectorXd>(hv.data(), n);

  Eigen::MatrixXd x(n, q + 1);
  x.col(0).setOnes();
  x.rightCols(q) = dictionary;
  const OlsFit fit = ols(x, h);

  BalanceReport r;
  r.df1 = q;
  r.df2 = n - (q + 1);
  const double tss = (h.array() - h.mean()).square().sum();
  r.f_stat = ((tss - fit.rss) / q) / (fit.rss / r.df2);
  if (r.f_stat < 0) r.f_stat = 0;  // rounding guard near a perfect null
  r.f_p = f_upper_tail_p(r.f_stat, q, r.df2);

  const Eigen::VectorXd b = fit.coef.tail(q);
  const Eigen::MatrixXd v = fit.cov_robust.bottomRightCorner(q, q);
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(v);
  if (ldlt.info() != Eigen::Success) {
    fail(ErrorCode::kEstimation, "robust covariance is not invertible");
  }
  r.robust_wald = b.dot(ldlt.solve(b));
  if (r.robust_wald < 0) r.robust_wald = 0;
  r.robust_p = chisq_upper_tail_p(r.robust_wald, q);

  for (int j = 0; j < q; ++j) {
    r.coef.push_back(fit.coef[j + 1]);
    r.t_robust.push_back(fit.coef[j + 1] / fit.se_robust[j + 1]);
    if (static_cast<int>(term_names.size()) == q) {
      r.terms.push_back(term_names[j]);
    } else {
      r.terms.push_back("w" + std::to_string(j + 1));
    }
  }
  return r;
}

}  // namespace causalkit
