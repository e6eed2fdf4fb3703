#include "causalkit/highdim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "causalkit/errors.hpp"
#include "causalkit/linalg.hpp"
#include "causalkit/rng.hpp"

namespace causalkit {

namespace {

constexpr std::uint64_t kFoldKey = 0x666f6c64;   // cross-validation shuffles
constexpr std::uint64_t kProbeKey = 0x70726f62;  // perturbation directions

void check_level(double level) {
  if (!(level > 0 && level < 1)) {
    fail(ErrorCode::kArgument,
         "confidence level must be strictly between 0 and 1");
  }
}

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0;
}

Eigen::VectorXd column_sds(const Eigen::MatrixXd& x) {
  Eigen::VectorXd out(x.cols());
  for (int j = 0; j < x.cols(); ++j) {
    Eigen::VectorXd c = x.col(j).array() - x.col(j).mean();
    out(j) = std::sqrt(c.squaredNorm() / x.rows());
  }
  return out;
}

void check_problem(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.cols() < 1) fail(ErrorCode::kArgument, "design needs at least one column");
  if (x.rows() < 2) fail(ErrorCode::kArgument, "design needs at least two rows");
  if (y.size() != x.rows()) {
    fail(ErrorCode::kArgument, "response length does not match the design");
  }
  if (!x.allFinite() || !y.allFinite()) {
    fail(ErrorCode::kArgument, "non-finite values in the inputs");
  }
}

}  // namespace

LassoFit lasso(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
               double lambda, const Eigen::VectorXd& loadings,
               const LassoOptions& opts) {
  check_problem(x, y);
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  if (!std::isfinite(lambda) || lambda < 0) {
    fail(ErrorCode::kArgument, "lambda must be finite and nonnegative");
  }
  if (loadings.size() != p) {
    fail(ErrorCode::kArgument, "one loading per column is required");
  }
  for (int j = 0; j < p; ++j) {
    if (!std::isfinite(loadings(j)) || !(loadings(j) > 0)) {
      fail(ErrorCode::kArgument, "loadings must be positive and finite");
    }
  }
  if (!(opts.tol > 0) || opts.max_iterations < 1) {
    fail(ErrorCode::kArgument, "solver options must be positive");
  }

  LassoFit fit;
  fit.lambda = lambda;
  fit.loadings = loadings;
  fit.coefficients = Eigen::VectorXd::Zero(p);

  Eigen::VectorXd xbar(p), sd(p);
  for (int j = 0; j < p; ++j) {
    xbar(j) = x.col(j).mean();
    Eigen::VectorXd c = x.col(j).array() - xbar(j);
    sd(j) = std::sqrt(c.squaredNorm() / n);
    if (sd(j) == 0) {
      fail(ErrorCode::kArgument,
           "column " + std::to_string(j) + " has zero variance");
    }
  }
  const double ybar = y.mean();
  Eigen::VectorXd yc = y.array() - ybar;
  const double ysd = std::sqrt(yc.squaredNorm() / n);
  if (ysd == 0) {
    fit.intercept = ybar;
    fit.residuals = Eigen::VectorXd::Zero(n);
    fit.converged = true;
    return fit;
  }

  Eigen::MatrixXd xs(n, p);
  for (int j = 0; j < p; ++j) xs.col(j) = (x.col(j).array() - xbar(j)) / sd(j);
  Eigen::VectorXd ys = yc / ysd;
  Eigen::VectorXd thr(p);
  for (int j = 0; j < p; ++j) thr(j) = lambda * loadings(j) / (ysd * sd(j));

  Eigen::VectorXd delta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd r = ys;
  int sweeps = 0;
  double tol = opts.tol;
  bool done = false;

  auto sweep = [&](const std::vector<int>* idx) {
    double worst = 0;
    auto update = [&](int j) {
      const double old = delta(j);
      const double rho = old + xs.col(j).dot(r) / n;
      const double nw = soft_threshold(rho, thr(j));
      if (nw != old) {
        r.noalias() += xs.col(j) * (old - nw);
        delta(j) = nw;
        worst = std::max(worst, std::abs(nw - old));
      }
    };
    if (idx) {
      for (int j : *idx) update(j);
    } else {
      for (int j = 0; j < p; ++j) update(j);
    }
    return worst;
  };

  auto certificate = [&]() {
    double worst = std::abs(r.mean()) * ysd;
    for (int j = 0; j < p; ++j) {
      const double g = sd(j) * ysd * xs.col(j).dot(r) / n;
      const double bound = lambda * loadings(j);
      const double v = delta(j) == 0
                           ? std::max(0.0, std::abs(g) - bound)
                           : std::abs(g - bound * (delta(j) > 0 ? 1.0 : -1.0));
      worst = std::max(worst, v);
    }
    return worst;
  };

  while (sweeps < opts.max_iterations) {
    const double change = sweep(nullptr);
    ++sweeps;
    if (change < tol) {
      // Stationary by coefficient movement; accept only once the subgradient
      // certificate is comfortably inside the advertised tolerance.
      if (certificate() > 0.5 * opts.kkt_tol && tol > 1e-15) {
        tol *= 0.1;
        continue;
      }
      done = true;
      break;
    }
    std::vector<int> act;
    for (int j = 0; j < p; ++j) {
      if (delta(j) != 0) act.push_back(j);
    }
    while (!act.empty() && sweeps < opts.max_iterations) {
      const double inner = sweep(&act);
      ++sweeps;
      if (inner < tol) break;
      act.clear();
      for (int j = 0; j < p; ++j) {
        if (delta(j) != 0) act.push_back(j);
      }
    }
  }

  fit.iterations = sweeps;
  fit.converged = done;
  for (int j = 0; j < p; ++j) fit.coefficients(j) = delta(j) * ysd / sd(j);
  fit.intercept = ybar - fit.coefficients.dot(xbar);
  fit.residuals = y - Eigen::VectorXd::Constant(n, fit.intercept) - x * fit.coefficients;
  for (int j = 0; j < p; ++j) {
    if (fit.coefficients(j) != 0) fit.active.push_back(j);
  }
  double worst = std::abs(fit.residuals.mean());
  for (int j = 0; j < p; ++j) {
    const double g = sd(j) * xs.col(j).dot(fit.residuals) / n;
    const double bound = lambda * loadings(j);
    const double v =
        fit.coefficients(j) == 0
            ? std::max(0.0, std::abs(g) - bound)
            : std::abs(g - bound * (fit.coefficients(j) > 0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  fit.kkt_violation = worst;
  return fit;
}

LambdaRule LambdaRule::plugin() { return LambdaRule{}; }

LambdaRule LambdaRule::cv(int folds, std::uint64_t seed) {
  LambdaRule rule;
  rule.kind = Kind::kCv;
  rule.cv_folds = folds;
  rule.seed = seed;
  return rule;
}

LambdaRule LambdaRule::fixed(double lambda) {
  LambdaRule rule;
  rule.kind = Kind::kFixed;
  rule.fixed_value = lambda;
  return rule;
}

LambdaChoice select_lambda(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const LambdaRule& rule) {
  check_problem(x, y);
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());

  LambdaChoice out;
  out.loadings = column_sds(x);
  for (int j = 0; j < p; ++j) {
    if (out.loadings(j) == 0) {
      fail(ErrorCode::kArgument,
           "column " + std::to_string(j) + " has zero variance");
    }
  }
  Eigen::VectorXd yc = y.array() - y.mean();
  const double ysd = std::sqrt(yc.squaredNorm() / n);
  if (ysd == 0) fail(ErrorCode::kArgument, "response has zero variance");

  switch (rule.kind) {
    case LambdaRule::Kind::kFixed: {
      if (!std::isfinite(rule.fixed_value) || rule.fixed_value < 0) {
        fail(ErrorCode::kArgument, "fixed lambda must be finite and nonnegative");
      }
      out.lambda = rule.fixed_value;
      return out;
    }
    case LambdaRule::Kind::kPlugin: {
      const double factor = 1.1 * std::sqrt(2.0 * std::log(static_cast<double>(p)) / n);
      double sigma = ysd;
      for (int round = 0; round < 2 && sigma > 0; ++round) {
        LassoFit f = lasso(x, y, factor * sigma, out.loadings);
        sigma = std::sqrt(f.residuals.squaredNorm() / n);
      }
      out.sigma_hat = sigma;
      out.lambda = factor * sigma;
      return out;
    }
    case LambdaRule::Kind::kCv:
      break;
  }

  const int k = rule.cv_folds;
  if (k < 2 || k > n) {
    fail(ErrorCode::kArgument, "cv needs between 2 and n folds");
  }
  double lmax = 0;
  for (int j = 0; j < p; ++j) {
    Eigen::VectorXd xc = x.col(j).array() - x.col(j).mean();
    lmax = std::max(lmax, std::abs(xc.dot(yc)) / (n * out.loadings(j)));
  }
  if (!(lmax > 0)) {
    fail(ErrorCode::kArgument, "response is orthogonal to every column");
  }
  out.grid.resize(100);
  for (int i = 0; i < 100; ++i) {
    out.grid[i] = lmax * std::pow(1e-4, i / 99.0);
  }

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    const double u = keyed_uniform(rule.seed, static_cast<std::uint64_t>(i), 0, kFoldKey);
    int j = static_cast<int>(u * (i + 1));
    if (j > i) j = i;
    std::swap(perm[i], perm[j]);
  }
  std::vector<int> fold(n);
  for (int i = 0; i < n; ++i) fold[perm[i]] = i % k;

  out.cv_error.assign(100, 0.0);
  LassoOptions cv_opts;
  cv_opts.tol = 1e-8;
  cv_opts.max_iterations = 2000;
  for (int f = 0; f < k; ++f) {
    std::vector<int> train, test;
    for (int i = 0; i < n; ++i) (fold[i] == f ? test : train).push_back(i);
    if (static_cast<int>(train.size()) < 2) {
      fail(ErrorCode::kArgument, "cv folds leave too few training rows");
    }
    Eigen::MatrixXd xtr(train.size(), p), xte(test.size(), p);
    Eigen::VectorXd ytr(train.size()), yte(test.size());
    for (size_t i = 0; i < train.size(); ++i) {
      xtr.row(i) = x.row(train[i]);
      ytr(i) = y(train[i]);
    }
    for (size_t i = 0; i < test.size(); ++i) {
      xte.row(i) = x.row(test[i]);
      yte(i) = y(test[i]);
    }
    for (int gi = 0; gi < 100; ++gi) {
      try {
        LassoFit fit = lasso(xtr, ytr, out.grid[gi], out.loadings, cv_opts);
        Eigen::VectorXd pred =
            Eigen::VectorXd::Constant(test.size(), fit.intercept) + xte * fit.coefficients;
        out.cv_error[gi] += (yte - pred).squaredNorm();
      } catch (const Error&) {
        // Degenerate training fold for this column set: score the mean model.
        out.cv_error[gi] += (yte.array() - ytr.mean()).square().sum();
      }
    }
  }
  for (double& e : out.cv_error) e /= n;
  int best = 0;
  for (int i = 1; i < 100; ++i) {
    if (out.cv_error[i] < out.cv_error[best]) best = i;  // ties keep the larger lambda
  }
  out.lambda = out.grid[best];
  return out;
}

namespace {

struct Frame {
  Eigen::MatrixXd w;
  Eigen::VectorXd y;
  Eigen::VectorXd d;
  int n = 0;
  int p = 0;
};

Frame make_frame(const Dataset& ds) {
  Frame fr;
  fr.w = ds.covariate_matrix();
  fr.y = ds.outcome_vector();
  fr.d = ds.treatment_vector();
  fr.n = static_cast<int>(fr.w.rows());
  fr.p = static_cast<int>(fr.w.cols());
  if (fr.p < 1) fail(ErrorCode::kArgument, "needs at least one covariate");
  if (fr.n < 10) fail(ErrorCode::kArgument, "needs at least 10 rows");
  return fr;
}

// Selection by Lasso, residualization by a least-squares refit on the
// selected columns.  With lambda zero the two coincide.
struct Stage {
  LassoFit fit;
  Eigen::VectorXd coef;  // dense over all columns, zero off the selection
  double intercept = 0;
  Eigen::VectorXd residuals;
};

Stage residualize(const Eigen::MatrixXd& w, const Eigen::VectorXd& v,
                  double lambda, const Eigen::VectorXd& loadings) {
  Stage st;
  st.fit = lasso(w, v, lambda, loadings);
  const int n = static_cast<int>(w.rows());
  const int p = static_cast<int>(w.cols());
  st.coef = Eigen::VectorXd::Zero(p);
  if (st.fit.active.empty()) {
    st.intercept = v.mean();
    st.residuals = v.array() - st.intercept;
    return st;
  }
  const int m = static_cast<int>(st.fit.active.size());
  // When the selected design cannot support a least-squares refit (saturated
  // or singular), the Lasso solution itself is the residualizer.
  if (m + 1 < n) {
    try {
      Eigen::MatrixXd design(n, m + 1);
      design.col(0).setOnes();
      for (int i = 0; i < m; ++i) design.col(i + 1) = w.col(st.fit.active[i]);
      OlsFit f = ols(design, v);
      st.intercept = f.coef(0);
      for (int i = 0; i < m; ++i) st.coef(st.fit.active[i]) = f.coef(i + 1);
      st.residuals = f.residuals;
      return st;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kRankDeficient) throw;
    }
  }
  st.coef = st.fit.coefficients;
  st.intercept = st.fit.intercept;
  st.residuals = st.fit.residuals;
  return st;
}

void fill_inference(DmlReport& rep, double alpha, double vhat, int n, double level) {
  rep.alpha_hat = alpha;
  rep.variance_hat = vhat;
  rep.n = n;
  rep.level = level;
  rep.se = std::sqrt(vhat / n);
  const double z = z_quantile(level);
  rep.ci_low = alpha - z * rep.se;
  rep.ci_high = alpha + z * rep.se;
}

std::vector<int> shift_past_treatment(const std::vector<int>& active) {
  std::vector<int> out;
  for (int a : active) {
    if (a >= 1) out.push_back(a - 1);
  }
  return out;
}

Eigen::MatrixXd with_treatment_first(const Frame& fr) {
  Eigen::MatrixXd xd(fr.n, fr.p + 1);
  xd.col(0) = fr.d;
  xd.rightCols(fr.p) = fr.w;
  return xd;
}

}  // namespace

DmlReport partial_out(const Dataset& ds, const LambdaRule& rule, double level) {
  check_level(level);
  Frame fr = make_frame(ds);
  LambdaChoice cy = select_lambda(fr.w, fr.y, rule);
  LambdaChoice cd = select_lambda(fr.w, fr.d, rule);
  Stage sy = residualize(fr.w, fr.y, cy.lambda, cy.loadings);
  Stage sd = residualize(fr.w, fr.d, cd.lambda, cd.loadings);

  const double denom = sd.residuals.squaredNorm() / fr.n;
  const double dscale = fr.d.squaredNorm() / fr.n + 1e-12;
  if (denom <= 1e-10 * dscale) {
    fail(ErrorCode::kNoIdentification,
         "treatment is fully explained by the controls");
  }
  const double alpha = sy.residuals.dot(sd.residuals) / sd.residuals.squaredNorm();
  Eigen::VectorXd eps = sy.residuals - alpha * sd.residuals;
  const double vhat =
      (sd.residuals.array().square() * eps.array().square()).mean() / (denom * denom);

  DmlReport rep;
  rep.method = "partialling_out";
  fill_inference(rep, alpha, vhat, fr.n, level);
  rep.selected_y = sy.fit.active;
  rep.selected_d = sd.fit.active;
  rep.lambda_y = cy.lambda;
  rep.lambda_d = cd.lambda;
  rep.kkt_max_violation = std::max(sy.fit.kkt_violation, sd.fit.kkt_violation);
  rep.coef_y = sy.coef;
  rep.intercept_y = sy.intercept;
  rep.coef_d = sd.coef;
  rep.intercept_d = sd.intercept;
  rep.fit_y = std::move(sy.fit);
  rep.fit_d = std::move(sd.fit);
  return rep;
}

DmlReport double_selection(const Dataset& ds, const LambdaRule& rule, double level) {
  check_level(level);
  Frame fr = make_frame(ds);
  Eigen::MatrixXd xd = with_treatment_first(fr);
  LambdaChoice cy = select_lambda(xd, fr.y, rule);
  LambdaChoice cd = select_lambda(fr.w, fr.d, rule);

  double mult = 1.0;
  for (int attempt = 0; attempt < 20; ++attempt, mult *= 2) {
    const double ly = cy.lambda * mult;
    const double ld = cd.lambda * mult;
    LassoFit fy = lasso(xd, fr.y, ly, cy.loadings);
    LassoFit fd = lasso(fr.w, fr.d, ld, cd.loadings);
    std::vector<int> sel_y = shift_past_treatment(fy.active);
    std::vector<int> sel_d = fd.active;
    std::vector<int> both;
    std::set_union(sel_y.begin(), sel_y.end(), sel_d.begin(), sel_d.end(),
                   std::back_inserter(both));
    if (static_cast<int>(both.size()) >= fr.n - 2) {
      if (ly == 0 && ld == 0) {
        fail(ErrorCode::kEstimation,
             "control selection saturated and the penalty cannot be tightened");
      }
      continue;
    }

    Eigen::MatrixXd design(fr.n, 2 + both.size());
    design.col(0).setOnes();
    design.col(1) = fr.d;
    for (size_t i = 0; i < both.size(); ++i) design.col(2 + i) = fr.w.col(both[i]);
    OlsFit f = ols(design, fr.y);

    DmlReport rep;
    rep.method = "double_selection";
    fill_inference(rep, f.coef(1), f.se_robust(1) * f.se_robust(1) * fr.n, fr.n, level);
    rep.selected_y = std::move(sel_y);
    rep.selected_d = std::move(sel_d);
    rep.lambda_y = ly;
    rep.lambda_d = ld;
    rep.kkt_max_violation = std::max(fy.kkt_violation, fd.kkt_violation);
    rep.fit_y = std::move(fy);
    rep.fit_d = std::move(fd);
    rep.final_coef = f.coef;
    rep.final_controls = std::move(both);
    return rep;
  }
  fail(ErrorCode::kEstimation,
       "control selection stayed saturated after tightening the penalty");
}

DmlReport single_selection(const Dataset& ds, const LambdaRule& rule, double level) {
  check_level(level);
  Frame fr = make_frame(ds);
  Eigen::MatrixXd xd = with_treatment_first(fr);
  LambdaChoice cy = select_lambda(xd, fr.y, rule);
  LassoFit fy = lasso(xd, fr.y, cy.lambda, cy.loadings);
  std::vector<int> sel = shift_past_treatment(fy.active);
  if (static_cast<int>(sel.size()) >= fr.n - 2) {
    fail(ErrorCode::kEstimation, "selection kept too many controls to refit");
  }

  Eigen::MatrixXd design(fr.n, 2 + sel.size());
  design.col(0).setOnes();
  design.col(1) = fr.d;
  for (size_t i = 0; i < sel.size(); ++i) design.col(2 + i) = fr.w.col(sel[i]);
  OlsFit f = ols(design, fr.y);

  DmlReport rep;
  rep.method = "single_selection";
  fill_inference(rep, f.coef(1), f.se_robust(1) * f.se_robust(1) * fr.n, fr.n, level);
  rep.selected_y = sel;
  rep.lambda_y = cy.lambda;
  rep.kkt_max_violation = fy.kkt_violation;
  rep.fit_y = std::move(fy);
  rep.final_coef = f.coef;
  rep.final_controls = std::move(sel);
  return rep;
}

DmlReport debiased_lasso(const Dataset& ds, const LambdaRule& rule, double level) {
  check_level(level);
  Frame fr = make_frame(ds);
  Eigen::MatrixXd xd = with_treatment_first(fr);
  LambdaChoice cy = select_lambda(xd, fr.y, rule);
  LambdaChoice cd = select_lambda(fr.w, fr.d, rule);

  LassoFit fy = lasso(xd, fr.y, cy.lambda, cy.loadings);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(fr.p);
  double b0 = 0;
  bool refit_ok = false;
  if (fy.active.empty()) {
    b0 = fr.y.mean();
    refit_ok = true;
  } else if (static_cast<int>(fy.active.size()) + 1 < fr.n) {
    const int m = static_cast<int>(fy.active.size());
    try {
      Eigen::MatrixXd design(fr.n, m + 1);
      design.col(0).setOnes();
      for (int i = 0; i < m; ++i) design.col(i + 1) = xd.col(fy.active[i]);
      OlsFit f = ols(design, fr.y);
      b0 = f.coef(0);
      for (int i = 0; i < m; ++i) {
        // The refit keeps the treatment column when it was selected, but only
        // the control coefficients feed the correction.
        if (fy.active[i] >= 1) beta(fy.active[i] - 1) = f.coef(i + 1);
      }
      refit_ok = true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kRankDeficient) throw;
    }
  }
  if (!refit_ok) {
    b0 = fy.intercept;
    beta = fy.coefficients.tail(fr.p);
  }

  Stage sd = residualize(fr.w, fr.d, cd.lambda, cd.loadings);
  const Eigen::VectorXd& dtil = sd.residuals;
  const double a = fr.d.cwiseProduct(dtil).mean();
  const double dscale = fr.d.squaredNorm() / fr.n + 1e-12;
  if (std::abs(a) <= 1e-10 * dscale) {
    fail(ErrorCode::kNoIdentification,
         "treatment is fully explained by the controls");
  }
  Eigen::VectorXd yadj =
      fr.y - Eigen::VectorXd::Constant(fr.n, b0) - fr.w * beta;
  const double alpha = yadj.cwiseProduct(dtil).mean() / a;
  Eigen::VectorXd eps = yadj - alpha * fr.d;
  const double vhat =
      (dtil.array().square() * eps.array().square()).mean() / (a * a);

  DmlReport rep;
  rep.method = "debiased";
  fill_inference(rep, alpha, vhat, fr.n, level);
  rep.selected_y = shift_past_treatment(fy.active);
  rep.selected_d = sd.fit.active;
  rep.lambda_y = cy.lambda;
  rep.lambda_d = cd.lambda;
  rep.kkt_max_violation = std::max(fy.kkt_violation, sd.fit.kkt_violation);
  rep.coef_y = beta;
  rep.intercept_y = b0;
  rep.coef_d = sd.coef;
  rep.intercept_d = sd.intercept;
  rep.fit_y = std::move(fy);
  rep.fit_d = std::move(sd.fit);
  return rep;
}

OrthogonalityReport orthogonality_check(const Dataset& ds, const DmlReport& report,
                                        const std::vector<double>& t_grid,
                                        std::uint64_t direction_seed) {
  if (t_grid.empty()) fail(ErrorCode::kArgument, "need at least one step size");
  for (double t : t_grid) {
    if (!std::isfinite(t) || !(t > 0)) {
      fail(ErrorCode::kArgument, "step sizes must be positive and finite");
    }
  }
  Frame fr = make_frame(ds);

  const bool po = report.method == "partialling_out";
  if (!po && report.method != "single_selection") {
    fail(ErrorCode::kArgument,
         "orthogonality probe needs a partialling_out or single_selection report");
  }

  // Storage shared by both branches so the evaluation loop below stays flat.
  Eigen::VectorXd base_y, base_d, pert_y, pert_d;
  if (po) {
    if (report.coef_y.size() != fr.p || report.coef_d.size() != fr.p) {
      fail(ErrorCode::kArgument, "report does not match the dataset");
    }
    base_y = fr.y - Eigen::VectorXd::Constant(fr.n, report.intercept_y) -
             fr.w * report.coef_y;
    base_d = fr.d - Eigen::VectorXd::Constant(fr.n, report.intercept_d) -
             fr.w * report.coef_d;
    Eigen::VectorXd delta(2 * fr.p);
    for (int i = 0; i < delta.size(); ++i) {
      delta(i) = keyed_normal(direction_seed, static_cast<std::uint64_t>(i), 0, kProbeKey);
    }
    delta /= delta.norm();
    pert_y = fr.w * delta.head(fr.p);
    pert_d = fr.w * delta.tail(fr.p);
  } else {
    const std::vector<int>& sel = report.final_controls;
    if (sel.empty()) {
      fail(ErrorCode::kEstimation, "no selected controls to perturb");
    }
    if (report.final_coef.size() != static_cast<int>(sel.size()) + 2) {
      fail(ErrorCode::kArgument, "report does not match the dataset");
    }
    Eigen::MatrixXd ws(fr.n, sel.size());
    for (size_t i = 0; i < sel.size(); ++i) {
      if (sel[i] < 0 || sel[i] >= fr.p) {
        fail(ErrorCode::kArgument, "report does not match the dataset");
      }
      ws.col(i) = fr.w.col(sel[i]);
    }
    Eigen::VectorXd beta = report.final_coef.segment(2, sel.size());
    base_y = fr.y - Eigen::VectorXd::Constant(fr.n, report.final_coef(0)) -
             report.final_coef(1) * fr.d - ws * beta;
    Eigen::VectorXd delta(sel.size());
    for (int i = 0; i < delta.size(); ++i) {
      delta(i) = keyed_normal(direction_seed, static_cast<std::uint64_t>(i), 0, kProbeKey);
    }
    delta /= delta.norm();
    pert_y = ws * delta;
  }

  auto moment = [&](double t) {
    if (po) {
      Eigen::VectorXd ry = base_y - t * pert_y;
      Eigen::VectorXd rd = base_d - t * pert_d;
      return (ry - report.alpha_hat * rd).cwiseProduct(rd).mean();
    }
    return (base_y - t * pert_y).cwiseProduct(fr.d).mean();
  };

  OrthogonalityReport out;
  out.moment_at_zero = std::abs(moment(0));
  for (double t : t_grid) {
    out.rows.push_back({t, std::abs(moment(t))});
  }
  if (out.rows.size() >= 2) {
    double mx = 0, my = 0;
    for (const auto& row : out.rows) {
      mx += std::log(row.t);
      my += std::log(std::max(row.moment_abs, 1e-300));
    }
    mx /= out.rows.size();
    my /= out.rows.size();
    double sxx = 0, sxy = 0;
    for (const auto& row : out.rows) {
      const double dx = std::log(row.t) - mx;
      sxx += dx * dx;
      sxy += dx * (std::log(std::max(row.moment_abs, 1e-300)) - my);
    }
    if (sxx > 0) out.slope = sxy / sxx;
  }
  return out;
}

}  // namespace causalkit
