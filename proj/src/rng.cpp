#include "causalkit/rng.hpp"

#include <cmath>

#include "causalkit/errors.hpp"

namespace causalkit {

namespace {

// Horner evaluation, coefficients given lowest-order first.
template <int N>
double poly(const double (&c)[N], double x) {
  double acc = c[N - 1];
  for (int i = N - 2; i >= 0; --i) acc = acc * x + c[i];
  return acc;
}

// Upper-tail Mills ratio P(Z>z)/phi(z) via the classical continued fraction
// 1/(z + 1/(z + 2/(z + 3/...))); full double precision for z >= 6.
double mills_ratio(double z) {
  double acc = 0.0;
  for (int k = 48; k >= 1; --k) acc = k / (z + acc);
  return 1.0 / (z + acc);
}

}  // namespace

double inv_normal_cdf(double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    fail(ErrorCode::kArgument, "inv_normal_cdf: p must lie strictly in (0, 1)");
  }
  // Rational approximations from Wichura's AS241 (PPND16 precision level).
  static constexpr double kCentralNum[8] = {
      3.3871328727963666080e0, 1.3314166789178437745e2,
      1.9715909503065514427e3, 1.3731693765509461125e4,
      4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4, 2.5090809287301226727e3};
  static constexpr double kCentralDen[8] = {
      1.0, 4.2313330701600911252e1, 6.8718700749205790830e2,
      5.3941960214247511077e3, 2.1213794301586595867e4,
      3.9307895800092710610e4, 2.8729085735721942674e4,
      5.2264952788528545610e3};
  static constexpr double kMiddleNum[8] = {
      1.42343711074968357734e0, 4.63033784615654529590e0,
      5.76949722146069140550e0, 3.64784832476320460504e0,
      1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr double kMiddleDen[8] = {
      1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
      6.89767334985100004550e-1, 1.48103976427480074590e-1,
      1.51986665636164571966e-2, 5.47593808499534494600e-4,
      1.05075007164441684324e-9};
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * poly(kCentralNum, r) / poly(kCentralDen, r);
  }
  const double tail = q < 0.0 ? p : 1.0 - p;
  const double r = std::sqrt(-std::log(tail));
  double value;
  if (r <= 5.0) {
    const double x = r - 1.6;
    value = poly(kMiddleNum, x) / poly(kMiddleDen, x);
  } else {
    // Far tail (|z| > 6.6, tail < 1.4e-11): solve log P(Z>z) = log(tail) by
    // Newton.  log P(Z>z) = -z^2/2 - log sqrt(2*pi) + log mills_ratio(z) and
    // d/dz log P(Z>z) = -1/mills_ratio(z), so each step is
    // z += (log P(Z>z) - log tail) * mills_ratio(z).  Converges from the
    // upper-bound start z = sqrt(2)*r to ~1e-13 in a handful of steps.
    constexpr double kLogSqrt2Pi = 0.91893853320467274178;
    const double log_tail = -r * r;
    double z = std::sqrt(2.0) * r;
    for (int it = 0; it < 16; ++it) {
      const double rho = mills_ratio(z);
      const double log_upper = -0.5 * z * z - kLogSqrt2Pi + std::log(rho);
      const double step = (log_upper - log_tail) * rho;
      z += step;
      if (std::fabs(step) < 1e-14 * z) break;
    }
    value = z;
  }
  return q < 0.0 ? -value : value;
}

double z_quantile(double level) {
  if (!(level > 0.0) || !(level < 1.0)) {
    fail(ErrorCode::kArgument, "z_quantile: level must lie strictly in (0, 1)");
  }
  return inv_normal_cdf(0.5 + level / 2.0);
}

}  // namespace causalkit
