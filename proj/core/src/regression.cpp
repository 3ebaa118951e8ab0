#include "embedkit/regression.hpp"

#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>

#include "embedkit/errors.hpp"

namespace embedkit {

namespace {

constexpr double kPerfectFitTol = 1e-12;  // SS_res below this fraction of SS_tot

void check_indicator(const std::vector<int>& indicator, std::size_t n) {
  if (indicator.size() != n) {
    throw ValidationError("indicator length " + std::to_string(indicator.size()) +
                          " does not match " + std::to_string(n) + " scores");
  }
  bool saw0 = false, saw1 = false;
  for (int v : indicator) {
    if (v == 0) saw0 = true;
    else if (v == 1) saw1 = true;
    else throw ValidationError("indicator values must be 0 or 1");
  }
  if (!saw0 || !saw1) {
    throw ValidationError("constant indicator: no variation to regress on");
  }
}

// Lentz's method for the incomplete beta continued fraction
// (Numerical Recipes form); 1e-10 tolerance, 300-term cap.
double beta_cf(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kTol = 1e-10;
  constexpr int kMaxIter = 300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((qap + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kTol) break;
  }
  return h;
}

void fill_fit_quality(RegressionReport& r, double ss_res, double ss_tot,
                      int df_model, int df_resid) {
  r.df_model = df_model;
  r.df_resid = df_resid;
  if (ss_res < 0.0) ss_res = 0.0;
  r.r_squared = 1.0 - ss_res / ss_tot;
  if (r.r_squared < 0.0) r.r_squared = 0.0;
  if (r.r_squared > 1.0) r.r_squared = 1.0;
  if (ss_res <= kPerfectFitTol * ss_tot) {
    r.r_squared = 1.0;
    r.f_statistic = std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
  } else {
    r.f_statistic = (r.r_squared / df_model) /
                    ((1.0 - r.r_squared) / df_resid);
    r.p_value = 1.0 - f_cdf(r.f_statistic, df_model, df_resid);
    if (r.p_value < 0.0) r.p_value = 0.0;
  }
}

}  // namespace

nlohmann::json RegressionReport::to_json() const {
  nlohmann::json j;
  if (std::isnan(slope)) {
    j["slope"] = nullptr;
  } else {
    j["slope"] = slope;
  }
  j["intercept"] = intercept;
  j["coefficients"] = coefficients;
  j["r_squared"] = r_squared;
  j["pearson_r"] = pearson_r;
  if (std::isinf(f_statistic)) {
    j["f_statistic"] = "inf";
  } else {
    j["f_statistic"] = f_statistic;
  }
  j["p_value"] = p_value < 1e-300 ? 0.0 : p_value;
  j["df_model"] = df_model;
  j["df_resid"] = df_resid;
  j["n"] = n;
  return j;
}

RegressionReport regress_indicator(const Eigen::VectorXd& scores,
                                   const std::vector<int>& indicator) {
  const std::size_t n = static_cast<std::size_t>(scores.size());
  if (n < 3) throw ValidationError("regress_indicator: need at least 3 samples");
  check_indicator(indicator, n);

  double xbar = 0.0;
  for (int v : indicator) xbar += v;
  xbar /= static_cast<double>(n);
  const double ybar = scores.mean();

  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = indicator[i] - xbar;
    const double dy = scores(static_cast<Eigen::Index>(i)) - ybar;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (syy == 0.0) {
    throw ValidationError("regress_indicator: constant scores (SS_tot = 0)");
  }

  RegressionReport r;
  r.n = n;
  r.slope = sxy / sxx;
  r.intercept = ybar - r.slope * xbar;
  r.coefficients = {r.intercept, r.slope};
  r.pearson_r = sxy / std::sqrt(sxx * syy);
  fill_fit_quality(r, syy - r.slope * sxy, syy, 1, static_cast<int>(n) - 2);
  return r;
}

RegressionReport regress_multi(const Eigen::MatrixXd& scores,
                               const std::vector<int>& indicator) {
  const std::size_t n = static_cast<std::size_t>(scores.rows());
  const std::size_t p = static_cast<std::size_t>(scores.cols());
  if (p < 1) throw ValidationError("regress_multi: no score columns");
  if (n <= p + 1) {
    throw ValidationError("regress_multi: need more than " +
                          std::to_string(p + 1) + " samples, got " +
                          std::to_string(n));
  }
  check_indicator(indicator, n);

  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) y(static_cast<Eigen::Index>(i)) = indicator[i];

  Eigen::MatrixXd design(n, p + 1);
  design.col(0).setOnes();
  design.rightCols(static_cast<Eigen::Index>(p)) = scores;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < static_cast<Eigen::Index>(p + 1)) {
    throw ValidationError("regress_multi: rank-deficient design matrix");
  }
  const Eigen::VectorXd beta = qr.solve(y);
  const double ss_res = (y - design * beta).squaredNorm();
  const double ybar = y.mean();
  const double ss_tot = (y.array() - ybar).square().sum();

  RegressionReport r;
  r.n = n;
  r.intercept = beta(0);
  r.coefficients.assign(beta.data(), beta.data() + beta.size());
  r.slope = p == 1 ? beta(1) : std::numeric_limits<double>::quiet_NaN();
  fill_fit_quality(r, ss_res, ss_tot, static_cast<int>(p),
                   static_cast<int>(n - p - 1));
  r.pearson_r = std::sqrt(r.r_squared);
  return r;
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw ValidationError("incomplete beta: a and b must be positive");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                        a * std::log(x) + b * std::log(1.0 - x);
  const double bt = std::exp(log_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return bt * beta_cf(a, b, x) / a;
  }
  return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

double f_cdf(double x, int d1, int d2) {
  if (d1 < 1 || d2 < 1) {
    throw ValidationError("f_cdf: degrees of freedom must be positive");
  }
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double a = static_cast<double>(d1);
  const double b = static_cast<double>(d2);
  return regularized_incomplete_beta(a / 2.0, b / 2.0, a * x / (a * x + b));
}

}  // namespace embedkit
