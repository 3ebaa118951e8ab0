#pragma once

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>
#include <vector>

namespace embedkit {

// Result of one cluster regression. For a saturated fit f_statistic is
// +infinity and p_value is 0; to_json() renders that as the string "inf" and
// prints p-values below 1e-300 as 0.0.
struct RegressionReport {
  double slope = 0.0;       // NaN for multi-score regressions (see coefficients)
  double intercept = 0.0;
  std::vector<double> coefficients;  // intercept first
  double r_squared = 0.0;
  double pearson_r = 0.0;   // signed for simple fits, multiple correlation otherwise
  double f_statistic = 0.0;
  double p_value = 1.0;
  int df_model = 0;
  int df_resid = 0;
  std::size_t n = 0;

  nlohmann::json to_json() const;
};

// OLS of `scores` on a {0,1} indicator plus intercept. Requires N >= 3 and an
// indicator that takes both values.
RegressionReport regress_indicator(const Eigen::VectorXd& scores,
                                   const std::vector<int>& indicator);

// OLS of the indicator on P score columns plus intercept; the reported R^2 is
// the squared multiple correlation and the F-test is the joint linear
// hypothesis with df (P, N-P-1). Requires N > P + 1 and a full-rank design.
RegressionReport regress_multi(const Eigen::MatrixXd& scores,
                               const std::vector<int>& indicator);

// Regularized incomplete beta I_x(a, b) by Lentz continued fraction with the
// standard symmetry switch at x = (a+1)/(a+b+2).
double regularized_incomplete_beta(double a, double b, double x);

// CDF of the F distribution: I_{d1 x/(d1 x + d2)}(d1/2, d2/2).
double f_cdf(double x, int d1, int d2);

}  // namespace embedkit
