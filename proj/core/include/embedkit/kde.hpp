#pragma once

#include <Eigen/Dense>

namespace embedkit {

// Gaussian kernel density estimate over 1-D scores.
struct KdeModel {
  Eigen::VectorXd points;  // N >= 2
  double bandwidth = 0.0;  // > 0
};

// bandwidth == 0 selects Scott's rule, h = sigma_hat * N^(-1/5) with the
// sample standard deviation; a constant sample then needs an explicit
// bandwidth.
KdeModel fit_kde(const Eigen::VectorXd& points, double bandwidth = 0.0);

// f(x) = 1/(N*h) * sum phi((x - x_i)/h)
Eigen::VectorXd kde_eval(const KdeModel& model, const Eigen::VectorXd& xs);

}  // namespace embedkit
