#pragma once

#include <Eigen/Dense>
#include <vector>

namespace embedkit {

// Threshold sweep over unique scores, descending. Entry k holds the operating
// point for "positive when score >= thresholds[k]"; the first entry is a
// +infinity sentinel so the curve starts at (0, 0) and ends at (1, 1).
struct RocCurve {
  std::vector<double> thresholds;
  std::vector<double> fpr;
  std::vector<double> tpr;
  double auroc = 0.0;
};

// AUROC equals the Mann-Whitney statistic with ties counted 1/2; both are
// accumulated in exact integer arithmetic and divided once, so the trapezoid
// value matches a brute-force pairwise count bit for bit.
RocCurve roc(const Eigen::VectorXd& scores, const std::vector<int>& truth);

}  // namespace embedkit
