#include "embedkit/roc.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>

#include "embedkit/errors.hpp"

namespace embedkit {

RocCurve roc(const Eigen::VectorXd& scores, const std::vector<int>& truth) {
  const std::size_t n = static_cast<std::size_t>(scores.size());
  if (truth.size() != n) {
    throw ValidationError("roc: scores and truth lengths differ");
  }
  std::uint64_t pos = 0, neg = 0;
  for (int t : truth) {
    if (t == 1) ++pos;
    else if (t == 0) ++neg;
    else throw ValidationError("roc: truth values must be 0 or 1");
  }
  if (pos == 0 || neg == 0) {
    throw ValidationError("roc: both classes must be present");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores(static_cast<Eigen::Index>(a)) > scores(static_cast<Eigen::Index>(b));
  });

  RocCurve curve;
  curve.thresholds.push_back(std::numeric_limits<double>::infinity());
  curve.fpr.push_back(0.0);
  curve.tpr.push_back(0.0);

  // 2*wins + ties over all (positive, negative) pairs.
  std::uint64_t numerator2 = 0;
  std::uint64_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < n) {
    const double value = scores(static_cast<Eigen::Index>(order[i]));
    std::uint64_t group_pos = 0, group_neg = 0;
    std::size_t j = i;
    while (j < n && scores(static_cast<Eigen::Index>(order[j])) == value) {
      if (truth[order[j]] == 1) ++group_pos;
      else ++group_neg;
      ++j;
    }
    numerator2 += group_neg * (2 * tp + group_pos);
    tp += group_pos;
    fp += group_neg;
    curve.thresholds.push_back(value);
    curve.tpr.push_back(static_cast<double>(tp) / static_cast<double>(pos));
    curve.fpr.push_back(static_cast<double>(fp) / static_cast<double>(neg));
    i = j;
  }
  curve.auroc = static_cast<double>(numerator2) /
                static_cast<double>(2 * pos * neg);
  return curve;
}

}  // namespace embedkit
