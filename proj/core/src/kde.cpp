#include "embedkit/kde.hpp"

#include <cmath>

#include "embedkit/errors.hpp"

namespace embedkit {

namespace {
constexpr double kSqrt2Pi = 2.5066282746310002;
}

KdeModel fit_kde(const Eigen::VectorXd& points, double bandwidth) {
  if (points.size() < 2) {
    throw ValidationError("fit_kde: need at least 2 points");
  }
  if (bandwidth < 0.0) throw ValidationError("fit_kde: negative bandwidth");
  KdeModel model;
  model.points = points;
  if (bandwidth > 0.0) {
    model.bandwidth = bandwidth;
  } else {
    const double n = static_cast<double>(points.size());
    const double mean = points.mean();
    const double sd = std::sqrt((points.array() - mean).square().sum() / (n - 1.0));
    if (sd == 0.0) {
      throw ValidationError("fit_kde: constant sample; pass an explicit bandwidth");
    }
    model.bandwidth = sd * std::pow(n, -0.2);
  }
  return model;
}

Eigen::VectorXd kde_eval(const KdeModel& model, const Eigen::VectorXd& xs) {
  if (!(model.bandwidth > 0.0) || model.points.size() < 2) {
    throw ValidationError("kde_eval: invalid model");
  }
  const double h = model.bandwidth;
  const double scale = 1.0 / (static_cast<double>(model.points.size()) * h * kSqrt2Pi);
  Eigen::VectorXd out(xs.size());
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    const Eigen::ArrayXd z = (xs(i) - model.points.array()) / h;
    out(i) = scale * (-0.5 * z.square()).exp().sum();
  }
  return out;
}

}  // namespace embedkit
