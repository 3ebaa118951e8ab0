#include "embedkit/pca.hpp"

#include <cmath>
#include <fstream>

#include "embedkit/errors.hpp"
#include "embedkit/io.hpp"

namespace embedkit {

namespace {

// Flip rows so the largest-absolute entry is positive; first index wins ties.
void apply_sign_convention(Eigen::MatrixXd& components) {
  for (Eigen::Index i = 0; i < components.rows(); ++i) {
    Eigen::Index best = 0;
    double best_abs = std::abs(components(i, 0));
    for (Eigen::Index j = 1; j < components.cols(); ++j) {
      const double a = std::abs(components(i, j));
      if (a > best_abs) {
        best_abs = a;
        best = j;
      }
    }
    if (components(i, best) < 0.0) components.row(i) = -components.row(i);
  }
}

}  // namespace

PcaModel fit_pca(const EmbeddingMatrix& m, std::size_t k) {
  const std::size_t n = m.rows();
  const std::size_t d = m.dims();
  if (n < 2) {
    throw ValidationError("fit_pca: need at least 2 rows, got " + std::to_string(n));
  }
  const std::size_t max_k = std::min(n - 1, d);
  if (k < 1 || k > max_k) {
    throw ValidationError("fit_pca: k = " + std::to_string(k) +
                          " out of range [1, " + std::to_string(max_k) + "]");
  }

  PcaModel model;
  model.n_fitted = n;
  model.mean = m.view().colwise().mean();
  Eigen::MatrixXd centered = m.view().rowwise() - model.mean.transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();

  const double denom = static_cast<double>(n - 1);
  const double total_variance = centered.squaredNorm() / denom;

  model.components = svd.matrixV().leftCols(static_cast<Eigen::Index>(k)).transpose();
  apply_sign_convention(model.components);
  model.explained_variance.resize(static_cast<Eigen::Index>(k));
  model.explained_variance_ratio.resize(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    const double ev = sv(static_cast<Eigen::Index>(i)) * sv(static_cast<Eigen::Index>(i)) / denom;
    model.explained_variance(static_cast<Eigen::Index>(i)) = ev;
    model.explained_variance_ratio(static_cast<Eigen::Index>(i)) =
        total_variance > 0.0 ? ev / total_variance : 0.0;
  }
  return model;
}

Eigen::MatrixXd project(const PcaModel& p, const EmbeddingMatrix& m,
                        const std::vector<std::size_t>& components) {
  if (static_cast<Eigen::Index>(m.dims()) != p.components.cols()) {
    throw ValidationError("project: matrix dims do not match model");
  }
  Eigen::MatrixXd selected(static_cast<Eigen::Index>(components.size()),
                           p.components.cols());
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (components[i] >= static_cast<std::size_t>(p.components.rows())) {
      throw ValidationError("project: component index " +
                            std::to_string(components[i]) + " out of range");
    }
    selected.row(static_cast<Eigen::Index>(i)) =
        p.components.row(static_cast<Eigen::Index>(components[i]));
  }
  return (m.view().rowwise() - p.mean.transpose()) * selected.transpose();
}

std::size_t scree_elbow(const Eigen::VectorXd& variances) {
  const Eigen::Index k = variances.size();
  if (k < 3) {
    throw ValidationError("scree_elbow: need at least 3 components, got " +
                          std::to_string(k));
  }
  for (Eigen::Index i = 1; i < k; ++i) {
    if (variances(i) > variances(i - 1)) {
      throw ValidationError("scree_elbow: variances must be non-increasing");
    }
  }

  // Unnormalized distance from (i, v_i) to the chord; the chord denominator
  // is shared by every index, so the argmax only needs the numerator. This
  // also makes the choice invariant to positive rescaling of the variances.
  const double dy = variances(k - 1) - variances(0);
  const double dx = static_cast<double>(k - 1);
  const double cross = static_cast<double>(k) * variances(0) - variances(k - 1);
  std::size_t best = 1;
  double best_num = 0.0;  // index 1 (x=1) lies on the chord
  for (Eigen::Index i = 0; i < k; ++i) {
    const double x = static_cast<double>(i + 1);
    const double num = std::abs(dy * x - dx * variances(i) + cross);
    if (num > best_num) {
      best_num = num;
      best = static_cast<std::size_t>(i + 1);
    }
  }
  return best;
}

void write_scree_csv(const std::string& path, const PcaModel& model) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "component,variance,ratio,cumulative\n";
  double cumulative = 0.0;
  for (Eigen::Index i = 0; i < model.explained_variance.size(); ++i) {
    cumulative += model.explained_variance_ratio(i);
    out << (i + 1) << ',' << format_g9(model.explained_variance(i)) << ','
        << format_g9(model.explained_variance_ratio(i)) << ','
        << format_g9(cumulative) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace embedkit
