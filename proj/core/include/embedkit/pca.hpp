#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "embedkit/dataset.hpp"

namespace embedkit {

// Principal components of the centered data. Rows of `components` are
// orthonormal loading vectors sorted by non-increasing explained variance
// (sample convention, s_i^2 / (N-1)). Sign convention: each component is
// flipped so its largest-absolute entry is positive, ties to the lower index.
struct PcaModel {
  Eigen::MatrixXd components;             // K x D
  Eigen::VectorXd explained_variance;     // K
  Eigen::VectorXd explained_variance_ratio;
  Eigen::VectorXd mean;                   // D
  std::size_t n_fitted = 0;
};

// SVD of the centered matrix. Requires N >= 2 and 1 <= k <= min(N-1, D);
// asking for more components than the rank convention allows is an error
// rather than a silent truncation.
PcaModel fit_pca(const EmbeddingMatrix& m, std::size_t k);

// Scores = (X - mean) * components(selected)^T. Component indices are 0-based.
Eigen::MatrixXd project(const PcaModel& p, const EmbeddingMatrix& m,
                        const std::vector<std::size_t>& components);

// Component budget from the explained-variance curve: the 1-based index
// maximizing perpendicular distance to the chord joining (1, v_1) and
// (K, v_K). Ties break toward the smallest index. Requires K >= 3 and a
// non-increasing input.
std::size_t scree_elbow(const Eigen::VectorXd& variances);

// csv export: `component,variance,ratio,cumulative`.
void write_scree_csv(const std::string& path, const PcaModel& model);

}  // namespace embedkit
