#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <vector>

#include "embedkit/dataset.hpp"

namespace embedkit {

struct SplitSpec {
  double train_fraction = 0.8;  // open interval (0, 1)
  std::uint64_t seed = 0;
  bool stratified = true;
};

struct DataSplit {
  LabeledDataset train_dataset;
  LabeledDataset test_dataset;
  EmbeddingMatrix train_matrix;
  EmbeddingMatrix test_matrix;
  std::vector<std::size_t> train_indices;  // into the original row order
  std::vector<std::size_t> test_indices;
};

// Seed-deterministic train/test partition. Stratified splits keep class
// proportions within one sample per class and require every class to have at
// least 2 samples.
DataSplit split(const LabeledDataset& d, const EmbeddingMatrix& m,
                const SplitSpec& s);

struct ConfusionMatrix {
  std::vector<std::string> class_names;
  Eigen::MatrixXi counts;  // rows = true class, cols = predicted

  double accuracy() const;  // trace / total
  nlohmann::json to_json() const;
  void write_csv(const std::string& path) const;
};

// Fitted multi-class linear discriminant model. Axes are found by a two-stage
// SVD: whiten the pooled within-class scatter (singular values below
// 1e-10 * s_max truncated), then diagonalize the between-class scatter of the
// whitened class means. With shrinkage lambda the within-class covariance is
// blended as (1-lambda) * S_W + lambda * (tr(S_W)/D) * I, which keeps
// mean-difference directions that fall outside the within-scatter range.
// Axis signs are chosen so class 0's mean projects negative on each axis.
struct LdaModel {
  std::vector<std::string> class_names;
  Eigen::MatrixXd class_means;        // C x D
  Eigen::VectorXd global_mean;        // D (prior-weighted)
  Eigen::MatrixXd discriminant_axes;  // A x D with A <= C-1
  Eigen::VectorXd projection_scalings;  // per-axis between-class singular value
  Eigen::VectorXd priors;             // C, empirical class frequencies
  double shrinkage = 0.0;
  bool shrinkage_used = false;
  std::size_t rank_within = 0;        // whitening rank retained at fit time

  std::size_t n_axes() const {
    return static_cast<std::size_t>(discriminant_axes.rows());
  }
};

LdaModel fit_lda(const EmbeddingMatrix& m, const LabeledDataset& d,
                 std::optional<double> shrinkage = std::nullopt);

// Gaussian discriminant rule, linear in x; ties resolve to the lowest class
// index. Returns one label per row.
std::vector<std::string> predict(const LdaModel& model,
                                 const EmbeddingMatrix& m);

// Projection onto the requested discriminant axes (0-based indices).
Eigen::MatrixXd transform_ld(const LdaModel& model, const EmbeddingMatrix& m,
                             const std::vector<std::size_t>& axes);

std::pair<double, ConfusionMatrix> evaluate(const LdaModel& model,
                                            const EmbeddingMatrix& test,
                                            const LabeledDataset& labels);

}  // namespace embedkit
