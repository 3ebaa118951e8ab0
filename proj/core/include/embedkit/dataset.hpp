#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace embedkit {

using RowMatrixXd =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Sample {
  std::string id;
  std::string label;
  std::optional<std::string> text;
};

// The observed data: sample ids, class labels and optional raw text, kept in
// file order. Class names are deduplicated in order of first appearance.
class LabeledDataset {
 public:
  LabeledDataset() = default;
  explicit LabeledDataset(std::vector<Sample> samples);

  std::size_t size() const { return samples_.size(); }
  const std::vector<Sample>& samples() const { return samples_; }
  const std::vector<std::string>& class_names() const { return class_names_; }

  // Index of `label` in class_names(); throws ValidationError when unknown.
  std::size_t class_index(const std::string& label) const;

  // Per-sample class index, aligned to samples().
  std::vector<std::size_t> label_indices() const;

  // Per-sample text; throws ValidationError if any sample has none.
  std::vector<std::string> texts() const;

  std::vector<std::string> ids() const;
  std::vector<std::string> labels() const;

  LabeledDataset select(const std::vector<std::size_t>& indices) const;

 private:
  std::vector<Sample> samples_;
  std::vector<std::string> class_names_;
};

// The latent data: an N x D matrix of finite values, one row per sample id.
// Immutable after construction and safe to share between threads.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;

  // Validates: values.size() == ids.size() * dims, every entry finite,
  // ids unique and non-empty. Errors name the offending row.
  EmbeddingMatrix(std::vector<std::string> sample_ids, std::size_t dims,
                  std::vector<double> values);

  static EmbeddingMatrix from_eigen(std::vector<std::string> sample_ids,
                                    const Eigen::MatrixXd& m);

  std::size_t rows() const { return sample_ids_.size(); }
  std::size_t dims() const { return dims_; }
  const std::vector<std::string>& sample_ids() const { return sample_ids_; }
  const std::vector<double>& values() const { return values_; }

  Eigen::Map<const RowMatrixXd> view() const {
    return {values_.data(), static_cast<Eigen::Index>(rows()),
            static_cast<Eigen::Index>(dims_)};
  }

  EmbeddingMatrix select_rows(const std::vector<std::size_t>& indices) const;

 private:
  std::vector<std::string> sample_ids_;
  std::size_t dims_ = 0;
  std::vector<double> values_;  // row-major N x D
};

// Verifies that matrix rows and dataset samples carry the same ids in the
// same order.
void check_aligned(const LabeledDataset& d, const EmbeddingMatrix& m);

}  // namespace embedkit
