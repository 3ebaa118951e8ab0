#include "embedkit/dataset.hpp"

#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "embedkit/errors.hpp"

namespace embedkit {

LabeledDataset::LabeledDataset(std::vector<Sample> samples)
    : samples_(std::move(samples)) {
  std::unordered_set<std::string> seen_ids;
  std::unordered_set<std::string> seen_labels;
  seen_ids.reserve(samples_.size());
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const Sample& s = samples_[i];
    if (s.id.empty()) {
      throw ValidationError("row " + std::to_string(i) + ": empty sample id");
    }
    if (!seen_ids.insert(s.id).second) {
      throw ValidationError("row " + std::to_string(i) + ": duplicate id \"" +
                            s.id + "\"");
    }
    if (seen_labels.insert(s.label).second) {
      class_names_.push_back(s.label);
    }
  }
}

std::size_t LabeledDataset::class_index(const std::string& label) const {
  for (std::size_t i = 0; i < class_names_.size(); ++i) {
    if (class_names_[i] == label) return i;
  }
  throw ValidationError("unknown label \"" + label + "\"");
}

std::vector<std::size_t> LabeledDataset::label_indices() const {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(class_names_.size());
  for (std::size_t i = 0; i < class_names_.size(); ++i) {
    index.emplace(class_names_[i], i);
  }
  std::vector<std::size_t> out(samples_.size());
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    out[i] = index.at(samples_[i].label);
  }
  return out;
}

std::vector<std::string> LabeledDataset::texts() const {
  std::vector<std::string> out;
  out.reserve(samples_.size());
  for (const Sample& s : samples_) {
    if (!s.text) {
      throw ValidationError("sample \"" + s.id + "\" has no text");
    }
    out.push_back(*s.text);
  }
  return out;
}

std::vector<std::string> LabeledDataset::ids() const {
  std::vector<std::string> out;
  out.reserve(samples_.size());
  for (const Sample& s : samples_) out.push_back(s.id);
  return out;
}

std::vector<std::string> LabeledDataset::labels() const {
  std::vector<std::string> out;
  out.reserve(samples_.size());
  for (const Sample& s : samples_) out.push_back(s.label);
  return out;
}

LabeledDataset LabeledDataset::select(
    const std::vector<std::size_t>& indices) const {
  std::vector<Sample> picked;
  picked.reserve(indices.size());
  for (std::size_t i : indices) picked.push_back(samples_.at(i));
  return LabeledDataset(std::move(picked));
}

EmbeddingMatrix::EmbeddingMatrix(std::vector<std::string> sample_ids,
                                 std::size_t dims, std::vector<double> values)
    : sample_ids_(std::move(sample_ids)), dims_(dims),
      values_(std::move(values)) {
  if (values_.size() != sample_ids_.size() * dims_) {
    throw ValidationError("embedding buffer size " +
                          std::to_string(values_.size()) + " does not match " +
                          std::to_string(sample_ids_.size()) + " rows x " +
                          std::to_string(dims_) + " dims");
  }
  std::unordered_set<std::string> seen;
  seen.reserve(sample_ids_.size());
  for (std::size_t i = 0; i < sample_ids_.size(); ++i) {
    if (sample_ids_[i].empty()) {
      throw ValidationError("row " + std::to_string(i) + ": empty sample id");
    }
    if (!seen.insert(sample_ids_[i]).second) {
      throw ValidationError("row " + std::to_string(i) + ": duplicate id \"" +
                            sample_ids_[i] + "\"");
    }
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw ValidationError("row " + std::to_string(i / std::max<std::size_t>(
                                         dims_, 1)) +
                            ": non-finite value");
    }
  }
}

EmbeddingMatrix EmbeddingMatrix::from_eigen(
    std::vector<std::string> sample_ids, const Eigen::MatrixXd& m) {
  std::vector<double> values(static_cast<std::size_t>(m.rows()) *
                             static_cast<std::size_t>(m.cols()));
  Eigen::Map<RowMatrixXd>(values.data(), m.rows(), m.cols()) = m;
  return EmbeddingMatrix(std::move(sample_ids),
                         static_cast<std::size_t>(m.cols()),
                         std::move(values));
}

EmbeddingMatrix EmbeddingMatrix::select_rows(
    const std::vector<std::size_t>& indices) const {
  std::vector<std::string> ids;
  ids.reserve(indices.size());
  std::vector<double> values;
  values.reserve(indices.size() * dims_);
  for (std::size_t i : indices) {
    if (i >= rows()) {
      throw ValidationError("row index " + std::to_string(i) +
                            " out of range");
    }
    ids.push_back(sample_ids_[i]);
    values.insert(values.end(), values_.begin() + i * dims_,
                  values_.begin() + (i + 1) * dims_);
  }
  return EmbeddingMatrix(std::move(ids), dims_, std::move(values));
}

void check_aligned(const LabeledDataset& d, const EmbeddingMatrix& m) {
  if (d.size() != m.rows()) {
    throw ValidationError("dataset has " + std::to_string(d.size()) +
                          " samples but matrix has " +
                          std::to_string(m.rows()) + " rows");
  }
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.samples()[i].id != m.sample_ids()[i]) {
      throw ValidationError("row " + std::to_string(i) + ": dataset id \"" +
                            d.samples()[i].id + "\" does not match matrix id \"" +
                            m.sample_ids()[i] + "\"");
    }
  }
}

}  // namespace embedkit
