#include "embedkit/scaler.hpp"

#include <cmath>

#include "embedkit/errors.hpp"

namespace embedkit {

Scaler fit_scaler(const EmbeddingMatrix& m) {
  if (m.rows() < 2) {
    throw ValidationError("fit_scaler: need at least 2 rows, got " +
                          std::to_string(m.rows()));
  }
  const auto x = m.view();
  Scaler s;
  s.means = x.colwise().mean();
  s.stds.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    // Range test makes "constant" exact even when the mean rounds.
    if (x.col(j).maxCoeff() == x.col(j).minCoeff()) {
      s.stds(j) = 0.0;
      s.constant_dims.push_back(static_cast<std::size_t>(j));
    } else {
      s.stds(j) = std::sqrt((x.col(j).array() - s.means(j)).square().sum() /
                            static_cast<double>(x.rows()));
    }
  }
  return s;
}

EmbeddingMatrix transform(const Scaler& s, const EmbeddingMatrix& m) {
  if (static_cast<std::size_t>(s.means.size()) != m.dims()) {
    throw ValidationError("transform: scaler has " +
                          std::to_string(s.means.size()) + " dims, matrix has " +
                          std::to_string(m.dims()));
  }
  Eigen::MatrixXd out = m.view();
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    if (s.stds(j) == 0.0) {
      out.col(j).setZero();
    } else {
      out.col(j) = (out.col(j).array() - s.means(j)) / s.stds(j);
    }
  }
  return EmbeddingMatrix::from_eigen(m.sample_ids(), out);
}

}  // namespace embedkit
