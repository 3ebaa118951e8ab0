#pragma once

#include <Eigen/Dense>
#include <vector>

#include "embedkit/dataset.hpp"

namespace embedkit {

// Per-dimension standardization statistics. Population convention (divide by
// N). Dimensions whose values never vary are listed in constant_dims and map
// to exactly 0 under transform().
struct Scaler {
  Eigen::VectorXd means;
  Eigen::VectorXd stds;
  std::vector<std::size_t> constant_dims;
};

Scaler fit_scaler(const EmbeddingMatrix& m);  // requires N >= 2
EmbeddingMatrix transform(const Scaler& s, const EmbeddingMatrix& m);

}  // namespace embedkit
