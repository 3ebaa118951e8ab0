#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace embedkit {

struct IsolationTreeNode {
  int split_dim = -1;  // -1 marks a leaf
  double split_value = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::uint32_t size = 0;  // training points that reached this node
};

struct IsolationTree {
  std::vector<IsolationTreeNode> nodes;  // node 0 is the root
};

struct IsolationForestModel {
  std::vector<IsolationTree> trees;
  std::size_t n_trees = 0;
  std::size_t subsample_size = 0;
  std::size_t dims = 0;
  std::size_t height_limit = 0;  // ceil(log2(subsample_size))
  std::uint64_t seed = 0;
  std::vector<double> path_norms;  // c(n) for n = 0..subsample_size
};

// c(n): expected path length of an unsuccessful BST search among n points.
// c(1) = 0, c(2) = 1, otherwise 2 H(n-1) - 2 (n-1)/n with the harmonic number
// summed exactly up to 1e4 and approximated by ln(n-1) + gamma + 1/(2(n-1))
// beyond.
double average_path_length(std::size_t n);

// Grows n_trees trees, each on a seeded random subsample of `subsample` rows.
// Split dimensions are drawn uniformly among dimensions with positive range
// in the node; split values uniformly inside (min, max). Recursion stops at
// the height limit, at singleton nodes, or when no dimension varies.
// Deterministic given the seed.
IsolationForestModel fit_forest(const Eigen::MatrixXd& points,
                                std::size_t n_trees, std::size_t subsample,
                                std::uint64_t seed);

// Anomaly scores s(x) = 2^(-E[h(x)] / c(subsample)); truncated leaves extend
// the path by c(leaf size). Higher = more anomalous.
Eigen::VectorXd score(const IsolationForestModel& model,
                      const Eigen::MatrixXd& rows);

}  // namespace embedkit
