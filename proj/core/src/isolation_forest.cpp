#include "embedkit/isolation_forest.hpp"

#include <cmath>

#include "embedkit/errors.hpp"
#include "embedkit/rng.hpp"

namespace embedkit {

namespace {

constexpr double kEulerGamma = 0.5772156649015329;

struct TreeBuilder {
  const Eigen::MatrixXd& points;
  std::vector<std::size_t>& rows;  // permuted in place while partitioning
  std::size_t height_limit;
  Rng& rng;
  IsolationTree tree;

  void node_range(std::size_t begin, std::size_t end, int dim, double& lo,
                  double& hi) const {
    lo = hi = points(static_cast<Eigen::Index>(rows[begin]), dim);
    for (std::size_t i = begin + 1; i < end; ++i) {
      const double v = points(static_cast<Eigen::Index>(rows[i]), dim);
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }

  // Builds the subtree over rows[begin, end) and returns its node index.
  std::int32_t build(std::size_t begin, std::size_t end, std::size_t depth) {
    const std::int32_t node_index = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[node_index].size = static_cast<std::uint32_t>(end - begin);
    if (end - begin <= 1 || depth >= height_limit) return node_index;

    // Split dimension: uniform over the dimensions that still vary inside the
    // node. Rejection sampling keeps that distribution without scanning every
    // dimension; the fallback enumeration only runs on near-degenerate nodes.
    const std::size_t dims = static_cast<std::size_t>(points.cols());
    int dim = -1;
    double lo = 0.0, hi = 0.0;
    for (std::size_t attempt = 0; attempt < 2 * dims + 8; ++attempt) {
      const int candidate = static_cast<int>(rng.next_below(dims));
      node_range(begin, end, candidate, lo, hi);
      if (hi > lo) {
        dim = candidate;
        break;
      }
    }
    if (dim < 0) {
      std::vector<int> valid;
      for (std::size_t j = 0; j < dims; ++j) {
        node_range(begin, end, static_cast<int>(j), lo, hi);
        if (hi > lo) valid.push_back(static_cast<int>(j));
      }
      if (valid.empty()) return node_index;  // all points identical here
      dim = valid[rng.next_below(valid.size())];
      node_range(begin, end, dim, lo, hi);
    }

    double u;
    do {
      u = rng.next_unit();
    } while (u == 0.0);
    const double value = lo + u * (hi - lo);

    // Partition: x < value left, rest right. Both sides are non-empty since
    // lo < value <= hi.
    std::size_t mid = begin;
    for (std::size_t i = begin; i < end; ++i) {
      if (points(static_cast<Eigen::Index>(rows[i]), dim) < value) {
        std::swap(rows[i], rows[mid]);
        ++mid;
      }
    }

    tree.nodes[node_index].split_dim = dim;
    tree.nodes[node_index].split_value = value;
    const std::int32_t left = build(begin, mid, depth + 1);
    const std::int32_t right = build(mid, end, depth + 1);
    tree.nodes[node_index].left = left;
    tree.nodes[node_index].right = right;
    return node_index;
  }
};

}  // namespace

double average_path_length(std::size_t n) {
  if (n <= 1) return 0.0;
  if (n == 2) return 1.0;
  const double k = static_cast<double>(n - 1);
  double harmonic;
  if (n <= 10000) {
    harmonic = 0.0;
    for (std::size_t i = 1; i < n; ++i) harmonic += 1.0 / static_cast<double>(i);
  } else {
    harmonic = std::log(k) + kEulerGamma + 1.0 / (2.0 * k);
  }
  return 2.0 * harmonic - 2.0 * k / static_cast<double>(n);
}

IsolationForestModel fit_forest(const Eigen::MatrixXd& points,
                                std::size_t n_trees, std::size_t subsample,
                                std::uint64_t seed) {
  const std::size_t n = static_cast<std::size_t>(points.rows());
  if (n < 2) throw ValidationError("fit_forest: need at least 2 points");
  if (points.cols() < 1) throw ValidationError("fit_forest: no dimensions");
  if (n_trees < 1) throw ValidationError("fit_forest: need at least 1 tree");
  if (subsample < 2 || subsample > n) {
    throw ValidationError("fit_forest: subsample must lie in [2, " +
                          std::to_string(n) + "]");
  }
  if (!points.allFinite()) throw ValidationError("fit_forest: non-finite input");

  IsolationForestModel model;
  model.n_trees = n_trees;
  model.subsample_size = subsample;
  model.dims = static_cast<std::size_t>(points.cols());
  model.height_limit = static_cast<std::size_t>(
      std::ceil(std::log2(static_cast<double>(subsample))));
  model.seed = seed;
  model.path_norms.resize(subsample + 1);
  for (std::size_t i = 0; i <= subsample; ++i) {
    model.path_norms[i] = average_path_length(i);
  }

  model.trees.reserve(n_trees);
  for (std::size_t t = 0; t < n_trees; ++t) {
    Rng rng(splitmix64(splitmix64(seed) ^ (t + 1)));
    std::vector<std::size_t> rows = sample_without_replacement(n, subsample, rng);
    TreeBuilder builder{points, rows, model.height_limit, rng, {}};
    builder.tree.nodes.reserve(2 * subsample);
    builder.build(0, subsample, 0);
    model.trees.push_back(std::move(builder.tree));
  }
  return model;
}

Eigen::VectorXd score(const IsolationForestModel& model,
                      const Eigen::MatrixXd& rows) {
  if (static_cast<std::size_t>(rows.cols()) != model.dims) {
    throw ValidationError("score: expected " + std::to_string(model.dims) +
                          " dims, got " + std::to_string(rows.cols()));
  }
  const double norm = model.path_norms[model.subsample_size];
  Eigen::VectorXd out(rows.rows());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    double total = 0.0;
    for (const IsolationTree& tree : model.trees) {
      std::size_t depth = 0;
      const IsolationTreeNode* node = &tree.nodes[0];
      while (node->split_dim >= 0) {
        node = rows(i, node->split_dim) < node->split_value
                   ? &tree.nodes[static_cast<std::size_t>(node->left)]
                   : &tree.nodes[static_cast<std::size_t>(node->right)];
        ++depth;
      }
      total += static_cast<double>(depth) + model.path_norms[node->size];
    }
    const double mean_path = total / static_cast<double>(model.trees.size());
    out(i) = std::pow(2.0, -mean_path / norm);
  }
  return out;
}

}  // namespace embedkit
