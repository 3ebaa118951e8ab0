#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "embedkit/dataset.hpp"

namespace embedkit {

// Candidate tree counts for the parameter search ("up to 200 trees").
inline constexpr std::array<std::size_t, 6> kForestTreeGrid = {10,  25,  50,
                                                               100, 150, 200};

// Best tree count on the grid (restricted to <= max_trees) by mean AUROC over
// `seeds` independently seeded forests; ties go to the smaller count.
std::size_t tune_forest(const Eigen::MatrixXd& scores,
                        const std::vector<int>& truth,
                        std::size_t max_trees = 200, std::size_t seeds = 50,
                        std::size_t subsample = 0, std::uint64_t seed = 0);

// Synthetic contamination sweep: for every (N, M) cell and seed, sample N
// reference and M contaminant rows, standardize, fit PCA, keep n_pcs scores,
// fit an isolation forest (tree count tuned once per cell) and compute the
// AUROC with contaminants as positives.
struct ContaminationSpec {
  std::vector<std::size_t> n_reference = {100, 200, 300, 400, 500, 1000, 2000};
  std::vector<std::size_t> m_contaminants = {1, 2, 4, 6, 8, 10, 12, 15, 20};
  std::size_t n_pcs = 0;     // 0 selects the scree elbow per cell
  std::size_t seeds = 50;
  std::size_t max_trees = 200;
  std::size_t subsample = 0;  // 0 selects min(256, cell rows)
  std::uint64_t root_seed = 0;
  bool fit_on_reference_only = false;  // default: contaminants join the PCA fit
  unsigned threads = 1;
};

struct CellRun {
  std::size_t n = 0, m = 0, seed_index = 0, n_trees = 0;
  double auroc = 0.0;
};

struct CellSummary {
  std::size_t n = 0, m = 0, n_trees = 0;
  double mean_auroc = 0.0;
  double median_auroc = 0.0;
  std::vector<double> median_tpr;  // on the shared fpr grid
};

struct ContaminationResult {
  std::vector<CellRun> runs;        // ordered by (n, m, seed)
  std::vector<CellSummary> cells;   // ordered by (n, m)
  std::vector<double> fpr_grid;

  // csv export: `N,M,seed,n_trees,auroc`.
  void write_csv(const std::string& path) const;
  // Heatmap-ready per-cell aggregates plus median ROC curves.
  nlohmann::json summary_json() const;
};

// Per-cell work is independent; with spec.threads > 1 cells run in parallel
// and results are identical to the sequential order because every cell seeds
// its own streams via cell_seed(root, N, M, seed_index).
ContaminationResult run_contamination_experiment(
    const EmbeddingMatrix& reference, const EmbeddingMatrix& contaminants,
    const ContaminationSpec& spec);

}  // namespace embedkit
