#include "embedkit/contamination.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <thread>

#include "embedkit/errors.hpp"
#include "embedkit/io.hpp"
#include "embedkit/isolation_forest.hpp"
#include "embedkit/pca.hpp"
#include "embedkit/rng.hpp"
#include "embedkit/roc.hpp"
#include "embedkit/scaler.hpp"

namespace embedkit {

namespace {

constexpr std::uint64_t kForestSalt = 0x666f726573743a31ULL;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::size_t resolve_subsample(std::size_t requested, std::size_t rows) {
  if (requested == 0) return std::min<std::size_t>(256, rows);
  if (requested > rows) {
    throw ValidationError("subsample " + std::to_string(requested) +
                          " exceeds " + std::to_string(rows) + " rows");
  }
  return requested;
}

// Step-curve value of the ROC at each grid fpr; vertical runs resolve to the
// highest tpr reached at that fpr.
std::vector<double> tpr_on_grid(const RocCurve& rc,
                                const std::vector<double>& grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double f : grid) {
    const auto it = std::upper_bound(rc.fpr.begin(), rc.fpr.end(), f);
    const std::size_t idx = static_cast<std::size_t>(it - rc.fpr.begin());
    if (idx >= rc.fpr.size()) {
      out.push_back(rc.tpr.back());
    } else if (rc.fpr[idx - 1] == f) {
      out.push_back(rc.tpr[idx - 1]);
    } else {
      const double span = rc.fpr[idx] - rc.fpr[idx - 1];
      const double w = (f - rc.fpr[idx - 1]) / span;
      out.push_back(rc.tpr[idx - 1] + w * (rc.tpr[idx] - rc.tpr[idx - 1]));
    }
  }
  return out;
}

struct CellSample {
  Eigen::MatrixXd scores;   // (n + m) x k component scores
  std::vector<int> truth;   // 1 for contaminant rows
};

CellSample sample_cell(const EmbeddingMatrix& reference,
                       const EmbeddingMatrix& contaminants, std::size_t n,
                       std::size_t m, std::uint64_t seed,
                       const ContaminationSpec& spec) {
  Rng rng(seed);
  const std::vector<std::size_t> ridx =
      sample_without_replacement(reference.rows(), n, rng);
  const std::vector<std::size_t> cidx =
      sample_without_replacement(contaminants.rows(), m, rng);

  const std::size_t dims = reference.dims();
  std::vector<std::string> ids;
  ids.reserve(n + m);
  std::vector<double> values;
  values.reserve((n + m) * dims);
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("r" + std::to_string(i));
    const auto row = reference.view().row(static_cast<Eigen::Index>(ridx[i]));
    values.insert(values.end(), row.data(), row.data() + dims);
  }
  for (std::size_t i = 0; i < m; ++i) {
    ids.push_back("c" + std::to_string(i));
    const auto row = contaminants.view().row(static_cast<Eigen::Index>(cidx[i]));
    values.insert(values.end(), row.data(), row.data() + dims);
  }
  EmbeddingMatrix combined(std::move(ids), dims, std::move(values));

  EmbeddingMatrix fit_rows = combined;
  if (spec.fit_on_reference_only) {
    std::vector<std::size_t> head(n);
    for (std::size_t i = 0; i < n; ++i) head[i] = i;
    fit_rows = combined.select_rows(head);
  }

  const Scaler scaler = fit_scaler(fit_rows);
  const EmbeddingMatrix standardized = transform(scaler, combined);
  const EmbeddingMatrix fit_standardized =
      spec.fit_on_reference_only ? transform(scaler, fit_rows) : standardized;

  const std::size_t max_k = std::min(fit_standardized.rows() - 1, dims);
  if (spec.n_pcs > max_k) {
    throw ValidationError("n_pcs = " + std::to_string(spec.n_pcs) +
                          " exceeds the PCA rank " + std::to_string(max_k) +
                          " for N=" + std::to_string(n) + ", M=" + std::to_string(m));
  }
  const PcaModel pca = fit_pca(fit_standardized, max_k);
  const std::size_t budget =
      spec.n_pcs > 0 ? spec.n_pcs : scree_elbow(pca.explained_variance);

  std::vector<std::size_t> keep(budget);
  for (std::size_t i = 0; i < budget; ++i) keep[i] = i;

  CellSample out;
  out.scores = project(pca, standardized, keep);
  out.truth.assign(n, 0);
  out.truth.insert(out.truth.end(), m, 1);
  return out;
}

struct CellOutput {
  std::vector<CellRun> runs;
  CellSummary summary;
};

CellOutput run_cell(const EmbeddingMatrix& reference,
                    const EmbeddingMatrix& contaminants, std::size_t n,
                    std::size_t m, const ContaminationSpec& spec,
                    const std::vector<double>& fpr_grid) {
  // One parameter search per cell, on a dedicated draw (seed index past the
  // experiment seeds).
  const std::uint64_t tune_seed = cell_seed(spec.root_seed, n, m, spec.seeds);
  const CellSample tune_sample =
      sample_cell(reference, contaminants, n, m, tune_seed, spec);
  const std::size_t tune_subsample = resolve_subsample(
      spec.subsample, static_cast<std::size_t>(tune_sample.scores.rows()));
  const std::size_t best_trees =
      tune_forest(tune_sample.scores, tune_sample.truth, spec.max_trees,
                  spec.seeds, tune_subsample, tune_seed);

  CellOutput out;
  out.runs.reserve(spec.seeds);
  std::vector<double> aurocs;
  aurocs.reserve(spec.seeds);
  std::vector<std::vector<double>> tprs;
  tprs.reserve(spec.seeds);

  for (std::size_t s = 0; s < spec.seeds; ++s) {
    const std::uint64_t cs = cell_seed(spec.root_seed, n, m, s);
    const CellSample sample = sample_cell(reference, contaminants, n, m, cs, spec);
    const std::size_t subsample = resolve_subsample(
        spec.subsample, static_cast<std::size_t>(sample.scores.rows()));
    const IsolationForestModel forest = fit_forest(
        sample.scores, best_trees, subsample, splitmix64(cs ^ kForestSalt));
    const Eigen::VectorXd anomaly = score(forest, sample.scores);
    const RocCurve rc = roc(anomaly, sample.truth);
    out.runs.push_back({n, m, s, best_trees, rc.auroc});
    aurocs.push_back(rc.auroc);
    tprs.push_back(tpr_on_grid(rc, fpr_grid));
  }

  out.summary.n = n;
  out.summary.m = m;
  out.summary.n_trees = best_trees;
  double sum = 0.0;
  for (double a : aurocs) sum += a;
  out.summary.mean_auroc = sum / static_cast<double>(aurocs.size());
  out.summary.median_auroc = median(aurocs);
  out.summary.median_tpr.resize(fpr_grid.size());
  std::vector<double> column(spec.seeds);
  for (std::size_t g = 0; g < fpr_grid.size(); ++g) {
    for (std::size_t s = 0; s < spec.seeds; ++s) column[s] = tprs[s][g];
    out.summary.median_tpr[g] = median(column);
  }
  return out;
}

}  // namespace

std::size_t tune_forest(const Eigen::MatrixXd& scores,
                        const std::vector<int>& truth, std::size_t max_trees,
                        std::size_t seeds, std::size_t subsample,
                        std::uint64_t seed) {
  if (seeds < 1) throw ValidationError("tune_forest: need at least 1 seed");
  const std::size_t rows = static_cast<std::size_t>(scores.rows());
  const std::size_t psi = resolve_subsample(subsample, rows);

  std::size_t best_count = 0;
  double best_mean = -1.0;
  for (std::size_t count : kForestTreeGrid) {
    if (count > max_trees) continue;
    double sum = 0.0;
    for (std::size_t s = 0; s < seeds; ++s) {
      const IsolationForestModel forest =
          fit_forest(scores, count, psi, cell_seed(seed, count, 0, s));
      sum += roc(score(forest, scores), truth).auroc;
    }
    const double mean = sum / static_cast<double>(seeds);
    if (mean > best_mean) {
      best_mean = mean;
      best_count = count;
    }
  }
  if (best_count == 0) {
    throw ValidationError("tune_forest: tree grid is empty below max_trees = " +
                          std::to_string(max_trees));
  }
  return best_count;
}

void ContaminationResult::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "N,M,seed,n_trees,auroc\n";
  for (const CellRun& run : runs) {
    out << run.n << ',' << run.m << ',' << run.seed_index << ',' << run.n_trees
        << ',' << format_g9(run.auroc) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

nlohmann::json ContaminationResult::summary_json() const {
  nlohmann::json j;
  j["fpr_grid"] = fpr_grid;
  nlohmann::json out_cells = nlohmann::json::array();
  for (const CellSummary& cell : cells) {
    nlohmann::json c;
    c["n"] = cell.n;
    c["m"] = cell.m;
    c["n_trees"] = cell.n_trees;
    c["mean_auroc"] = cell.mean_auroc;
    c["median_auroc"] = cell.median_auroc;
    c["median_tpr"] = cell.median_tpr;
    out_cells.push_back(std::move(c));
  }
  j["cells"] = std::move(out_cells);
  return j;
}

ContaminationResult run_contamination_experiment(
    const EmbeddingMatrix& reference, const EmbeddingMatrix& contaminants,
    const ContaminationSpec& spec) {
  if (spec.n_reference.empty() || spec.m_contaminants.empty()) {
    throw ValidationError("contamination: empty N or M grid");
  }
  if (spec.seeds < 1) throw ValidationError("contamination: seeds must be >= 1");
  if (reference.dims() != contaminants.dims()) {
    throw ValidationError("contamination: reference and contaminants disagree on dims");
  }
  for (std::size_t n : spec.n_reference) {
    if (n < 2) throw ValidationError("contamination: N must be >= 2");
    if (n > reference.rows()) {
      throw ValidationError("contamination: N = " + std::to_string(n) +
                            " exceeds " + std::to_string(reference.rows()) +
                            " reference rows");
    }
  }
  for (std::size_t m : spec.m_contaminants) {
    if (m < 1) {
      throw ValidationError("contamination: M must be >= 1 (AUROC needs both classes)");
    }
    if (m > contaminants.rows()) {
      throw ValidationError("contamination: M = " + std::to_string(m) +
                            " exceeds " + std::to_string(contaminants.rows()) +
                            " contaminant rows");
    }
  }

  ContaminationResult result;
  result.fpr_grid.resize(101);
  for (std::size_t i = 0; i <= 100; ++i) {
    result.fpr_grid[i] = static_cast<double>(i) / 100.0;
  }

  struct Cell {
    std::size_t n, m;
  };
  std::vector<Cell> grid;
  for (std::size_t n : spec.n_reference) {
    for (std::size_t m : spec.m_contaminants) grid.push_back({n, m});
  }
  std::vector<CellOutput> outputs(grid.size());

  auto worker_body = [&](std::size_t index) {
    outputs[index] = run_cell(reference, contaminants, grid[index].n,
                              grid[index].m, spec, result.fpr_grid);
  };

  const unsigned thread_count =
      std::max(1u, std::min<unsigned>(spec.threads,
                                      static_cast<unsigned>(grid.size())));
  if (thread_count == 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) worker_body(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (unsigned t = 0; t < thread_count; ++t) {
      pool.emplace_back([&] {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= grid.size()) break;
          try {
            worker_body(i);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
          }
        }
      });
    }
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  for (CellOutput& out : outputs) {
    result.runs.insert(result.runs.end(), out.runs.begin(), out.runs.end());
    result.cells.push_back(std::move(out.summary));
  }
  return result;
}

}  // namespace embedkit
