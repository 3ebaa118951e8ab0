#include "embedkit/lda.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "embedkit/errors.hpp"
#include "embedkit/rng.hpp"

namespace embedkit {

namespace {

constexpr double kRankTol = 1e-10;  // relative singular-value cutoff

std::size_t train_count(double fraction, std::size_t n) {
  auto t = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (t < 1) t = 1;
  if (t > n - 1) t = n - 1;
  return t;
}

// Gram-Schmidt extension of `basis` (columns orthonormal) by the directions
// in `extra`; residuals below `tol` are dropped.
void extend_basis(Eigen::MatrixXd& basis, const Eigen::MatrixXd& extra,
                  double tol) {
  for (Eigen::Index c = 0; c < extra.cols(); ++c) {
    Eigen::VectorXd v = extra.col(c);
    for (int pass = 0; pass < 2; ++pass) {
      if (basis.cols() > 0) v -= basis * (basis.transpose() * v);
    }
    const double norm = v.norm();
    if (norm > tol) {
      basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
      basis.col(basis.cols() - 1) = v / norm;
    }
  }
}

}  // namespace

DataSplit split(const LabeledDataset& d, const EmbeddingMatrix& m,
                const SplitSpec& s) {
  check_aligned(d, m);
  if (!(s.train_fraction > 0.0 && s.train_fraction < 1.0)) {
    throw ValidationError("split: train_fraction must lie in (0, 1)");
  }
  if (d.size() < 2) throw ValidationError("split: need at least 2 samples");

  Rng rng(s.seed);
  std::vector<std::size_t> train_idx, test_idx;

  if (s.stratified) {
    const std::vector<std::size_t> labels = d.label_indices();
    for (std::size_t c = 0; c < d.class_names().size(); ++c) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == c) members.push_back(i);
      }
      if (members.size() < 2) {
        throw ValidationError("split: class \"" + d.class_names()[c] +
                              "\" has fewer than 2 samples");
      }
      deterministic_shuffle(members, rng);
      const std::size_t t = train_count(s.train_fraction, members.size());
      train_idx.insert(train_idx.end(), members.begin(), members.begin() + t);
      test_idx.insert(test_idx.end(), members.begin() + t, members.end());
    }
  } else {
    std::vector<std::size_t> order(d.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    deterministic_shuffle(order, rng);
    const std::size_t t = train_count(s.train_fraction, order.size());
    train_idx.assign(order.begin(), order.begin() + t);
    test_idx.assign(order.begin() + t, order.end());
  }

  // Keep original row order inside each side.
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  DataSplit out;
  out.train_dataset = d.select(train_idx);
  out.test_dataset = d.select(test_idx);
  out.train_matrix = m.select_rows(train_idx);
  out.test_matrix = m.select_rows(test_idx);
  out.train_indices = std::move(train_idx);
  out.test_indices = std::move(test_idx);
  return out;
}

double ConfusionMatrix::accuracy() const {
  const long total = counts.sum();
  return total > 0 ? static_cast<double>(counts.trace()) / total : 0.0;
}

nlohmann::json ConfusionMatrix::to_json() const {
  nlohmann::json j;
  j["class_names"] = class_names;
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < counts.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < counts.cols(); ++k) row.push_back(counts(i, k));
    rows.push_back(row);
  }
  j["counts"] = rows;
  j["accuracy"] = accuracy();
  return j;
}

void ConfusionMatrix::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "true_class";
  for (const std::string& name : class_names) out << ',' << name;
  out << '\n';
  for (Eigen::Index i = 0; i < counts.rows(); ++i) {
    out << class_names[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < counts.cols(); ++k) out << ',' << counts(i, k);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

LdaModel fit_lda(const EmbeddingMatrix& m, const LabeledDataset& d,
                 std::optional<double> shrinkage) {
  check_aligned(d, m);
  const std::size_t n = m.rows();
  const std::size_t dims = m.dims();
  const std::size_t n_classes = d.class_names().size();
  if (n_classes < 2) throw ValidationError("fit_lda: need at least 2 classes");
  if (shrinkage && !(*shrinkage >= 0.0 && *shrinkage <= 1.0)) {
    throw ValidationError("fit_lda: shrinkage must lie in [0, 1]");
  }

  const std::vector<std::size_t> labels = d.label_indices();
  std::vector<std::size_t> class_count(n_classes, 0);
  for (std::size_t c : labels) ++class_count[c];
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (class_count[c] < 2) {
      throw ValidationError("fit_lda: class \"" + d.class_names()[c] +
                            "\" has fewer than 2 samples");
    }
  }

  LdaModel model;
  model.class_names = d.class_names();
  model.shrinkage = shrinkage.value_or(0.0);
  model.shrinkage_used = shrinkage.has_value() && *shrinkage > 0.0;

  const auto x = m.view();
  model.class_means = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_classes),
                                            static_cast<Eigen::Index>(dims));
  for (std::size_t i = 0; i < n; ++i) {
    model.class_means.row(static_cast<Eigen::Index>(labels[i])) +=
        x.row(static_cast<Eigen::Index>(i));
  }
  model.priors.resize(static_cast<Eigen::Index>(n_classes));
  for (std::size_t c = 0; c < n_classes; ++c) {
    model.class_means.row(static_cast<Eigen::Index>(c)) /=
        static_cast<double>(class_count[c]);
    model.priors(static_cast<Eigen::Index>(c)) =
        static_cast<double>(class_count[c]) / static_cast<double>(n);
  }
  model.global_mean = model.class_means.transpose() * model.priors;

  // Within-class scatter through the SVD of the class-centered data.
  Eigen::MatrixXd within(n, dims);
  for (std::size_t i = 0; i < n; ++i) {
    within.row(static_cast<Eigen::Index>(i)) =
        x.row(static_cast<Eigen::Index>(i)) -
        model.class_means.row(static_cast<Eigen::Index>(labels[i]));
  }
  Eigen::BDCSVD<Eigen::MatrixXd> wsvd(within, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = wsvd.singularValues();
  const double s_max = sv.size() > 0 ? sv(0) : 0.0;
  std::size_t rank = 0;
  while (rank < static_cast<std::size_t>(sv.size()) &&
         sv(static_cast<Eigen::Index>(rank)) > kRankTol * s_max && s_max > 0.0) {
    ++rank;
  }
  model.rank_within = rank;
  const double denom = n > n_classes ? static_cast<double>(n - n_classes)
                                     : 1.0;

  // Centered class means, the directions discrimination can live in.
  Eigen::MatrixXd mean_diffs(static_cast<Eigen::Index>(dims),
                             static_cast<Eigen::Index>(n_classes));
  double diff_scale = 0.0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    mean_diffs.col(static_cast<Eigen::Index>(c)) =
        model.class_means.row(static_cast<Eigen::Index>(c)).transpose() -
        model.global_mean;
    diff_scale = std::max(diff_scale, mean_diffs.col(static_cast<Eigen::Index>(c)).norm());
  }
  if (diff_scale == 0.0 && rank == 0) {
    throw ValidationError("fit_lda: degenerate input (all points identical)");
  }
  if (diff_scale == 0.0) {
    throw ValidationError("fit_lda: all class means coincide");
  }

  // Basis of the whitened space together with per-coordinate within variance.
  Eigen::MatrixXd basis(dims, 0);
  Eigen::VectorXd within_var;
  const double lambda = model.shrinkage_used ? model.shrinkage : 0.0;
  if (lambda > 0.0) {
    double trace = 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) trace += sv(i) * sv(i) / denom;
    const double iso = lambda * trace / static_cast<double>(dims);
    if (iso > 0.0) {
      basis = wsvd.matrixV().leftCols(static_cast<Eigen::Index>(rank));
      extend_basis(basis, mean_diffs, kRankTol * diff_scale);
      within_var.resize(basis.cols());
      for (Eigen::Index i = 0; i < basis.cols(); ++i) {
        const double w = i < static_cast<Eigen::Index>(rank)
                             ? sv(i) * sv(i) / denom
                             : 0.0;
        within_var(i) = (1.0 - lambda) * w + iso;
      }
    }
  }
  if (basis.cols() == 0) {
    if (rank > 0) {
      basis = wsvd.matrixV().leftCols(static_cast<Eigen::Index>(rank));
      within_var.resize(basis.cols());
      for (Eigen::Index i = 0; i < basis.cols(); ++i) {
        within_var(i) = sv(i) * sv(i) / denom;
      }
    } else {
      // Zero within-class scatter: whiten with the identity over the span of
      // the class-mean differences (nearest-class-mean geometry).
      extend_basis(basis, mean_diffs, kRankTol * diff_scale);
      within_var = Eigen::VectorXd::Ones(basis.cols());
    }
  }

  // Whitened class means, then the between-class stage.
  Eigen::MatrixXd whitener = basis;  // D x q, columns scaled by 1/sqrt(w)
  for (Eigen::Index i = 0; i < whitener.cols(); ++i) {
    whitener.col(i) /= std::sqrt(within_var(i));
  }
  Eigen::MatrixXd whitened_means =
      mean_diffs.transpose() * whitener;  // C x q
  const double between_denom =
      n_classes > 1 ? static_cast<double>(n_classes - 1) : 1.0;
  Eigen::MatrixXd between = whitened_means;
  for (std::size_t c = 0; c < n_classes; ++c) {
    between.row(static_cast<Eigen::Index>(c)) *=
        std::sqrt(static_cast<double>(class_count[c]) / between_denom);
  }
  Eigen::BDCSVD<Eigen::MatrixXd> bsvd(between, Eigen::ComputeThinV);
  const Eigen::VectorXd& bsv = bsvd.singularValues();
  const double b_max = bsv.size() > 0 ? bsv(0) : 0.0;
  if (b_max == 0.0) {
    throw ValidationError("fit_lda: class means coincide after whitening");
  }
  std::size_t n_axes = 0;
  const std::size_t axis_cap = n_classes - 1;
  while (n_axes < static_cast<std::size_t>(bsv.size()) && n_axes < axis_cap &&
         bsv(static_cast<Eigen::Index>(n_axes)) > kRankTol * b_max) {
    ++n_axes;
  }

  model.discriminant_axes =
      (whitener * bsvd.matrixV().leftCols(static_cast<Eigen::Index>(n_axes)))
          .transpose();  // A x D
  model.projection_scalings = bsv.head(static_cast<Eigen::Index>(n_axes));

  // Sign convention: class 0's mean projects negative; if its projection is
  // exactly zero, the first class with a nonzero projection decides.
  for (Eigen::Index a = 0; a < model.discriminant_axes.rows(); ++a) {
    for (std::size_t c = 0; c < n_classes; ++c) {
      const double t = model.discriminant_axes.row(a).dot(
          mean_diffs.col(static_cast<Eigen::Index>(c)));
      if (t != 0.0) {
        if (t > 0.0) model.discriminant_axes.row(a) = -model.discriminant_axes.row(a);
        break;
      }
    }
  }
  return model;
}

std::vector<std::string> predict(const LdaModel& model,
                                 const EmbeddingMatrix& m) {
  if (static_cast<Eigen::Index>(m.dims()) != model.class_means.cols()) {
    throw ValidationError("predict: matrix dims do not match model");
  }
  const Eigen::Index n_classes = model.class_means.rows();
  const Eigen::MatrixXd& axes = model.discriminant_axes;  // A x D

  // Scores of samples and class means in discriminant coordinates; the
  // Gaussian rule only depends on these because the whitened class means lie
  // in the span of the discriminant axes.
  Eigen::MatrixXd t =
      (m.view().rowwise() - model.global_mean.transpose()) * axes.transpose();
  Eigen::MatrixXd class_t =
      (model.class_means.rowwise() - model.global_mean.transpose()) *
      axes.transpose();  // C x A

  Eigen::VectorXd offset(n_classes);
  for (Eigen::Index c = 0; c < n_classes; ++c) {
    offset(c) = -0.5 * class_t.row(c).squaredNorm() + std::log(model.priors(c));
  }

  std::vector<std::string> out;
  out.reserve(m.rows());
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    Eigen::Index best = 0;
    double best_score = t.row(i).dot(class_t.row(0)) + offset(0);
    for (Eigen::Index c = 1; c < n_classes; ++c) {
      const double score = t.row(i).dot(class_t.row(c)) + offset(c);
      if (score > best_score) {
        best_score = score;
        best = c;
      }
    }
    out.push_back(model.class_names[static_cast<std::size_t>(best)]);
  }
  return out;
}

Eigen::MatrixXd transform_ld(const LdaModel& model, const EmbeddingMatrix& m,
                             const std::vector<std::size_t>& axes) {
  if (static_cast<Eigen::Index>(m.dims()) != model.class_means.cols()) {
    throw ValidationError("transform_ld: matrix dims do not match model");
  }
  Eigen::MatrixXd selected(static_cast<Eigen::Index>(axes.size()),
                           model.discriminant_axes.cols());
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (axes[i] >= model.n_axes()) {
      throw ValidationError("transform_ld: axis index " +
                            std::to_string(axes[i]) + " out of range");
    }
    selected.row(static_cast<Eigen::Index>(i)) =
        model.discriminant_axes.row(static_cast<Eigen::Index>(axes[i]));
  }
  return (m.view().rowwise() - model.global_mean.transpose()) *
         selected.transpose();
}

std::pair<double, ConfusionMatrix> evaluate(const LdaModel& model,
                                            const EmbeddingMatrix& test,
                                            const LabeledDataset& labels) {
  check_aligned(labels, test);
  if (test.rows() == 0) throw ValidationError("evaluate: empty test set");
  const std::size_t n_classes = model.class_names.size();

  ConfusionMatrix cm;
  cm.class_names = model.class_names;
  cm.counts = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(n_classes),
                                    static_cast<Eigen::Index>(n_classes));

  auto class_of = [&](const std::string& label) -> std::size_t {
    for (std::size_t c = 0; c < n_classes; ++c) {
      if (model.class_names[c] == label) return c;
    }
    throw ValidationError("evaluate: label \"" + label +
                          "\" was not seen at fit time");
  };

  const std::vector<std::string> predicted = predict(model, test);
  for (std::size_t i = 0; i < test.rows(); ++i) {
    const std::size_t truth = class_of(labels.samples()[i].label);
    const std::size_t pred = class_of(predicted[i]);
    cm.counts(static_cast<Eigen::Index>(truth), static_cast<Eigen::Index>(pred)) += 1;
  }
  return {cm.accuracy(), cm};
}

}  // namespace embedkit
