#include <Eigen/Dense>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "embedkit/dataset.hpp"
#include "embedkit/errors.hpp"
#include "embedkit/lda.hpp"
#include "embedkit/regression.hpp"
#include "embedkit/rng.hpp"
#include "oracles.hpp"

using namespace embedkit;

namespace {

struct Labeled {
  EmbeddingMatrix matrix;
  LabeledDataset dataset;
};

Labeled make_labeled(const Eigen::MatrixXd& x, const std::vector<std::string>& labels) {
  std::vector<Sample> samples(labels.size());
  std::vector<std::string> ids(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ids[i] = "s" + std::to_string(i);
    samples[i].id = ids[i];
    samples[i].label = labels[i];
  }
  return {EmbeddingMatrix::from_eigen(ids, x), LabeledDataset(samples)};
}

// Two Gaussian blobs at means +-offset along the first axis.
Labeled two_blobs(int per_class, int dims, double offset, Rng& rng) {
  Eigen::MatrixXd x(2 * per_class, dims);
  std::vector<std::string> labels;
  for (int i = 0; i < 2 * per_class; ++i) {
    const int cls = i < per_class ? 0 : 1;
    labels.push_back(cls == 0 ? "a" : "b");
    for (int j = 0; j < dims; ++j) x(i, j) = rng.next_normal();
    x(i, 0) += cls == 0 ? -offset : offset;
  }
  return make_labeled(x, labels);
}

}  // namespace

TEST_CASE("stratified split yields the expected class counts") {
  Rng rng(1);
  Eigen::MatrixXd x = oracles::random_normal(100, 3, rng);
  std::vector<std::string> labels;
  for (int i = 0; i < 100; ++i) labels.push_back(i % 2 == 0 ? "a" : "b");
  const Labeled data = make_labeled(x, labels);

  const DataSplit s = split(data.dataset, data.matrix, {0.8, 7, true});
  CHECK(s.train_dataset.size() == 80);
  CHECK(s.test_dataset.size() == 20);
  std::size_t train_a = 0, test_a = 0;
  for (const Sample& smp : s.train_dataset.samples()) train_a += smp.label == "a";
  for (const Sample& smp : s.test_dataset.samples()) test_a += smp.label == "a";
  CHECK(train_a == 40);
  CHECK(test_a == 10);
}

TEST_CASE("split is deterministic given the seed and partitions exactly") {
  Rng rng(2);
  Eigen::MatrixXd x = oracles::random_normal(57, 2, rng);
  std::vector<std::string> labels;
  for (int i = 0; i < 57; ++i) labels.push_back("c" + std::to_string(i % 3));
  const Labeled data = make_labeled(x, labels);

  const DataSplit s1 = split(data.dataset, data.matrix, {0.7, 99, true});
  const DataSplit s2 = split(data.dataset, data.matrix, {0.7, 99, true});
  CHECK(s1.train_indices == s2.train_indices);
  CHECK(s1.test_indices == s2.test_indices);

  const DataSplit s3 = split(data.dataset, data.matrix, {0.7, 100, true});
  CHECK(s1.train_indices != s3.train_indices);

  std::set<std::size_t> all(s1.train_indices.begin(), s1.train_indices.end());
  all.insert(s1.test_indices.begin(), s1.test_indices.end());
  CHECK(all.size() == 57);

  // Proportions within one sample per class.
  for (const std::string& cls : data.dataset.class_names()) {
    std::size_t total = 0, train = 0;
    for (const Sample& smp : data.dataset.samples()) total += smp.label == cls;
    for (const Sample& smp : s1.train_dataset.samples()) train += smp.label == cls;
    CHECK(std::fabs(static_cast<double>(train) - 0.7 * static_cast<double>(total)) <= 1.0);
  }
}

TEST_CASE("split reproduces the 70/30 arithmetic of a 11704 x 4 dataset") {
  const std::size_t per_class = 11704;
  std::vector<Sample> samples(per_class * 4);
  std::vector<std::string> ids(per_class * 4);
  std::vector<double> values(per_class * 4, 0.0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i].id = "q" + std::to_string(i);
    samples[i].label = "m" + std::to_string(i % 4);
    values[i] = static_cast<double>(i % 97);
    ids[i] = samples[i].id;
  }
  const LabeledDataset d(samples);
  const EmbeddingMatrix m(ids, 1, values);
  const DataSplit s = split(d, m, {0.7, 0, true});
  // round(0.7 * 11704) = 8193 per class
  CHECK(s.train_dataset.size() == 4 * 8193);
  CHECK(s.test_dataset.size() == 4 * (per_class - 8193));
}

TEST_CASE("stratified split rejects classes with fewer than 2 samples") {
  Eigen::MatrixXd x(3, 2);
  x << 0, 0, 1, 1, 2, 2;
  const Labeled data = make_labeled(x, {"a", "a", "b"});
  CHECK_THROWS_AS(split(data.dataset, data.matrix, {0.5, 0, true}), ValidationError);
  CHECK_NOTHROW(split(data.dataset, data.matrix, {0.5, 0, false}));
}

TEST_CASE("fit_lda separates two Gaussian blobs and matches Fisher's direction") {
  Rng rng(42);
  const Labeled data = two_blobs(50, 2, 5.0, rng);
  const LdaModel model = fit_lda(data.matrix, data.dataset);
  REQUIRE(model.n_axes() == 1);

  // Closed-form Fisher direction w ~ S_W^-1 (mu1 - mu0).
  std::vector<int> cls(100);
  for (int i = 0; i < 100; ++i) cls[static_cast<std::size_t>(i)] = i < 50 ? 0 : 1;
  const Eigen::VectorXd fisher = oracles::fisher_direction(data.matrix.view(), cls);
  const double cosine = std::fabs(model.discriminant_axes.row(0).dot(fisher) /
                                  (model.discriminant_axes.row(0).norm() * fisher.norm()));
  CHECK(cosine > 0.99);

  // Held-out accuracy is perfect at this separation.
  Rng rng2(43);
  const Labeled held = two_blobs(100, 2, 5.0, rng2);
  const auto [accuracy, confusion] = evaluate(model, held.matrix, held.dataset);
  CHECK(accuracy == 1.0);
  CHECK(confusion.counts(0, 0) == 100);
  CHECK(confusion.counts(1, 1) == 100);

  CHECK(model.priors.sum() == doctest::Approx(1.0).epsilon(1e-12));

  // Class means project with opposite signs on LD1, class 0 negative.
  const Eigen::MatrixXd mean_scores =
      transform_ld(model, EmbeddingMatrix::from_eigen({"m0", "m1"}, model.class_means), {0});
  CHECK(mean_scores(0, 0) < 0.0);
  CHECK(mean_scores(1, 0) > 0.0);

  // LD1 scores regressed on the class indicator explain nearly everything.
  const Eigen::MatrixXd scores = transform_ld(model, data.matrix, {0});
  std::vector<int> indicator(100);
  for (int i = 0; i < 100; ++i) indicator[static_cast<std::size_t>(i)] = i < 50 ? 0 : 1;
  const RegressionReport r = regress_indicator(scores.col(0), indicator);
  CHECK(r.r_squared > 0.95);
}

TEST_CASE("binary LDA matches Fisher across random well-conditioned problems") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(200 + seed);
    const int dims = 2 + static_cast<int>(rng.next_below(6));
    const Labeled data = two_blobs(40, dims, 1.0 + rng.next_unit() * 3.0, rng);
    const LdaModel model = fit_lda(data.matrix, data.dataset);
    std::vector<int> cls(80);
    for (int i = 0; i < 80; ++i) cls[static_cast<std::size_t>(i)] = i < 40 ? 0 : 1;
    const Eigen::VectorXd fisher = oracles::fisher_direction(data.matrix.view(), cls);
    const double cosine = std::fabs(model.discriminant_axes.row(0).dot(fisher) /
                                    (model.discriminant_axes.row(0).norm() * fisher.norm()));
    CHECK(cosine >= 0.999);
  }
}

TEST_CASE("fit_lda handles classes of identical points by truncation") {
  Eigen::MatrixXd x(6, 3);
  x << 0, 0, 0, 0, 0, 0, 5, 1, 0, 5, 1, 0, -2, 4, 1, -2, 4, 1;
  const Labeled data = make_labeled(x, {"a", "a", "b", "b", "c", "c"});
  const LdaModel model = fit_lda(data.matrix, data.dataset);
  CHECK(model.rank_within == 0);
  CHECK(model.n_axes() == 2);
  const auto [accuracy, confusion] = evaluate(model, data.matrix, data.dataset);
  CHECK(accuracy == 1.0);
}

TEST_CASE("fit_lda rejects fully degenerate input") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(4, 2);
  const Labeled data = make_labeled(x, {"a", "a", "b", "b"});
  CHECK_THROWS_AS(fit_lda(data.matrix, data.dataset), ValidationError);
}

TEST_CASE("fit_lda survives D >> N with rank truncation") {
  Rng rng(77);
  const int dims = 4096, per_class = 400, rank = 40;
  // Low-rank generator: every sample lives in a 40-dimensional random
  // subspace; the class shift sits along the first basis direction.
  Eigen::MatrixXd basis(dims, rank);
  for (int j = 0; j < rank; ++j) basis.col(j) = oracles::random_unit_vector(dims, rng);
  Eigen::MatrixXd coeffs(2 * per_class, rank);
  std::vector<std::string> labels;
  for (int i = 0; i < 2 * per_class; ++i) {
    const int cls = i < per_class ? 0 : 1;
    labels.push_back(cls == 0 ? "real" : "synthetic");
    for (int j = 0; j < rank; ++j) coeffs(i, j) = rng.next_normal();
    coeffs(i, 0) += cls == 0 ? -3.0 : 3.0;
  }
  const Eigen::MatrixXd x = coeffs * basis.transpose();
  const Labeled data = make_labeled(x, labels);
  const DataSplit s = split(data.dataset, data.matrix, {0.8, 5, true});
  const LdaModel model = fit_lda(s.train_matrix, s.train_dataset);
  CHECK(model.rank_within > 0);
  CHECK(model.rank_within < static_cast<std::size_t>(dims));

  const auto [accuracy, confusion] = evaluate(model, s.test_matrix, s.test_dataset);
  // Oracle: nearest class mean in the whitened space is exactly the model's
  // rule for equal priors, so the fit should beat chance comfortably.
  CHECK(accuracy > 0.9);
}

TEST_CASE("predict maps class means to their class and breaks ties low") {
  // Symmetric data: exact tie at the midpoint must resolve to class 0.
  Eigen::MatrixXd x(4, 2);
  x << -3, 0, -1, 1, 1, 0, 3, 1;
  const Labeled data = make_labeled(x, {"a", "a", "b", "b"});
  const LdaModel model = fit_lda(data.matrix, data.dataset);

  EmbeddingMatrix probes = EmbeddingMatrix::from_eigen(
      {"mean0", "mean1", "midpoint"},
      (Eigen::MatrixXd(3, 2) << model.class_means.row(0),
       model.class_means.row(1), 0.5 * (model.class_means.row(0) + model.class_means.row(1)))
          .finished());
  const std::vector<std::string> out = predict(model, probes);
  CHECK(out[0] == "a");
  CHECK(out[1] == "b");
  CHECK(out[2] == "a");  // tie resolves to the lower class index
}

TEST_CASE("evaluate counts the confusion matrix by true class") {
  Rng rng(55);
  // Separable 4-class data.
  Eigen::MatrixXd x(40, 2);
  std::vector<std::string> labels;
  for (int i = 0; i < 40; ++i) {
    const int cls = i / 10;
    labels.push_back("c" + std::to_string(cls));
    x(i, 0) = cls * 10.0 + 0.1 * rng.next_normal();
    x(i, 1) = 0.1 * rng.next_normal();
  }
  const Labeled data = make_labeled(x, labels);
  const LdaModel model = fit_lda(data.matrix, data.dataset);

  const auto [accuracy, confusion] = evaluate(model, data.matrix, data.dataset);
  CHECK(accuracy == 1.0);
  CHECK(confusion.counts.diagonal().sum() == 40);

  // Degenerate probe: every test point sits at class 0's mean, so the
  // prediction is always class 0 and balanced truth gives accuracy 1/C.
  Eigen::MatrixXd at_mean(40, 2);
  for (int i = 0; i < 40; ++i) at_mean.row(i) = model.class_means.row(0);
  std::vector<std::string> probe_ids;
  std::vector<Sample> probe_samples(40);
  for (int i = 0; i < 40; ++i) {
    probe_ids.push_back("p" + std::to_string(i));
    probe_samples[static_cast<std::size_t>(i)].id = probe_ids.back();
    probe_samples[static_cast<std::size_t>(i)].label = labels[static_cast<std::size_t>(i)];
  }
  const auto [acc0, cm0] = evaluate(model, EmbeddingMatrix::from_eigen(probe_ids, at_mean),
                                    LabeledDataset(probe_samples));
  CHECK(acc0 == doctest::Approx(0.25));
  for (Eigen::Index c = 0; c < 4; ++c) {
    CHECK(cm0.counts.row(c).sum() == 10);  // row sums = per-class test counts
    CHECK(cm0.counts(c, 0) == 10);
  }
}

TEST_CASE("prediction is invariant under positive affine rescaling refit end-to-end") {
  Rng rng(66);
  const Labeled data = two_blobs(30, 3, 1.0, rng);
  Rng rng2(67);
  const Labeled probe = two_blobs(20, 3, 1.0, rng2);

  const LdaModel base = fit_lda(data.matrix, data.dataset);
  const std::vector<std::string> base_pred = predict(base, probe.matrix);

  const double a = 3.7;
  const Eigen::RowVectorXd b = Eigen::RowVectorXd::Constant(3, -11.0);
  const EmbeddingMatrix scaled_train = EmbeddingMatrix::from_eigen(
      data.matrix.sample_ids(), (data.matrix.view() * a).rowwise() + b);
  const EmbeddingMatrix scaled_probe = EmbeddingMatrix::from_eigen(
      probe.matrix.sample_ids(), (probe.matrix.view() * a).rowwise() + b);
  const LdaModel refit = fit_lda(scaled_train, data.dataset);
  CHECK(predict(refit, scaled_probe) == base_pred);
}

TEST_CASE("separable data with margin >= 5 sigma classifies perfectly across seeds") {
  // Uniform per-coordinate noise in [-sqrt(3), sqrt(3)] has unit variance and
  // bounded support, so centers 4.25 sigma out leave a 5 sigma margin.
  const double half_width = std::sqrt(3.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(300 + seed);
    const int dims = 8, per_class = 100;
    Eigen::MatrixXd x(2 * per_class, dims);
    std::vector<std::string> labels;
    for (int i = 0; i < 2 * per_class; ++i) {
      const int cls = i < per_class ? 0 : 1;
      labels.push_back(cls == 0 ? "a" : "b");
      for (int j = 0; j < dims; ++j) {
        x(i, j) = (2.0 * rng.next_unit() - 1.0) * half_width;
      }
      x(i, 0) += cls == 0 ? -4.25 : 4.25;
    }
    const Labeled data = make_labeled(x, labels);
    const DataSplit s = split(data.dataset, data.matrix, {0.8, seed, true});
    const LdaModel model = fit_lda(s.train_matrix, s.train_dataset);
    const auto [accuracy, cm] = evaluate(model, s.test_matrix, s.test_dataset);
    CHECK(accuracy == 1.0);
  }
}

TEST_CASE("shrinkage recovers signal orthogonal to the within-class scatter") {
  // Mean separation lives along x, all within-class variation along y. Plain
  // truncation throws the discriminating direction away; shrinkage keeps it.
  Eigen::MatrixXd x(4, 2);
  x << 0, -1, 0, 1, 5, -1, 5, 1;
  const Labeled data = make_labeled(x, {"a", "a", "b", "b"});
  CHECK_THROWS_AS(fit_lda(data.matrix, data.dataset), ValidationError);

  const LdaModel model = fit_lda(data.matrix, data.dataset, 0.5);
  CHECK(model.shrinkage_used);
  const auto [accuracy, cm] = evaluate(model, data.matrix, data.dataset);
  CHECK(accuracy == 1.0);
}

TEST_CASE("number of axes never exceeds C - 1") {
  Rng rng(88);
  for (int classes = 2; classes <= 5; ++classes) {
    Eigen::MatrixXd x(classes * 20, 7);
    std::vector<std::string> labels;
    for (int i = 0; i < classes * 20; ++i) {
      const int cls = i % classes;
      labels.push_back("k" + std::to_string(cls));
      for (int j = 0; j < 7; ++j) x(i, j) = rng.next_normal();
      x(i, std::min(cls, 6)) += 6.0 * cls;
    }
    const Labeled data = make_labeled(x, labels);
    const LdaModel model = fit_lda(data.matrix, data.dataset);
    CHECK(model.n_axes() <= static_cast<std::size_t>(classes - 1));
    CHECK_THROWS_AS(transform_ld(model, data.matrix, {model.n_axes()}), ValidationError);
  }
}
