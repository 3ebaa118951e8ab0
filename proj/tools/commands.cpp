#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <unordered_map>

#include "embedkit/contamination.hpp"
#include "embedkit/dataset.hpp"
#include "embedkit/embedding_service.hpp"
#include "embedkit/errors.hpp"
#include "embedkit/indicators.hpp"
#include "embedkit/io.hpp"
#include "embedkit/kde.hpp"
#include "embedkit/lda.hpp"
#include "embedkit/pca.hpp"
#include "embedkit/regression.hpp"
#include "embedkit/scaler.hpp"

namespace embedkit::cli {

namespace {

using nlohmann::json;

Format resolve_format(const std::string& format, const std::string& path) {
  if (format.empty()) return format_from_path(path);
  const auto parsed = parse_format(format);
  if (!parsed) throw ValidationError("unknown format \"" + format + "\"");
  return *parsed;
}

LoadedEmbeddings load_input(const std::string& path, const std::string& format) {
  return load_embeddings(path, resolve_format(format, path));
}

EmbeddingMatrix maybe_standardize(const LoadedEmbeddings& loaded, bool standardize) {
  if (!standardize) return loaded.matrix;
  return transform(fit_scaler(loaded.matrix), loaded.matrix);
}

std::vector<std::size_t> parse_size_list(const std::string& text,
                                         const std::string& what) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    const std::string field = text.substr(start, end - start);
    if (!field.empty()) {
      try {
        const long long v = std::stoll(field);
        if (v < 0) throw std::invalid_argument("negative");
        out.push_back(static_cast<std::size_t>(v));
      } catch (const std::exception&) {
        throw ValidationError(what + ": cannot parse \"" + field + "\"");
      }
    }
    start = end + 1;
  }
  if (out.empty()) throw ValidationError(what + ": empty list");
  return out;
}

// "elbow" or a positive integer.
std::size_t resolve_budget(const std::string& text, const PcaModel& full_model,
                           const std::string& what) {
  if (text == "elbow") return scree_elbow(full_model.explained_variance);
  try {
    const long long v = std::stoll(text);
    if (v < 1 || v > full_model.components.rows()) {
      throw ValidationError(what + " = " + text + " out of range [1, " +
                            std::to_string(full_model.components.rows()) + "]");
    }
    return static_cast<std::size_t>(v);
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception&) {
    throw ValidationError(what + ": expected \"elbow\" or an integer, got \"" +
                          text + "\"");
  }
}

// Reorders a text corpus to the embedding row order, joining on id.
LabeledDataset align_texts(const LabeledDataset& embeddings_ds,
                           const std::string& texts_path) {
  const LabeledDataset texts = load_texts_jsonl(texts_path);
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < texts.size(); ++i) by_id[texts.samples()[i].id] = i;
  std::vector<Sample> aligned;
  aligned.reserve(embeddings_ds.size());
  for (const Sample& s : embeddings_ds.samples()) {
    const auto it = by_id.find(s.id);
    if (it == by_id.end()) {
      throw ValidationError("texts file has no record for sample \"" + s.id + "\"");
    }
    Sample joined = s;
    joined.text = texts.samples()[it->second].text;
    aligned.push_back(std::move(joined));
  }
  return LabeledDataset(std::move(aligned));
}

json pca_model_json(const PcaModel& model, std::size_t budget) {
  json j;
  j["n_fitted"] = model.n_fitted;
  j["components_kept"] = budget;
  j["explained_variance"] = std::vector<double>(
      model.explained_variance.data(),
      model.explained_variance.data() + model.explained_variance.size());
  j["explained_variance_ratio"] = std::vector<double>(
      model.explained_variance_ratio.data(),
      model.explained_variance_ratio.data() + model.explained_variance_ratio.size());
  return j;
}

}  // namespace

void run_embed(const EmbedOptions& opt) {
  const LabeledDataset texts = load_texts_jsonl(opt.texts_path);

  EmbeddingServiceConfig cfg;
  cfg.base_url = opt.service_url;
  cfg.auth_token_env = opt.token_env;
  cfg.batch_size = opt.batch_size;
  cfg.timeout_seconds = opt.timeout_seconds;
  cfg.initial_backoff_seconds = opt.retry_backoff;
  const auto pooling = parse_pooling(opt.pooling);
  if (!pooling) throw ValidationError("unknown pooling \"" + opt.pooling + "\"");
  cfg.pooling = *pooling;

  const EmbeddingMatrix m = fetch_embeddings(cfg, texts.texts(), texts.ids());
  save_embeddings(m, texts, opt.out_path, Format::packed_binary);
  std::cout << "wrote " << m.rows() << " x " << m.dims() << " embeddings to "
            << opt.out_path << "\n";
}

void run_pca(const PcaOptions& opt) {
  ReportBuilder report("pca", opt.ctx);
  report.set_config({{"embeddings", opt.embeddings_path},
                     {"standardize", opt.standardize},
                     {"components", opt.components}});
  report.add_input("embeddings", opt.embeddings_path);

  const LoadedEmbeddings loaded = load_input(opt.embeddings_path, opt.format);
  const EmbeddingMatrix m = maybe_standardize(loaded, opt.standardize);
  const std::size_t full_rank = std::min(m.rows() - 1, m.dims());
  if (m.rows() < 2 || full_rank < 1) {
    throw ValidationError("pca: need at least 2 rows");
  }
  const PcaModel model = fit_pca(m, full_rank);
  const std::size_t budget = resolve_budget(opt.components, model, "--components");

  std::vector<std::size_t> keep(budget);
  for (std::size_t i = 0; i < budget; ++i) keep[i] = i;
  const Eigen::MatrixXd scores = project(model, m, keep);

  const std::string scores_path = output_path(opt.ctx, "pca_scores.csv");
  write_scores_csv(scores_path, m.sample_ids(), loaded.dataset.labels(), "pc", scores);
  const std::string scree_path = output_path(opt.ctx, "scree.csv");
  write_scree_csv(scree_path, model);

  report.add_output("scores", "pca_scores.csv");
  report.add_output("scree", "scree.csv");
  report.results() = pca_model_json(model, budget);
  report.results()["elbow"] = scree_elbow(model.explained_variance);
  report.write();
  std::cout << "kept " << budget << " of " << full_rank << " components\n";
}

void run_scree(const ScreeOptions& opt) {
  ReportBuilder report("scree", opt.ctx);
  report.set_config({{"embeddings", opt.embeddings_path},
                     {"standardize", opt.standardize}});
  report.add_input("embeddings", opt.embeddings_path);

  const LoadedEmbeddings loaded = load_input(opt.embeddings_path, opt.format);
  const EmbeddingMatrix m = maybe_standardize(loaded, opt.standardize);
  const std::size_t full_rank = std::min(m.rows() - 1, m.dims());
  const PcaModel model = fit_pca(m, full_rank);

  const std::string scree_path = output_path(opt.ctx, "scree.csv");
  write_scree_csv(scree_path, model);
  report.add_output("scree", "scree.csv");
  report.results() = pca_model_json(model, full_rank);
  report.results()["elbow"] = scree_elbow(model.explained_variance);
  report.write();
  std::cout << "scree elbow at component "
            << scree_elbow(model.explained_variance) << "\n";
}

void run_lda(const LdaOptions& opt) {
  ReportBuilder report("lda", opt.ctx);
  report.set_config({{"embeddings", opt.embeddings_path},
                     {"standardize", opt.standardize},
                     {"train_fraction", opt.train_fraction},
                     {"stratified", opt.stratified},
                     {"shrinkage", opt.shrinkage}});
  report.add_input("embeddings", opt.embeddings_path);

  const LoadedEmbeddings loaded = load_input(opt.embeddings_path, opt.format);
  const EmbeddingMatrix m = maybe_standardize(loaded, opt.standardize);
  const DataSplit parts =
      split(loaded.dataset, m, {opt.train_fraction, opt.ctx.seed, opt.stratified});
  std::optional<double> shrinkage;
  if (opt.shrinkage >= 0.0) shrinkage = opt.shrinkage;
  const LdaModel model = fit_lda(parts.train_matrix, parts.train_dataset, shrinkage);
  const auto [accuracy, confusion] =
      evaluate(model, parts.test_matrix, parts.test_dataset);

  // All rows projected onto every axis, tagged train/test.
  std::vector<std::size_t> axes(model.n_axes());
  for (std::size_t i = 0; i < axes.size(); ++i) axes[i] = i;
  const Eigen::MatrixXd scores = transform_ld(model, m, axes);
  std::vector<char> is_train(m.rows(), 0);
  for (std::size_t i : parts.train_indices) is_train[i] = 1;

  const std::string scores_path = output_path(opt.ctx, "ld_scores.csv");
  {
    std::ofstream out(scores_path);
    if (!out) throw IoError("cannot open " + scores_path + " for writing");
    out << "id,label,split";
    for (std::size_t a = 1; a <= model.n_axes(); ++a) out << ",ld" << a;
    out << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
      out << m.sample_ids()[i] << ',' << loaded.dataset.samples()[i].label << ','
          << (is_train[i] ? "train" : "test");
      for (Eigen::Index a = 0; a < scores.cols(); ++a) {
        out << ',' << format_g9(scores(static_cast<Eigen::Index>(i), a));
      }
      out << '\n';
    }
  }
  const std::string confusion_path = output_path(opt.ctx, "confusion.csv");
  confusion.write_csv(confusion_path);

  report.add_output("ld_scores", "ld_scores.csv");
  report.add_output("confusion", "confusion.csv");
  report.results()["accuracy"] = accuracy;
  report.results()["confusion"] = confusion.to_json();
  report.results()["classes"] = model.class_names;
  report.results()["n_axes"] = model.n_axes();
  report.results()["train_size"] = parts.train_dataset.size();
  report.results()["test_size"] = parts.test_dataset.size();
  report.results()["rank_within"] = model.rank_within;
  report.results()["shrinkage_used"] = model.shrinkage_used;
  report.write();

  std::printf("test accuracy %.4f over %zu classes (%zu train / %zu test)\n",
              accuracy, model.class_names.size(), parts.train_dataset.size(),
              parts.test_dataset.size());
}

void run_regress(const RegressOptions& opt) {
  ReportBuilder report("regress", opt.ctx);
  report.add_input("embeddings", opt.embeddings_path);

  const LoadedEmbeddings loaded = load_input(opt.embeddings_path, opt.format);
  const EmbeddingMatrix m = maybe_standardize(loaded, opt.standardize);

  // Response scores: principal components or one discriminant axis.
  std::string response_name;
  Eigen::MatrixXd scores;
  if (!opt.pcs.empty() && opt.ld_axis > 0) {
    throw ValidationError("choose either --pcs or --ld, not both");
  }
  if (!opt.pcs.empty()) {
    const std::vector<std::size_t> pcs_1based = parse_size_list(opt.pcs, "--pcs");
    std::vector<std::size_t> pcs;
    std::size_t max_pc = 0;
    for (std::size_t p : pcs_1based) {
      if (p < 1) throw ValidationError("--pcs entries are 1-based");
      pcs.push_back(p - 1);
      max_pc = std::max(max_pc, p);
    }
    const std::size_t full_rank = std::min(m.rows() - 1, m.dims());
    if (max_pc > full_rank) {
      throw ValidationError("--pcs asks for PC " + std::to_string(max_pc) +
                            " but the rank is " + std::to_string(full_rank));
    }
    const PcaModel model = fit_pca(m, full_rank);
    scores = project(model, m, pcs);
    response_name = "PC";
    for (std::size_t i = 0; i < pcs_1based.size(); ++i) {
      response_name += (i ? "," : " ") + std::to_string(pcs_1based[i]);
    }
  } else if (opt.ld_axis > 0) {
    const DataSplit parts =
        split(loaded.dataset, m, {opt.train_fraction, opt.ctx.seed, true});
    const LdaModel model = fit_lda(parts.train_matrix, parts.train_dataset);
    if (static_cast<std::size_t>(opt.ld_axis) > model.n_axes()) {
      throw ValidationError("--ld " + std::to_string(opt.ld_axis) +
                            " exceeds the " + std::to_string(model.n_axes()) +
                            " available axes");
    }
    scores = transform_ld(model, m, {static_cast<std::size_t>(opt.ld_axis - 1)});
    response_name = "LD " + std::to_string(opt.ld_axis);
  } else {
    throw ValidationError("one of --pcs or --ld is required");
  }

  // Indicator: exactly one source.
  int sources = 0;
  sources += !opt.indicator_label.empty();
  sources += !opt.indicator_preset.empty();
  sources += !opt.indicator_rule_path.empty();
  sources += opt.indicator_length > 0;
  sources += opt.indicator_special_ratio > 0.0;
  if (sources != 1) {
    throw ValidationError("exactly one indicator source is required "
                          "(--indicator-label, --indicator-preset, --indicator-rule, "
                          "--indicator-length, --indicator-special-ratio)");
  }

  json rule;
  if (!opt.indicator_label.empty()) {
    json targets = json::array();
    std::size_t start = 0;
    const std::string& text = opt.indicator_label;
    while (start <= text.size()) {
      std::size_t end = text.find(',', start);
      if (end == std::string::npos) end = text.size();
      if (end > start) targets.push_back(text.substr(start, end - start));
      start = end + 1;
    }
    rule = {{"kind", "label"}, {"targets", targets}};
  } else if (!opt.indicator_preset.empty()) {
    rule = presets::rule_by_name(opt.indicator_preset);
  } else if (!opt.indicator_rule_path.empty()) {
    std::ifstream in(opt.indicator_rule_path);
    if (!in) throw IoError("cannot open " + opt.indicator_rule_path);
    try {
      in >> rule;
    } catch (const json::exception& e) {
      throw ValidationError(opt.indicator_rule_path + ": malformed rule: " + e.what());
    }
    report.add_input("indicator_rule", opt.indicator_rule_path);
  } else if (opt.indicator_length > 0) {
    rule = {{"kind", "length"}, {"threshold_chars", opt.indicator_length}};
  } else {
    rule = {{"kind", "special_char_ratio"},
            {"threshold_ratio", opt.indicator_special_ratio}};
  }

  const bool needs_text = rule["kind"] != "label";
  LabeledDataset rule_input = loaded.dataset;
  if (needs_text) {
    if (opt.texts_path.empty()) {
      throw ValidationError("indicator kind \"" + rule["kind"].get<std::string>() +
                            "\" needs --texts");
    }
    rule_input = align_texts(loaded.dataset, opt.texts_path);
    report.add_input("texts", opt.texts_path);
  }
  const IndicatorFeature indicator = apply_rule(rule, rule_input);

  const RegressionReport reg =
      scores.cols() == 1 ? regress_indicator(scores.col(0), indicator.values)
                         : regress_multi(scores, indicator.values);

  report.set_config({{"embeddings", opt.embeddings_path},
                     {"standardize", opt.standardize},
                     {"pcs", opt.pcs},
                     {"ld", opt.ld_axis},
                     {"texts", opt.texts_path}});
  report.results()["regression"] = reg.to_json();
  report.results()["response"] = response_name;
  report.results()["indicator"] = indicator.definition;
  report.results()["indicator_name"] = indicator.name;
  report.write();

  // Table mirroring the regression report columns.
  const json rj = reg.to_json();
  std::printf("%-10s %-28s %-8s %-8s %-10s %-10s\n", "response", "explanatory",
              "R^2", "r", "F-stat.", "p (for F)");
  std::printf("%-10s %-28s %-8.3g %-8.3g %-10s %-10.3g\n", response_name.c_str(),
              indicator.name.c_str(), reg.r_squared, reg.pearson_r,
              std::isinf(reg.f_statistic)
                  ? "inf"
                  : format_g9(reg.f_statistic).c_str(),
              rj["p_value"].get<double>());
}

void run_kde(const KdeOptions& opt) {
  ReportBuilder report("kde", opt.ctx);
  report.set_config({{"embeddings", opt.embeddings_path},
                     {"standardize", opt.standardize},
                     {"pc", opt.pc},
                     {"bandwidth", opt.bandwidth},
                     {"grid_points", opt.grid_points}});
  report.add_input("embeddings", opt.embeddings_path);
  if (opt.pc < 1) throw ValidationError("--pc is 1-based");
  if (opt.grid_points < 2) throw ValidationError("--grid-points must be >= 2");

  const LoadedEmbeddings loaded = load_input(opt.embeddings_path, opt.format);
  const EmbeddingMatrix m = maybe_standardize(loaded, opt.standardize);
  const std::size_t full_rank = std::min(m.rows() - 1, m.dims());
  if (static_cast<std::size_t>(opt.pc) > full_rank) {
    throw ValidationError("--pc " + std::to_string(opt.pc) +
                          " exceeds the rank " + std::to_string(full_rank));
  }
  const PcaModel model = fit_pca(m, full_rank);
  const Eigen::MatrixXd scores =
      project(model, m, {static_cast<std::size_t>(opt.pc - 1)});
  const Eigen::VectorXd column = scores.col(0);

  const KdeModel all_kde = fit_kde(column, opt.bandwidth);
  const double h = all_kde.bandwidth;
  const double lo = column.minCoeff() - 3.0 * h;
  const double hi = column.maxCoeff() + 3.0 * h;
  Eigen::VectorXd grid(opt.grid_points);
  for (int i = 0; i < opt.grid_points; ++i) {
    grid(i) = lo + (hi - lo) * static_cast<double>(i) / (opt.grid_points - 1);
  }

  // Per-class densities for classes with at least 2 samples.
  std::vector<std::string> kde_classes;
  std::vector<Eigen::VectorXd> class_density;
  for (const std::string& cls : loaded.dataset.class_names()) {
    std::vector<double> member_scores;
    for (std::size_t i = 0; i < loaded.dataset.size(); ++i) {
      if (loaded.dataset.samples()[i].label == cls) {
        member_scores.push_back(column(static_cast<Eigen::Index>(i)));
      }
    }
    if (member_scores.size() < 2) continue;
    Eigen::VectorXd pts(static_cast<Eigen::Index>(member_scores.size()));
    for (std::size_t i = 0; i < member_scores.size(); ++i) {
      pts(static_cast<Eigen::Index>(i)) = member_scores[i];
    }
    // Same bandwidth across classes keeps the curves comparable.
    class_density.push_back(kde_eval({pts, h}, grid));
    kde_classes.push_back(cls);
  }

  const Eigen::VectorXd all_density = kde_eval(all_kde, grid);
  const std::string kde_path = output_path(opt.ctx, "kde.csv");
  {
    std::ofstream out(kde_path);
    if (!out) throw IoError("cannot open " + kde_path + " for writing");
    out << "x,all";
    for (const std::string& cls : kde_classes) out << ',' << cls;
    out << '\n';
    for (int i = 0; i < opt.grid_points; ++i) {
      out << format_g9(grid(i)) << ',' << format_g9(all_density(i));
      for (const Eigen::VectorXd& d : class_density) out << ',' << format_g9(d(i));
      out << '\n';
    }
  }
  report.add_output("kde", "kde.csv");
  report.results()["bandwidth"] = h;
  report.results()["pc"] = opt.pc;
  report.results()["classes"] = kde_classes;
  report.write();
  std::cout << "kde over pc" << opt.pc << " with bandwidth " << format_g9(h) << "\n";
}

void run_detect(const DetectOptions& opt) {
  ReportBuilder report("detect", opt.ctx);
  report.add_input("reference", opt.reference_path);
  report.add_input("contaminants", opt.contaminants_path);

  const LoadedEmbeddings reference = load_input(opt.reference_path, opt.format);
  const LoadedEmbeddings contaminants = load_input(opt.contaminants_path, opt.format);

  ContaminationSpec spec;
  if (!opt.n_list.empty()) spec.n_reference = parse_size_list(opt.n_list, "--n");
  if (!opt.m_list.empty()) spec.m_contaminants = parse_size_list(opt.m_list, "--m");
  if (opt.n_pcs != "elbow") {
    try {
      spec.n_pcs = static_cast<std::size_t>(std::stoll(opt.n_pcs));
    } catch (const std::exception&) {
      throw ValidationError("--n-pcs: expected \"elbow\" or an integer");
    }
    if (spec.n_pcs < 1) throw ValidationError("--n-pcs must be >= 1");
  }
  spec.seeds = opt.seeds;
  spec.max_trees = opt.max_trees;
  spec.subsample = opt.subsample;
  spec.root_seed = opt.ctx.seed;
  spec.fit_on_reference_only = opt.fit_reference_only;
  spec.threads = opt.threads;

  const ContaminationResult result =
      run_contamination_experiment(reference.matrix, contaminants.matrix, spec);

  const std::string csv_path = output_path(opt.ctx, "auroc.csv");
  result.write_csv(csv_path);
  report.add_output("auroc", "auroc.csv");

  // Thread count is an execution detail with no effect on the numbers, so it
  // stays out of the config echo.
  report.set_config({{"reference", opt.reference_path},
                     {"contaminants", opt.contaminants_path},
                     {"n", spec.n_reference},
                     {"m", spec.m_contaminants},
                     {"n_pcs", opt.n_pcs},
                     {"seeds", spec.seeds},
                     {"max_trees", spec.max_trees},
                     {"subsample", spec.subsample},
                     {"fit_on_reference_only", spec.fit_on_reference_only}});
  report.results() = result.summary_json();
  report.write();

  for (const CellSummary& cell : result.cells) {
    std::printf("N=%-5zu M=%-3zu trees=%-3zu mean AUROC %.3f median %.3f\n",
                cell.n, cell.m, cell.n_trees, cell.mean_auroc, cell.median_auroc);
  }
}

}  // namespace embedkit::cli
