#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "embedkit/errors.hpp"

namespace {

using namespace embedkit;
using namespace embedkit::cli;

void add_context_flags(CLI::App* cmd, RunContext& ctx) {
  cmd->add_option("--out", ctx.out_dir, "Output directory for reports and csv files")
      ->required();
  cmd->add_option("--seed", ctx.seed, "Root seed recorded in every output");
  cmd->add_flag("--deterministic", ctx.deterministic,
                "Strip wall-clock fields so outputs are byte-stable");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"embedding-space statistics toolkit: PCA/LDA structure "
               "discovery, cluster regression, and isolation-forest "
               "contamination detection"};
  app.require_subcommand(1);

  EmbedOptions embed;
  CLI::App* cmd_embed = app.add_subcommand(
      "embed", "Fetch embeddings for a text corpus from an embedding service");
  cmd_embed->add_option("--texts", embed.texts_path, "jsonl corpus: {id, label, text}")
      ->required();
  cmd_embed->add_option("--service-url", embed.service_url, "Embedding service base url")
      ->required();
  cmd_embed->add_option("--token-env", embed.token_env,
                        "Environment variable holding the bearer token");
  cmd_embed->add_option("--batch-size", embed.batch_size, "Texts per request");
  cmd_embed->add_option("--timeout", embed.timeout_seconds, "Request timeout in seconds");
  cmd_embed->add_option("--pooling", embed.pooling,
                        "service_pooled or mean_pool_then_normalize");
  cmd_embed->add_option("--retry-backoff", embed.retry_backoff,
                        "Initial retry backoff in seconds");
  cmd_embed->add_option("--out", embed.out_path, "Output packed embedding file (.embx)")
      ->required();
  bool embed_deterministic = false;
  cmd_embed->add_flag("--deterministic", embed_deterministic,
                      "Accepted for interface symmetry; embed output carries no clock");

  PcaOptions pca;
  CLI::App* cmd_pca = app.add_subcommand("pca", "Principal components and scores");
  cmd_pca->add_option("--embeddings", pca.embeddings_path, "Embedding file")->required();
  cmd_pca->add_option("--format", pca.format, "jsonl, csv or packed_binary");
  cmd_pca->add_flag("--standardize", pca.standardize, "Standardize before PCA");
  cmd_pca->add_option("--components", pca.components, "Component budget or \"elbow\"");
  add_context_flags(cmd_pca, pca.ctx);

  ScreeOptions scree;
  CLI::App* cmd_scree = app.add_subcommand("scree", "Explained-variance curve and elbow");
  cmd_scree->add_option("--embeddings", scree.embeddings_path, "Embedding file")->required();
  cmd_scree->add_option("--format", scree.format, "jsonl, csv or packed_binary");
  cmd_scree->add_flag("--standardize", scree.standardize, "Standardize before PCA");
  add_context_flags(cmd_scree, scree.ctx);

  LdaOptions lda;
  CLI::App* cmd_lda = app.add_subcommand("lda", "Linear discriminant train/test run");
  cmd_lda->add_option("--embeddings", lda.embeddings_path, "Embedding file")->required();
  cmd_lda->add_option("--format", lda.format, "jsonl, csv or packed_binary");
  cmd_lda->add_flag("--standardize", lda.standardize, "Standardize before LDA (default off)");
  cmd_lda->add_option("--train-fraction", lda.train_fraction, "Train fraction in (0,1)");
  bool no_stratify = false;
  cmd_lda->add_flag("--no-stratify", no_stratify, "Disable stratified splitting");
  cmd_lda->add_option("--shrinkage", lda.shrinkage,
                      "Within-covariance shrinkage lambda in [0,1]");
  add_context_flags(cmd_lda, lda.ctx);

  RegressOptions regress;
  CLI::App* cmd_regress = app.add_subcommand(
      "regress", "Cluster regression of component scores on an indicator");
  cmd_regress->add_option("--embeddings", regress.embeddings_path, "Embedding file")
      ->required();
  cmd_regress->add_option("--format", regress.format, "jsonl, csv or packed_binary");
  cmd_regress->add_flag("--standardize", regress.standardize, "Standardize first");
  cmd_regress->add_option("--pcs", regress.pcs, "1-based PC list, e.g. \"1\" or \"1,2\"");
  cmd_regress->add_option("--ld", regress.ld_axis, "1-based discriminant axis");
  cmd_regress->add_option("--train-fraction", regress.train_fraction,
                          "LDA train fraction when --ld is used");
  cmd_regress->add_option("--indicator-label", regress.indicator_label,
                          "Comma-separated label set");
  cmd_regress->add_option("--indicator-preset", regress.indicator_preset,
                          "stackexchange-phrases, arxiv-five-words, arxiv-econ-words, "
                          "we-our-count or short-abstract");
  cmd_regress->add_option("--indicator-rule", regress.indicator_rule_path,
                          "JSON rule file");
  cmd_regress->add_option("--indicator-length", regress.indicator_length,
                          "Length threshold in characters");
  cmd_regress->add_option("--indicator-special-ratio", regress.indicator_special_ratio,
                          "Special-character ratio threshold in (0,1)");
  cmd_regress->add_option("--texts", regress.texts_path,
                          "jsonl corpus for text-based indicators");
  add_context_flags(cmd_regress, regress.ctx);

  KdeOptions kde;
  CLI::App* cmd_kde = app.add_subcommand("kde", "Kernel density over one component");
  cmd_kde->add_option("--embeddings", kde.embeddings_path, "Embedding file")->required();
  cmd_kde->add_option("--format", kde.format, "jsonl, csv or packed_binary");
  cmd_kde->add_flag("--standardize", kde.standardize, "Standardize before PCA");
  cmd_kde->add_option("--pc", kde.pc, "1-based principal component");
  cmd_kde->add_option("--bandwidth", kde.bandwidth, "Kernel bandwidth (default Scott)");
  cmd_kde->add_option("--grid-points", kde.grid_points, "Evaluation grid size");
  add_context_flags(cmd_kde, kde.ctx);

  DetectOptions detect;
  CLI::App* cmd_detect = app.add_subcommand(
      "detect", "Isolation-forest contamination sweep over an (N, M) grid");
  cmd_detect->add_option("--reference", detect.reference_path, "Reference embeddings")
      ->required();
  cmd_detect->add_option("--contaminants", detect.contaminants_path,
                         "Contaminant embeddings")
      ->required();
  cmd_detect->add_option("--format", detect.format, "jsonl, csv or packed_binary");
  cmd_detect->add_option("--n", detect.n_list, "Reference sizes, e.g. \"100,200\"");
  cmd_detect->add_option("--m", detect.m_list, "Contaminant counts, e.g. \"1,2,4\"");
  cmd_detect->add_option("--n-pcs", detect.n_pcs, "Component budget or \"elbow\"");
  cmd_detect->add_option("--seeds", detect.seeds, "Seeds per cell");
  cmd_detect->add_option("--max-trees", detect.max_trees, "Upper bound for the tree search");
  cmd_detect->add_option("--subsample", detect.subsample,
                         "Forest subsample size (0 = min(256, rows))");
  cmd_detect->add_option("--threads", detect.threads, "Worker threads across cells");
  cmd_detect->add_flag("--fit-reference-only", detect.fit_reference_only,
                       "Fit scaler and PCA on reference rows only");
  add_context_flags(cmd_detect, detect.ctx);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and friends exit 0 through CLI11; real parse errors are usage errors.
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*cmd_embed) {
      run_embed(embed);
    } else if (*cmd_pca) {
      run_pca(pca);
    } else if (*cmd_scree) {
      run_scree(scree);
    } else if (*cmd_lda) {
      lda.stratified = !no_stratify;
      run_lda(lda);
    } else if (*cmd_regress) {
      run_regress(regress);
    } else if (*cmd_kde) {
      run_kde(kde);
    } else if (*cmd_detect) {
      run_detect(detect);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
