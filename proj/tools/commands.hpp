#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "report.hpp"

namespace embedkit::cli {

struct EmbedOptions {
  std::string texts_path;
  std::string service_url;
  std::string token_env;
  int batch_size = 16;
  double timeout_seconds = 30.0;
  std::string pooling = "service_pooled";
  double retry_backoff = 0.25;
  std::string out_path;  // packed binary embedding file
};

struct PcaOptions {
  RunContext ctx;
  std::string embeddings_path;
  std::string format;  // empty: infer from extension
  bool standardize = false;
  std::string components = "elbow";  // "elbow" or an integer
};

struct ScreeOptions {
  RunContext ctx;
  std::string embeddings_path;
  std::string format;
  bool standardize = false;
};

struct LdaOptions {
  RunContext ctx;
  std::string embeddings_path;
  std::string format;
  bool standardize = false;
  double train_fraction = 0.8;
  bool stratified = true;
  double shrinkage = -1.0;  // < 0: none
};

struct RegressOptions {
  RunContext ctx;
  std::string embeddings_path;
  std::string format;
  bool standardize = false;
  std::string pcs;      // e.g. "1" or "1,2" (1-based)
  int ld_axis = 0;      // 1-based; 0 = unused
  double train_fraction = 0.8;
  std::string indicator_label;    // comma-separated label set
  std::string indicator_preset;
  std::string indicator_rule_path;
  std::size_t indicator_length = 0;
  double indicator_special_ratio = 0.0;
  std::string texts_path;
};

struct KdeOptions {
  RunContext ctx;
  std::string embeddings_path;
  std::string format;
  bool standardize = false;
  int pc = 1;  // 1-based
  double bandwidth = 0.0;  // 0: Scott's rule
  int grid_points = 201;
};

struct DetectOptions {
  RunContext ctx;
  std::string reference_path;
  std::string contaminants_path;
  std::string format;
  std::string n_list;  // comma-separated; empty = paper grid
  std::string m_list;
  std::string n_pcs = "elbow";
  std::size_t seeds = 50;
  std::size_t max_trees = 200;
  std::size_t subsample = 0;
  unsigned threads = 1;
  bool fit_reference_only = false;
};

void run_embed(const EmbedOptions& opt);
void run_pca(const PcaOptions& opt);
void run_scree(const ScreeOptions& opt);
void run_lda(const LdaOptions& opt);
void run_regress(const RegressOptions& opt);
void run_kde(const KdeOptions& opt);
void run_detect(const DetectOptions& opt);

}  // namespace embedkit::cli
