#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "embedkit/dataset.hpp"

namespace embedkit {

// On-disk embedding formats.
//   jsonl          one record per line: {"id": ..., "label": ..., "vector": [...]}
//   csv            header `id,label,v0,...,v{D-1}`
//   packed_binary  little-endian "EMBX" magic, u32 version=1, u32 N, u32 D,
//                  N*D float32 row-major, plus a `<path>.manifest.json`
//                  sidecar holding {"ids": [...], "labels": [...]}
//
// Text formats print 9 significant digits; packed_binary is the fidelity
// format (values round-trip through float32).
enum class Format { jsonl, csv, packed_binary };

std::optional<Format> parse_format(const std::string& name);
Format format_from_path(const std::string& path);
std::string format_name(Format f);

struct LoadedEmbeddings {
  EmbeddingMatrix matrix;
  LabeledDataset dataset;
};

LoadedEmbeddings load_embeddings(const std::string& path, Format format);
void save_embeddings(const EmbeddingMatrix& m, const LabeledDataset& d,
                     const std::string& path, Format format);

// Text corpus, one record per line: {"id": ..., "label": ..., "text": ...}.
// label is optional and defaults to "".
LabeledDataset load_texts_jsonl(const std::string& path);

// Shortest-of-9-significant-digits float formatting shared by all csv and
// jsonl writers.
std::string format_g9(double v);

// Plot-ready score export: header `id,label,<prefix>1,...,<prefix>K`.
void write_scores_csv(const std::string& path,
                      const std::vector<std::string>& ids,
                      const std::vector<std::string>& labels,
                      const std::string& column_prefix,
                      const Eigen::MatrixXd& scores);

}  // namespace embedkit
