#include "embedkit/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "embedkit/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "packed_binary reader/writer assumes a little-endian host");

namespace embedkit {

namespace {

using nlohmann::json;

std::string row_msg(const std::string& path, std::size_t row,
                    const std::string& what) {
  return path + ": row " + std::to_string(row) + ": " + what;
}

std::ifstream open_input(const std::string& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw IoError("cannot open " + path + " for reading");
  return in;
}

std::ofstream open_output(const std::string& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

void check_plain_field(const std::string& value, const std::string& what,
                       std::size_t row) {
  if (value.find_first_of(",\"\n\r") != std::string::npos) {
    throw ValidationError("row " + std::to_string(row) + ": " + what + " \"" +
                          value + "\" contains a character csv cannot carry");
  }
}

double parse_value(const std::string& field, const std::string& path,
                   std::size_t row) {
  std::size_t consumed = 0;
  double v = 0;
  try {
    v = std::stod(field, &consumed);
  } catch (const std::exception&) {
    throw ValidationError(row_msg(path, row, "malformed number \"" + field + "\""));
  }
  if (consumed != field.size()) {
    throw ValidationError(row_msg(path, row, "malformed number \"" + field + "\""));
  }
  if (!std::isfinite(v)) {
    throw ValidationError(row_msg(path, row, "non-finite value"));
  }
  return v;
}

LoadedEmbeddings assemble(std::vector<Sample> samples, std::size_t dims,
                          std::vector<double> values) {
  std::vector<std::string> ids;
  ids.reserve(samples.size());
  for (const Sample& s : samples) ids.push_back(s.id);
  return {EmbeddingMatrix(std::move(ids), dims, std::move(values)),
          LabeledDataset(std::move(samples))};
}

LoadedEmbeddings load_jsonl(const std::string& path) {
  std::ifstream in = open_input(path, false);
  std::vector<Sample> samples;
  std::vector<double> values;
  std::size_t dims = 0;
  std::size_t row = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw ValidationError(row_msg(path, row, std::string("malformed record: ") + e.what()));
    }
    if (!rec.is_object() || !rec.contains("id") || !rec.contains("vector") ||
        !rec["id"].is_string() || !rec["vector"].is_array()) {
      throw ValidationError(row_msg(path, row, "malformed record: expected {id, label, vector}"));
    }
    Sample s;
    s.id = rec["id"].get<std::string>();
    s.label = rec.value("label", std::string());
    const json& vec = rec["vector"];
    if (row == 0) {
      dims = vec.size();
      if (dims == 0) throw ValidationError(row_msg(path, row, "empty vector"));
    } else if (vec.size() != dims) {
      throw ValidationError(row_msg(path, row, "dimension mismatch: expected " +
                                                   std::to_string(dims) + " values, got " +
                                                   std::to_string(vec.size())));
    }
    for (const json& v : vec) {
      if (!v.is_number()) {
        throw ValidationError(row_msg(path, row, "malformed record: vector entry is not a number"));
      }
      const double x = v.get<double>();
      if (!std::isfinite(x)) {
        throw ValidationError(row_msg(path, row, "non-finite value"));
      }
      values.push_back(x);
    }
    samples.push_back(std::move(s));
    ++row;
  }
  if (samples.empty()) throw ValidationError(path + ": no records");
  return assemble(std::move(samples), dims, std::move(values));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  if (!fields.empty() && !fields.back().empty() && fields.back().back() == '\r') {
    fields.back().pop_back();
  }
  return fields;
}

LoadedEmbeddings load_csv(const std::string& path) {
  std::ifstream in = open_input(path, false);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "id" || header[1] != "label") {
    throw ValidationError(path + ": header must be id,label,v0,...");
  }
  const std::size_t dims = header.size() - 2;
  std::vector<Sample> samples;
  std::vector<double> values;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != dims + 2) {
      throw ValidationError(row_msg(path, row, "dimension mismatch: expected " +
                                                   std::to_string(dims) + " values, got " +
                                                   std::to_string(fields.size() - 2)));
    }
    Sample s;
    s.id = fields[0];
    s.label = fields[1];
    for (std::size_t j = 0; j < dims; ++j) {
      values.push_back(parse_value(fields[j + 2], path, row));
    }
    samples.push_back(std::move(s));
    ++row;
  }
  if (samples.empty()) throw ValidationError(path + ": no records");
  return assemble(std::move(samples), dims, std::move(values));
}

constexpr char kMagic[4] = {'E', 'M', 'B', 'X'};
constexpr std::uint32_t kVersion = 1;

std::string manifest_path(const std::string& path) {
  return path + ".manifest.json";
}

LoadedEmbeddings load_packed(const std::string& path) {
  std::ifstream in = open_input(path, true);
  char magic[4] = {};
  std::uint32_t version = 0, n = 0, d = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&n), 4);
  in.read(reinterpret_cast<char*>(&d), 4);
  if (!in || std::string(magic, 4) != std::string(kMagic, 4)) {
    throw ValidationError(path + ": not a packed embedding file (bad magic)");
  }
  if (version != kVersion) {
    throw ValidationError(path + ": unsupported version " + std::to_string(version));
  }
  if (n == 0 || d == 0) throw ValidationError(path + ": empty matrix");
  std::vector<float> raw(static_cast<std::size_t>(n) * d);
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size() * sizeof(float)));
  if (!in) throw ValidationError(path + ": truncated value block");

  json manifest;
  {
    std::ifstream min = open_input(manifest_path(path), false);
    try {
      min >> manifest;
    } catch (const json::exception& e) {
      throw ValidationError(manifest_path(path) + ": malformed manifest: " + e.what());
    }
  }
  if (!manifest.contains("ids") || !manifest["ids"].is_array() ||
      manifest["ids"].size() != n) {
    throw ValidationError(manifest_path(path) + ": manifest ids do not match " +
                          std::to_string(n) + " rows");
  }
  std::vector<std::string> labels(n);
  if (manifest.contains("labels")) {
    if (!manifest["labels"].is_array() || manifest["labels"].size() != n) {
      throw ValidationError(manifest_path(path) + ": manifest labels do not match rows");
    }
    for (std::size_t i = 0; i < n; ++i) labels[i] = manifest["labels"][i].get<std::string>();
  }
  std::vector<Sample> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    samples[i].id = manifest["ids"][i].get<std::string>();
    samples[i].label = labels[i];
  }
  std::vector<double> values(raw.begin(), raw.end());
  return assemble(std::move(samples), d, std::move(values));
}

void save_jsonl(const EmbeddingMatrix& m, const LabeledDataset& d,
                const std::string& path) {
  std::ofstream out = open_output(path, false);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << "{\"id\":" << json(d.samples()[i].id).dump()
        << ",\"label\":" << json(d.samples()[i].label).dump() << ",\"vector\":[";
    for (std::size_t j = 0; j < m.dims(); ++j) {
      if (j) out << ',';
      out << format_g9(m.values()[i * m.dims() + j]);
    }
    out << "]}\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

void save_csv(const EmbeddingMatrix& m, const LabeledDataset& d,
              const std::string& path) {
  std::ofstream out = open_output(path, false);
  out << "id,label";
  for (std::size_t j = 0; j < m.dims(); ++j) out << ",v" << j;
  out << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    check_plain_field(d.samples()[i].id, "id", i);
    check_plain_field(d.samples()[i].label, "label", i);
    out << d.samples()[i].id << ',' << d.samples()[i].label;
    for (std::size_t j = 0; j < m.dims(); ++j) {
      out << ',' << format_g9(m.values()[i * m.dims() + j]);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

void save_packed(const EmbeddingMatrix& m, const LabeledDataset& d,
                 const std::string& path) {
  std::ofstream out = open_output(path, true);
  const std::uint32_t n = static_cast<std::uint32_t>(m.rows());
  const std::uint32_t dims = static_cast<std::uint32_t>(m.dims());
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&kVersion), 4);
  out.write(reinterpret_cast<const char*>(&n), 4);
  out.write(reinterpret_cast<const char*>(&dims), 4);
  std::vector<float> raw(m.values().begin(), m.values().end());
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size() * sizeof(float)));
  if (!out) throw IoError("write failed: " + path);

  json manifest;
  manifest["ids"] = d.ids();
  manifest["labels"] = d.labels();
  std::ofstream mout = open_output(manifest_path(path), false);
  mout << manifest.dump(2) << '\n';
  if (!mout) throw IoError("write failed: " + manifest_path(path));
}

}  // namespace

std::optional<Format> parse_format(const std::string& name) {
  if (name == "jsonl") return Format::jsonl;
  if (name == "csv") return Format::csv;
  if (name == "packed_binary" || name == "embx") return Format::packed_binary;
  return std::nullopt;
}

Format format_from_path(const std::string& path) {
  const std::size_t dot = path.find_last_of('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  if (ext == "jsonl") return Format::jsonl;
  if (ext == "csv") return Format::csv;
  if (ext == "embx" || ext == "bin") return Format::packed_binary;
  throw ValidationError("cannot infer embedding format from \"" + path +
                        "\"; pass --format");
}

std::string format_name(Format f) {
  switch (f) {
    case Format::jsonl: return "jsonl";
    case Format::csv: return "csv";
    case Format::packed_binary: return "packed_binary";
  }
  return "unknown";
}

LoadedEmbeddings load_embeddings(const std::string& path, Format format) {
  switch (format) {
    case Format::jsonl: return load_jsonl(path);
    case Format::csv: return load_csv(path);
    case Format::packed_binary: return load_packed(path);
  }
  throw ValidationError("unknown format");
}

void save_embeddings(const EmbeddingMatrix& m, const LabeledDataset& d,
                     const std::string& path, Format format) {
  check_aligned(d, m);
  switch (format) {
    case Format::jsonl: return save_jsonl(m, d, path);
    case Format::csv: return save_csv(m, d, path);
    case Format::packed_binary: return save_packed(m, d, path);
  }
  throw ValidationError("unknown format");
}

LabeledDataset load_texts_jsonl(const std::string& path) {
  std::ifstream in = open_input(path, false);
  std::vector<Sample> samples;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw ValidationError(row_msg(path, row, std::string("malformed record: ") + e.what()));
    }
    if (!rec.is_object() || !rec.contains("id") || !rec.contains("text") ||
        !rec["id"].is_string() || !rec["text"].is_string()) {
      throw ValidationError(row_msg(path, row, "malformed record: expected {id, label, text}"));
    }
    Sample s;
    s.id = rec["id"].get<std::string>();
    s.label = rec.value("label", std::string());
    s.text = rec["text"].get<std::string>();
    samples.push_back(std::move(s));
    ++row;
  }
  if (samples.empty()) throw ValidationError(path + ": no records");
  return LabeledDataset(std::move(samples));
}

std::string format_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void write_scores_csv(const std::string& path,
                      const std::vector<std::string>& ids,
                      const std::vector<std::string>& labels,
                      const std::string& column_prefix,
                      const Eigen::MatrixXd& scores) {
  if (ids.size() != static_cast<std::size_t>(scores.rows()) ||
      labels.size() != ids.size()) {
    throw ValidationError("score csv: ids/labels/rows disagree");
  }
  std::ofstream out = open_output(path, false);
  out << "id,label";
  for (Eigen::Index j = 0; j < scores.cols(); ++j) {
    out << ',' << column_prefix << (j + 1);
  }
  out << '\n';
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    out << ids[static_cast<std::size_t>(i)] << ','
        << labels[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      out << ',' << format_g9(scores(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace embedkit
