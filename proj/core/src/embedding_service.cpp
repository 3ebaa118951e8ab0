#include "embedkit/embedding_service.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <thread>

#include "embedkit/errors.hpp"
#include "httplib.h"

namespace embedkit {

namespace {

using nlohmann::json;

struct ParsedUrl {
  std::string origin;       // scheme://host[:port]
  std::string path_prefix;  // possibly empty, no trailing slash
};

ParsedUrl parse_base_url(const std::string& url) {
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ValidationError("service url must start with http:// or https://: " + url);
  }
  const std::size_t path_start = url.find('/', scheme_end + 3);
  ParsedUrl out;
  if (path_start == std::string::npos) {
    out.origin = url;
  } else {
    out.origin = url.substr(0, path_start);
    out.path_prefix = url.substr(path_start);
    while (!out.path_prefix.empty() && out.path_prefix.back() == '/') {
      out.path_prefix.pop_back();
    }
  }
  return out;
}

double get_number(const json& v, std::size_t row) {
  if (!v.is_number()) {
    throw ValidationError("embedding service: row " + std::to_string(row) +
                          ": vector entry is not a number");
  }
  const double x = v.get<double>();
  if (!std::isfinite(x)) {
    throw ValidationError("embedding service: row " + std::to_string(row) +
                          ": non-finite value in response");
  }
  return x;
}

}  // namespace

std::optional<Pooling> parse_pooling(const std::string& name) {
  if (name == "service_pooled") return Pooling::service_pooled;
  if (name == "mean_pool_then_normalize") return Pooling::mean_pool_then_normalize;
  return std::nullopt;
}

std::string pooling_name(Pooling p) {
  return p == Pooling::service_pooled ? "service_pooled"
                                      : "mean_pool_then_normalize";
}

void EmbeddingServiceConfig::validate() const {
  if (base_url.empty()) throw ValidationError("service base_url is empty");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(timeout_seconds > 0)) throw ValidationError("timeout must be positive");
  if (max_attempts < 1) throw ValidationError("max_attempts must be >= 1");
}

Eigen::VectorXd pool_and_normalize(const Eigen::MatrixXd& token_states) {
  if (token_states.rows() < 1 || token_states.cols() < 1) {
    throw ValidationError("pool_and_normalize: empty token states");
  }
  if (!token_states.allFinite()) {
    throw ValidationError("pool_and_normalize: non-finite token state");
  }
  Eigen::VectorXd pooled = token_states.colwise().mean();
  const double norm = pooled.norm();
  if (norm == 0.0) {
    throw ValidationError("pool_and_normalize: pooled vector is zero, cannot normalize");
  }
  return pooled / norm;
}

EmbeddingMatrix fetch_embeddings(const EmbeddingServiceConfig& cfg,
                                 const std::vector<std::string>& texts,
                                 std::vector<std::string> ids) {
  cfg.validate();
  if (texts.empty()) throw ValidationError("fetch_embeddings: no texts");
  if (ids.empty()) {
    ids.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) ids.push_back(std::to_string(i));
  } else if (ids.size() != texts.size()) {
    throw ValidationError("fetch_embeddings: ids/texts size mismatch");
  }

  // Resolve the bearer token before any network traffic so a missing env var
  // fails fast.
  std::string token;
  if (!cfg.auth_token_env.empty()) {
    const char* env = std::getenv(cfg.auth_token_env.c_str());
    if (env == nullptr || *env == '\0') {
      throw ValidationError("environment variable " + cfg.auth_token_env +
                            " (service auth token) is not set");
    }
    token = env;
  }

  const ParsedUrl url = parse_base_url(cfg.base_url);
  httplib::Client client(url.origin);
  const auto timeout_us = std::chrono::microseconds(
      static_cast<long long>(cfg.timeout_seconds * 1e6));
  client.set_connection_timeout(timeout_us);
  client.set_read_timeout(timeout_us);
  client.set_write_timeout(timeout_us);
  httplib::Headers headers;
  if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);

  std::vector<double> values;
  std::size_t dims = 0;
  std::size_t row = 0;

  for (std::size_t start = 0; start < texts.size();
       start += static_cast<std::size_t>(cfg.batch_size)) {
    const std::size_t count =
        std::min<std::size_t>(cfg.batch_size, texts.size() - start);
    json body;
    body["texts"] = json::array();
    for (std::size_t i = 0; i < count; ++i) body["texts"].push_back(texts[start + i]);
    const std::string payload = body.dump();

    httplib::Result res;
    std::string failure;
    double backoff = cfg.initial_backoff_seconds;
    for (int attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
      res = client.Post(url.path_prefix + "/embed", headers, payload, "application/json");
      if (res && res->status == 200) break;
      failure = res ? "status " + std::to_string(res->status)
                    : "transport error (" + httplib::to_string(res.error()) + ")";
      if (attempt == cfg.max_attempts) {
        throw IoError("embedding service request failed after " +
                      std::to_string(cfg.max_attempts) + " attempts: " + failure);
      }
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
      backoff *= 2.0;
    }

    json reply;
    try {
      reply = json::parse(res->body);
    } catch (const json::exception& e) {
      throw ValidationError(std::string("embedding service: malformed response: ") + e.what());
    }
    if (!reply.is_object() || !reply.contains("embeddings") ||
        !reply["embeddings"].is_array()) {
      throw ValidationError("embedding service: response is missing \"embeddings\"");
    }
    const json& rows = reply["embeddings"];
    if (rows.size() != count) {
      throw ValidationError("embedding service: row-count mismatch: requested " +
                            std::to_string(count) + " rows, got " +
                            std::to_string(rows.size()));
    }

    for (const json& entry : rows) {
      Eigen::VectorXd vec;
      if (cfg.pooling == Pooling::mean_pool_then_normalize) {
        if (!entry.is_array() || entry.empty() || !entry[0].is_array()) {
          throw ValidationError("embedding service: row " + std::to_string(row) +
                                ": expected per-token states for mean_pool_then_normalize");
        }
        const std::size_t tokens = entry.size();
        const std::size_t width = entry[0].size();
        Eigen::MatrixXd states(tokens, width);
        for (std::size_t t = 0; t < tokens; ++t) {
          if (!entry[t].is_array() || entry[t].size() != width) {
            throw ValidationError("embedding service: row " + std::to_string(row) +
                                  ": ragged token states");
          }
          for (std::size_t j = 0; j < width; ++j) {
            states(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) =
                get_number(entry[t][j], row);
          }
        }
        vec = pool_and_normalize(states);
      } else {
        if (!entry.is_array() || entry.empty() || entry[0].is_array()) {
          throw ValidationError("embedding service: row " + std::to_string(row) +
                                ": expected a flat vector for service_pooled");
        }
        vec.resize(static_cast<Eigen::Index>(entry.size()));
        for (std::size_t j = 0; j < entry.size(); ++j) {
          vec(static_cast<Eigen::Index>(j)) = get_number(entry[j], row);
        }
      }

      if (row == 0) {
        dims = static_cast<std::size_t>(vec.size());
      } else if (static_cast<std::size_t>(vec.size()) != dims) {
        throw ValidationError("embedding service: row " + std::to_string(row) +
                              ": dimension mismatch: expected " + std::to_string(dims) +
                              ", got " + std::to_string(vec.size()));
      }
      values.insert(values.end(), vec.data(), vec.data() + vec.size());
      ++row;
    }
  }

  return EmbeddingMatrix(std::move(ids), dims, std::move(values));
}

}  // namespace embedkit
