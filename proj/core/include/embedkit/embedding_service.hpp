#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "embedkit/dataset.hpp"

namespace embedkit {

enum class Pooling { service_pooled, mean_pool_then_normalize };

std::optional<Pooling> parse_pooling(const std::string& name);
std::string pooling_name(Pooling p);

// Remote embedding endpoint. The toolkit never runs a model itself; vectors
// come from files or from POST {base_url}/embed with body {"texts": [...]}
// answered by {"embeddings": [...]}. With mean_pool_then_normalize the
// service is expected to return per-token hidden states (one m x D array per
// text) which are pooled client-side.
struct EmbeddingServiceConfig {
  std::string base_url;
  std::string auth_token_env;  // env var holding the bearer token; empty = no auth
  int batch_size = 16;
  double timeout_seconds = 30.0;
  Pooling pooling = Pooling::service_pooled;
  int max_attempts = 3;                   // per request
  double initial_backoff_seconds = 0.25;  // doubles after each failed attempt

  void validate() const;
};

// Column mean over token states followed by L2 normalization. Throws on a
// zero pooled vector.
Eigen::VectorXd pool_and_normalize(const Eigen::MatrixXd& token_states);

// One row per input text, in input order. `ids` defaults to "0", "1", ...
EmbeddingMatrix fetch_embeddings(const EmbeddingServiceConfig& cfg,
                                 const std::vector<std::string>& texts,
                                 std::vector<std::string> ids = {});

}  // namespace embedkit
