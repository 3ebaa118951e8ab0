#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>

namespace embedkit::cli {

// Common per-command context: output directory, seed, timestamp suppression.
struct RunContext {
  std::string out_dir;
  std::uint64_t seed = 0;
  bool deterministic = false;
};

// Accumulates one report.json: config echo, seed, input digests, output file
// names and module results. Reports carry enough provenance to re-run the
// exact computation.
class ReportBuilder {
 public:
  ReportBuilder(std::string command, const RunContext& ctx);

  void set_config(nlohmann::json config);
  void add_input(const std::string& name, const std::string& path);
  void add_output(const std::string& name, const std::string& filename);
  nlohmann::json& results() { return results_; }

  // Writes <out_dir>/report.json and returns its path.
  std::string write() const;

 private:
  std::string command_;
  RunContext ctx_;
  nlohmann::json config_ = nlohmann::json::object();
  nlohmann::json inputs_ = nlohmann::json::object();
  nlohmann::json outputs_ = nlohmann::json::object();
  nlohmann::json results_ = nlohmann::json::object();
};

// Creates the directory if needed and returns out_dir + "/" + name.
std::string output_path(const RunContext& ctx, const std::string& name);

}  // namespace embedkit::cli
