#include "report.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "embedkit/digest.hpp"
#include "embedkit/errors.hpp"

namespace embedkit::cli {

namespace {

std::string utc_now_iso8601() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ReportBuilder::ReportBuilder(std::string command, const RunContext& ctx)
    : command_(std::move(command)), ctx_(ctx) {}

void ReportBuilder::set_config(nlohmann::json config) {
  config_ = std::move(config);
}

void ReportBuilder::add_input(const std::string& name, const std::string& path) {
  inputs_[name] = {{"path", path}, {"fnv1a64", fnv1a64_file_hex(path)}};
}

void ReportBuilder::add_output(const std::string& name,
                               const std::string& filename) {
  outputs_[name] = filename;
}

std::string ReportBuilder::write() const {
  nlohmann::json report;
  report["command"] = command_;
  report["seed"] = ctx_.seed;
  report["config"] = config_;
  report["inputs"] = inputs_;
  report["outputs"] = outputs_;
  report["results"] = results_;
  if (!ctx_.deterministic) report["created_at"] = utc_now_iso8601();

  const std::string path = output_path(ctx_, "report.json");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << report.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
  return path;
}

std::string output_path(const RunContext& ctx, const std::string& name) {
  std::filesystem::path dir(ctx.out_dir.empty() ? "." : ctx.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string());
  return (dir / name).string();
}

}  // namespace embedkit::cli
