#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "llmcc/controller.hpp"
#include "llmcc/server_model.hpp"
#include "llmcc/trace.hpp"
#include "llmcc/workload_models.hpp"

namespace llmcc {

struct RunSection {
  std::uint64_t seed = 42;
  std::optional<double> cutoff_s;
};

// The single structured config. JSON on disk, sections server / workload /
// models.{predictor,compliance,quality} / controller / run. Every key has a
// default; unknown keys are rejected.
struct RunConfig {
  ServerConfig server;
  WorkloadProfile workload;
  ModelBundle models;
  ControllerConfig controller;
  RunSection run;

  // Everything except the controller thresholds.
  void validate() const;
};

inline constexpr std::string_view kConfigEnvVar = "LLMCC_CONFIG";

// Keys absent from the text keep their defaults. Throws ValidationError.
RunConfig parse_config(std::string_view json_text);
// Full effective config, pretty-printed JSON; parse_config(dump_config(c)) == c.
std::string dump_config(const RunConfig& cfg);

// Throws IoError when the file cannot be read.
RunConfig load_config(const std::filesystem::path& path);

// "server.max_batch=128", "controller.t1_ms=null", "controller.class_policy.coding=normal".
// The value is read as JSON, falling back to a bare string.
void apply_override(RunConfig& cfg, std::string_view assignment);

// Dotted names of every config key, in file order.
std::vector<std::string> config_keys();

// --config if given, else $LLMCC_CONFIG if set, else defaults; then overrides.
RunConfig resolve_config(const std::optional<std::filesystem::path>& explicit_path,
                         const std::vector<std::string>& overrides);

}  // namespace llmcc
