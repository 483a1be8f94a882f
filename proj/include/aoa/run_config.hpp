#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"

#include "aoa/arena.hpp"
#include "aoa/reward.hpp"

namespace aoa {

/// Effective configuration of one harness run. The whole struct is embedded in
/// each results file's header record so every artifact is reproducible from
/// the file alone.
struct RunConfig {
  std::string endpoint;
  std::string model = "scripted";
  std::string api_key_env = "LLM_API_KEY";
  int parallelism = 1;
  int retry_max_attempts = 3;
  int retry_base_delay_ms = 200;
  double rate_limit_rps = 0.0;  // 0 = unlimited
  RewardWeights weights;
  arena::ArenaConfig arena;
  std::string out_dir = ".";
  unsigned long seed = 0;
  std::string templates_dir;
  std::string run_id;

  bool operator==(const RunConfig&) const = default;
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

/// FNV-1a over the canonical JSON dump, as a hex string.
std::string config_hash(const RunConfig& config);

RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace aoa
