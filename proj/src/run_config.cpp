#include "aoa/run_config.hpp"

#include <fstream>

#include "aoa/errors.hpp"

namespace aoa {

void to_json(nlohmann::json& j, const RunConfig& c) {
  j = nlohmann::json{
      {"endpoint", c.endpoint},
      {"model", c.model},
      {"api_key_env", c.api_key_env},
      {"parallelism", c.parallelism},
      {"retry_max_attempts", c.retry_max_attempts},
      {"retry_base_delay_ms", c.retry_base_delay_ms},
      {"rate_limit_rps", c.rate_limit_rps},
      {"weights", c.weights},
      {"arena", c.arena},
      {"out_dir", c.out_dir},
      {"seed", c.seed},
      {"templates_dir", c.templates_dir},
      {"run_id", c.run_id},
  };
}

void from_json(const nlohmann::json& j, RunConfig& c) {
  RunConfig defaults;
  c.endpoint = j.value("endpoint", defaults.endpoint);
  c.model = j.value("model", defaults.model);
  c.api_key_env = j.value("api_key_env", defaults.api_key_env);
  c.parallelism = j.value("parallelism", defaults.parallelism);
  c.retry_max_attempts = j.value("retry_max_attempts", defaults.retry_max_attempts);
  c.retry_base_delay_ms = j.value("retry_base_delay_ms", defaults.retry_base_delay_ms);
  c.rate_limit_rps = j.value("rate_limit_rps", defaults.rate_limit_rps);
  if (j.contains("weights")) c.weights = j.at("weights").get<RewardWeights>();
  if (j.contains("arena")) c.arena = j.at("arena").get<arena::ArenaConfig>();
  c.out_dir = j.value("out_dir", defaults.out_dir);
  c.seed = j.value("seed", defaults.seed);
  c.templates_dir = j.value("templates_dir", defaults.templates_dir);
  c.run_id = j.value("run_id", defaults.run_id);
}

std::string config_hash(const RunConfig& config) {
  nlohmann::json j = config;
  std::string dump = j.dump();
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : dump) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw SchemaError("malformed config JSON in " + path.string());
  return j.get<RunConfig>();
}

}  // namespace aoa
