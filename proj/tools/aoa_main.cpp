#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "aoa/arena.hpp"
#include "aoa/datagen.hpp"
#include "aoa/jsonl.hpp"
#include "aoa/labeler.hpp"
#include "aoa/llm_client.hpp"
#include "aoa/probe.hpp"
#include "aoa/prompts.hpp"
#include "aoa/report.hpp"
#include "aoa/reward.hpp"
#include "aoa/run_config.hpp"
#include "aoa/tas.hpp"
#include "aoa/time_utils.hpp"
#include "aoa/trace_model.hpp"

namespace {

using namespace aoa;

struct CommonOptions {
  std::string config_path;
  std::string endpoint;
  std::string model = "scripted";
  std::string api_key_env = "LLM_API_KEY";
  std::string scripted_path;
  std::string templates_dir;
  std::string run_id;
  int parallelism = 1;
  int retry_max_attempts = 3;
  int retry_base_delay_ms = 200;
  double rate_limit_rps = 0.0;
  unsigned long seed = 0;
};

void add_common(CLI::App* cmd, CommonOptions& common) {
  cmd->add_option("--config", common.config_path, "JSON run-config file; flags override it");
  cmd->add_option("--endpoint", common.endpoint, "chat-completions base URL");
  cmd->add_option("--model", common.model, "model name sent on the wire");
  cmd->add_option("--api-key-env", common.api_key_env, "environment variable holding the API key");
  cmd->add_option("--scripted", common.scripted_path,
                  "scripted-behavior JSON file; replaces the network backend");
  cmd->add_option("--templates", common.templates_dir, "prompt template directory");
  cmd->add_option("--run-id", common.run_id, "run identifier embedded in results");
  cmd->add_option("--parallel", common.parallelism, "max traces in flight");
  cmd->add_option("--retries", common.retry_max_attempts, "attempts per request");
  cmd->add_option("--rate-limit", common.rate_limit_rps, "requests per second (0 = unlimited)");
  cmd->add_option("--seed", common.seed, "random seed");
}

RunConfig effective_config(const CommonOptions& common) {
  RunConfig config;
  if (!common.config_path.empty()) config = load_run_config(common.config_path);
  if (!common.endpoint.empty()) config.endpoint = common.endpoint;
  if (common.model != "scripted" || config.model.empty()) config.model = common.model;
  config.api_key_env = common.api_key_env;
  config.parallelism = common.parallelism;
  config.retry_max_attempts = common.retry_max_attempts;
  config.retry_base_delay_ms = common.retry_base_delay_ms;
  config.rate_limit_rps = common.rate_limit_rps;
  config.seed = common.seed;
  if (!common.templates_dir.empty()) config.templates_dir = common.templates_dir;
  config.run_id = common.run_id.empty()
                      ? "run-" + std::to_string(std::chrono::duration_cast<std::chrono::seconds>(
                                                    std::chrono::system_clock::now()
                                                        .time_since_epoch())
                                                    .count())
                      : common.run_id;
  return config;
}

llm::ChatClient make_client(const CommonOptions& common, const RunConfig& config) {
  llm::RetryPolicy retry;
  retry.max_attempts = config.retry_max_attempts;
  retry.base_delay = std::chrono::milliseconds(config.retry_base_delay_ms);
  retry.jitter_seed = static_cast<unsigned>(config.seed);

  std::shared_ptr<llm::RateLimiter> limiter;
  if (config.rate_limit_rps > 0) {
    limiter = std::make_shared<llm::RateLimiter>(config.rate_limit_rps, config.rate_limit_rps);
  }

  if (!common.scripted_path.empty()) {
    retry.base_delay = std::chrono::milliseconds(0);
    retry.sleeper = [](std::chrono::milliseconds) {};
    auto behavior = llm::ScriptedBehavior::from_file(common.scripted_path);
    return llm::ChatClient(std::make_shared<llm::ScriptedBackend>(std::move(behavior)),
                           std::move(retry), limiter);
  }
  if (config.endpoint.empty()) {
    throw UsageError("either --endpoint or --scripted is required for this command");
  }
  const char* key = std::getenv(config.api_key_env.c_str());
  return llm::ChatClient(std::make_shared<llm::HttpBackend>(config.endpoint, key ? key : ""),
                         std::move(retry), limiter);
}

class ResultsWriter {
 public:
  ResultsWriter(const std::filesystem::path& path, const RunConfig& config)
      : store_((std::filesystem::remove(path), path)) {
    store_.append(make_envelope(kRunConfigKind, nlohmann::json(config), config.run_id,
                                utc_now_iso8601()));
    run_id_ = config.run_id;
  }

  template <typename Payload>
  void write(std::string_view kind, const Payload& payload) {
    store_.append(make_envelope(kind, nlohmann::json(payload), run_id_, utc_now_iso8601()));
  }

 private:
  ResultStore store_;
  std::string run_id_;
};

std::vector<LabeledCase> load_labeled_cases(const std::filesystem::path& path) {
  std::vector<LabeledCase> cases;
  for (const auto& j : read_jsonl(path)) cases.push_back(j.get<LabeledCase>());
  return cases;
}

int run_probe(const CommonOptions& common, const std::string& traces_path,
              const std::string& mode_name, const std::string& out_path) {
  RunConfig config = effective_config(common);
  auto mode = probe_mode_from_string(mode_name);
  if (!mode) throw UsageError("unknown probe mode '" + mode_name + "'");

  TraceLoadReport report = load_traces(traces_path);
  for (const auto& reject : report.rejects) {
    std::cerr << "reject line " << reject.line << ": " << reject.reason << "\n";
  }
  if (report.traces.empty()) throw UsageError("no valid traces in " + traces_path);

  ProbeOptions options;
  options.model = config.model;
  options.mode = *mode;
  options.seed = static_cast<long>(config.seed);
  if (*mode != ProbeMode::ForcedChoice) {
    PromptLibrary prompts = PromptLibrary::load_default(config.templates_dir);
    if (*mode == ProbeMode::DualView) {
      options.actor_system_override = prompts.text("dual_view_actor");
      options.observer_system_override = prompts.text("dual_view_observer");
    } else {
      options.tas_instruction = prompts.text("tas_probe_instruction");
    }
  }

  llm::ChatClient client = make_client(common, config);
  std::vector<PairedOutcome> outcomes =
      run_probe_corpus(report.traces, client, options, config.parallelism);

  ResultsWriter writer(out_path, config);
  for (const auto& outcome : outcomes) writer.write(kPairedOutcomeKind, outcome);

  MetricsSummary summary = aggregate_metrics(outcomes);
  std::cout << report::probe_markdown_table(summary);
  std::cout << "wrote " << outcomes.size() << " outcomes to " << out_path << "\n";
  return 0;
}

int run_label(const std::string& cases_path, const std::string& out_path) {
  std::vector<nlohmann::json> lines;
  std::vector<LabeledCase> labeled_cases;
  for (const auto& j : read_jsonl(cases_path)) {
    CaseRecord record = j.get<CaseRecord>();
    labeled_cases.push_back(assign_label(record));
    lines.emplace_back(labeled_cases.back());
  }
  LabelCounts counts = count_labels(labeled_cases);
  write_jsonl(out_path, lines);
  std::cout << "labeled " << counts.total() << " cases: " << counts.n_false_ext << " FalseExt, "
            << counts.n_false_int << " FalseInt, " << counts.n_true << " True\n";
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int run_reward_eval(const CommonOptions& common, const std::string& rollouts_path,
                    const std::string& cases_path, const RewardWeights& weights,
                    const std::string& out_path) {
  weights.validate();
  RunConfig config = effective_config(common);
  config.weights = weights;

  std::vector<LabeledCase> cases = load_labeled_cases(cases_path);
  std::unordered_map<std::string, const LabeledCase*> by_id;
  for (const auto& labeled : cases) {
    if (labeled.record.case_id) by_id[*labeled.record.case_id] = &labeled;
  }

  ResultsWriter writer(out_path, config);
  std::size_t index = 0, scored = 0;
  double total = 0;
  for (const auto& j : read_jsonl(rollouts_path)) {
    std::string raw = j.at("raw").get<std::string>();
    const LabeledCase* labeled = nullptr;
    if (j.contains("case_id")) {
      auto it = by_id.find(j.at("case_id").get<std::string>());
      if (it != by_id.end()) labeled = it->second;
    }
    if (!labeled && index < cases.size()) labeled = &cases[index];
    if (!labeled) throw SchemaError("rollout " + std::to_string(index + 1) + " matches no case");
    RewardBreakdown breakdown = composite_reward(raw, labeled->label, labeled->record, weights);
    writer.write(kRewardBreakdownKind, breakdown);
    total += breakdown.total;
    ++scored;
    ++index;
  }
  std::cout << "scored " << scored << " rollouts, mean total "
            << (scored ? total / static_cast<double>(scored) : 0.0) << "\n";
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int run_datagen_scenarios(const CommonOptions& common, const std::string& domains_arg,
                          int per_domain, const std::string& pairing_arg,
                          const std::string& out_path) {
  RunConfig config = effective_config(common);
  PromptLibrary prompts = PromptLibrary::load_default(config.templates_dir);

  std::vector<Domain> domains;
  if (domains_arg == "all") {
    domains.assign(kAllDomains.begin(), kAllDomains.end());
  } else {
    std::string rest = domains_arg;
    while (!rest.empty()) {
      std::size_t comma = rest.find(',');
      std::string name = rest.substr(0, comma);
      auto domain = domain_from_string(name);
      if (!domain) throw UsageError("unknown domain '" + name + "'");
      domains.push_back(*domain);
      rest = comma == std::string::npos ? std::string{} : rest.substr(comma + 1);
    }
  }

  std::vector<Pairing> pairings;
  if (pairing_arg == "both") {
    pairings = {Pairing::HumanAgent, Pairing::AgentAgent};
  } else if (pairing_arg == "human-agent" || pairing_arg == "Human-Agent") {
    pairings = {Pairing::HumanAgent};
  } else if (pairing_arg == "agent-agent" || pairing_arg == "Agent-Agent") {
    pairings = {Pairing::AgentAgent};
  } else {
    throw UsageError("unknown pairing '" + pairing_arg + "'");
  }

  llm::ChatClient client = make_client(common, config);
  datagen::DatagenOptions options;
  options.teacher_model = config.model;
  std::vector<std::string> reject_log;
  std::vector<datagen::ScenarioRecord> records = datagen::generate_scenarios(
      domains, per_domain, pairings, client, prompts, options, &reject_log);

  std::vector<nlohmann::json> lines;
  lines.reserve(records.size());
  for (const auto& record : records) lines.emplace_back(record);
  write_jsonl(out_path, lines);
  std::cout << "generated " << records.size() << " scenarios (" << reject_log.size()
            << " rejected attempts) -> " << out_path << "\n";
  return 0;
}

int run_datagen_tas(const CommonOptions& common, const std::string& cases_path,
                    const std::string& out_path) {
  RunConfig config = effective_config(common);
  PromptLibrary prompts = PromptLibrary::load_default(config.templates_dir);
  llm::ChatClient client = make_client(common, config);
  datagen::DatagenOptions options;
  options.teacher_model = config.model;

  std::vector<datagen::TasPair> pairs;
  std::size_t index = 0;
  for (auto& labeled : load_labeled_cases(cases_path)) {
    ++index;
    if (!labeled.record.case_id) labeled.record.case_id = "case-" + std::to_string(index);
    pairs.push_back(datagen::synthesize_tas_pair(labeled, client, prompts, options));
  }

  datagen::FilterResult filtered = datagen::convergence_filter(pairs);
  std::vector<nlohmann::json> kept_lines;
  for (const auto& pair : filtered.kept) kept_lines.emplace_back(pair);
  write_jsonl(out_path, kept_lines);

  std::filesystem::path dropped_path = std::filesystem::path(out_path);
  dropped_path += ".dropped.jsonl";
  std::vector<nlohmann::json> dropped_lines;
  for (const auto& dropped : filtered.dropped) {
    nlohmann::json line = dropped.pair;
    line["drop_reason"] = datagen::to_string(dropped.reason);
    dropped_lines.push_back(std::move(line));
  }
  write_jsonl(dropped_path, dropped_lines);

  std::cout << "kept " << filtered.kept.size() << " pairs, dropped " << filtered.dropped.size()
            << " -> " << out_path << "\n";
  return 0;
}

int run_arena(const CommonOptions& common, const arena::ArenaConfig& base_config,
              const std::string& reflection_name, int sessions, const std::string& seller_kind,
              const std::string& buyer_kind, const std::string& out_path,
              const std::string& transcripts_dir) {
  arena::ArenaConfig arena_config = base_config;
  auto reflection = arena::reflection_mode_from_string(reflection_name);
  if (!reflection) throw UsageError("unknown reflection mode '" + reflection_name + "'");
  arena_config.reflection = *reflection;
  arena_config.validate();

  RunConfig config = effective_config(common);
  config.arena = arena_config;

  bool needs_client = seller_kind == "llm" || buyer_kind == "llm" ||
                      arena_config.reflection != arena::ReflectionMode::None;
  std::optional<llm::ChatClient> client;
  std::optional<PromptLibrary> prompts;
  if (needs_client) {
    client.emplace(make_client(common, config));
    prompts.emplace(PromptLibrary::load_default(config.templates_dir));
  }

  ResultsWriter writer(out_path, config);
  std::vector<arena::NegotiationSession> all_sessions;
  for (int i = 0; i < sessions; ++i) {
    std::unique_ptr<arena::SellerAgent> seller;
    if (seller_kind == "scripted") {
      seller = std::make_unique<arena::RandomSeller>(config.seed + static_cast<unsigned long>(i));
    } else if (seller_kind == "policy") {
      seller = std::make_unique<arena::PolicySeller>();
    } else if (seller_kind == "llm") {
      seller = std::make_unique<arena::LlmSeller>(*client, *prompts, config.model);
    } else {
      throw UsageError("unknown seller kind '" + seller_kind + "'");
    }

    std::unique_ptr<arena::BuyerAgent> buyer;
    if (buyer_kind == "scripted") {
      buyer = std::make_unique<arena::ScriptedBuyer>();
    } else if (buyer_kind == "llm") {
      buyer = std::make_unique<arena::LlmBuyer>(*client, *prompts, config.model);
    } else {
      throw UsageError("unknown buyer kind '" + buyer_kind + "'");
    }

    arena::NegotiationSession session =
        arena::run_session(arena_config, *seller, *buyer, client ? &*client : nullptr,
                           prompts ? &*prompts : nullptr, config.model);
    writer.write(kNegotiationSessionKind, session);
    if (!transcripts_dir.empty()) {
      std::filesystem::create_directories(transcripts_dir);
      std::filesystem::path log_path =
          std::filesystem::path(transcripts_dir) / ("session-" + std::to_string(i + 1) + ".log");
      std::ofstream log(log_path, std::ios::trunc);
      if (!log) throw IoError("cannot write " + log_path.string());
      log << arena::transcript(session);
    }
    all_sessions.push_back(std::move(session));
  }

  std::cout << report::arena_markdown_table(arena::arena_metrics(all_sessions));
  std::cout << "wrote " << sessions << " sessions to " << out_path << "\n";
  return 0;
}

int run_report(const std::string& in_path, const std::string& format_name,
               const std::string& out_dir) {
  auto format = report::format_from_string(format_name);
  if (!format) throw UsageError("unknown report format '" + format_name + "'");
  report::ReportArtifacts artifacts = report::render_report(in_path, *format, out_dir);
  for (const auto& file : artifacts.files) {
    std::cout << "wrote " << file.string() << "\n";
    if (*format == report::Format::Table) {
      std::ifstream in(file);
      std::cout << in.rdbuf() << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Paired actor/observer attribution probe harness"};
  app.require_subcommand(1);

  std::function<int()> action;

  CommonOptions common;

  auto* probe_cmd =
      app.add_subcommand("probe", "run paired attribution probes over a trace corpus");
  std::string probe_traces, probe_mode = "forced-choice", probe_out = "results.jsonl";
  probe_cmd->add_option("--traces", probe_traces, "traces.jsonl corpus")->required();
  probe_cmd->add_option("--mode", probe_mode, "forced-choice | dual-view | tas");
  probe_cmd->add_option("--out", probe_out, "results file");
  add_common(probe_cmd, common);
  probe_cmd->callback([&] {
    action = [&] { return run_probe(common, probe_traces, probe_mode, probe_out); };
  });

  auto* label_cmd =
      app.add_subcommand("label", "assign failure-attribution labels to case records");
  std::string label_cases, label_out = "labeled_cases.jsonl";
  label_cmd->add_option("--cases", label_cases, "cases.jsonl input")->required();
  label_cmd->add_option("--out", label_out, "labeled output file");
  label_cmd->callback([&] { action = [&] { return run_label(label_cases, label_out); }; });

  auto* reward_cmd = app.add_subcommand("reward-eval", "score rollouts with the composite reward");
  std::string reward_rollouts, reward_cases, reward_out = "breakdowns.jsonl";
  RewardWeights weights;
  reward_cmd->add_option("--rollouts", reward_rollouts, "rollouts.jsonl input")->required();
  reward_cmd->add_option("--cases", reward_cases, "labeled_cases.jsonl input")->required();
  reward_cmd->add_option("--alpha", weights.alpha, "format-reward weight");
  reward_cmd->add_option("--beta", weights.beta, "attribution-reward weight");
  reward_cmd->add_option("--gamma", weights.gamma, "answer-reward weight");
  reward_cmd->add_option("--out", reward_out, "breakdown output file");
  add_common(reward_cmd, common);
  reward_cmd->callback([&] {
    action = [&] {
      return run_reward_eval(common, reward_rollouts, reward_cases, weights, reward_out);
    };
  });

  auto* datagen_cmd = app.add_subcommand("datagen", "teacher-driven data synthesis");
  datagen_cmd->require_subcommand(1);
  auto* scenarios_cmd =
      datagen_cmd->add_subcommand("scenarios", "synthesize ambiguous-failure scenarios");
  std::string dg_domains = "all", dg_pairing = "both", dg_out = "scenarios.jsonl";
  int dg_per_domain = 10;
  scenarios_cmd->add_option("--domains", dg_domains, "comma-separated domain names or 'all'");
  scenarios_cmd->add_option("--per-domain", dg_per_domain, "scenarios per domain per pairing");
  scenarios_cmd->add_option("--pairing", dg_pairing, "human-agent | agent-agent | both");
  scenarios_cmd->add_option("--out", dg_out, "scenario output file");
  add_common(scenarios_cmd, common);
  scenarios_cmd->callback([&] {
    action = [&] {
      return run_datagen_scenarios(common, dg_domains, dg_per_domain, dg_pairing, dg_out);
    };
  });

  auto* tas_cmd = datagen_cmd->add_subcommand("tas", "synthesize dual-role dialectical pairs");
  std::string tas_cases, tas_out = "tas_pairs.jsonl";
  tas_cmd->add_option("--cases", tas_cases, "labeled_cases.jsonl input")->required();
  tas_cmd->add_option("--out", tas_out, "pair output file");
  add_common(tas_cmd, common);
  tas_cmd->callback([&] { action = [&] { return run_datagen_tas(common, tas_cases, tas_out); }; });

  auto* arena_cmd = app.add_subcommand("arena", "run the multi-item negotiation benchmark");
  arena::ArenaConfig arena_config;
  std::string arena_reflection = "none", arena_seller = "policy", arena_buyer = "scripted";
  std::string arena_out = "arena.jsonl", arena_transcripts;
  int arena_sessions = 1;
  arena_cmd->add_option("--reflection", arena_reflection, "none | solo | dual | tas");
  arena_cmd->add_option("--sessions", arena_sessions, "number of sessions");
  arena_cmd->add_option("--seller", arena_seller, "scripted | policy | llm");
  arena_cmd->add_option("--buyer", arena_buyer, "scripted | llm");
  arena_cmd->add_option("--items", arena_config.n_items, "items per session");
  arena_cmd->add_option("--budget", arena_config.buyer_budget, "buyer budget");
  arena_cmd->add_option("--unit-cost", arena_config.unit_cost, "seller unit cost");
  arena_cmd->add_option("--target", arena_config.seller_target, "seller target price");
  arena_cmd->add_option("--accept-below", arena_config.accept_below, "instant-accept threshold");
  arena_cmd->add_option("--reject-above", arena_config.reject_above, "instant-reject threshold");
  arena_cmd->add_option("--max-turns", arena_config.max_turns_per_item, "exchanges per item");
  arena_cmd->add_option("--step", arena_config.concession_step, "scripted-buyer concession step");
  arena_cmd->add_option("--out", arena_out, "session output file");
  arena_cmd->add_option("--transcripts", arena_transcripts, "directory for readable session logs");
  add_common(arena_cmd, common);
  arena_cmd->callback([&] {
    action = [&] {
      return run_arena(common, arena_config, arena_reflection, arena_sessions, arena_seller,
                       arena_buyer, arena_out, arena_transcripts);
    };
  });

  auto* report_cmd = app.add_subcommand("report", "render tables/CSV/plots from a results file");
  std::string report_in, report_format = "table", report_out = "report";
  report_cmd->add_option("--in", report_in, "results.jsonl input")->required();
  report_cmd->add_option("--format", report_format, "table | csv | plot");
  report_cmd->add_option("--out", report_out, "artifact directory");
  report_cmd->callback([&] {
    action = [&] { return run_report(report_in, report_format, report_out); };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    return action ? action() : 1;
  } catch (const llm::ClientError& e) {
    std::cerr << "transport failure: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
