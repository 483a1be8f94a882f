#include "aoa/probe.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <thread>

#include "aoa/labeler.hpp"
#include "aoa/tas.hpp"

namespace aoa {

namespace {

constexpr std::string_view kForcedChoiceInstruction =
    "Decide the primary cause of this outcome. You must make a forced choice between exactly "
    "two attributions: Internal (the agent's own fault) or External (circumstances or the "
    "other party). End your reply with a line of the form \"[Responsibility] Internal\" or "
    "\"[Responsibility] External\".";

constexpr std::string_view kFormatReminder =
    "Your previous reply did not state a clear choice. Reply with exactly one word: "
    "Internal or External.";

constexpr std::string_view kTasFormatReminder =
    "Your previous reply did not follow the required structure. Reply again using the "
    "<thinking><thesis>...</thesis><antithesis>...</antithesis><synthesis>...</synthesis>"
    "</thinking> block followed by the [Attribution] and [Action] lines.";

std::string user_turn(const InteractionTrace& trace, const ProbeOptions& options) {
  std::string content = trace.shared_interaction_history;
  content += "\n\n";
  content += trace.neutral_task_question;
  content += "\n\n";
  if (options.mode == ProbeMode::Tas && !options.tas_instruction.empty()) {
    content += options.tas_instruction;
  } else {
    content += kForcedChoiceInstruction;
  }
  return content;
}

std::optional<ForcedChoice> verdict_from_reply(const std::string& reply, ProbeMode mode) {
  if (mode == ProbeMode::Tas) {
    auto parsed = try_parse_tas(reply);
    if (!parsed) return std::nullopt;
    switch (parsed->trace.attribution) {
      case AttributionLabel::FalseExt: return ForcedChoice::Ext;
      case AttributionLabel::FalseInt: return ForcedChoice::Int;
      case AttributionLabel::True: return std::nullopt;  // no fault claimed; nothing to flip
    }
  }
  return try_parse_forced_choice(reply);
}

struct SideResult {
  std::optional<ForcedChoice> verdict;
  std::string raw;
};

SideResult probe_side(const std::string& system_prompt, const std::string& user_content,
                      llm::ChatClient& client, const ProbeOptions& options) {
  llm::ChatRequest request;
  request.model = options.model;
  request.system_prompt = system_prompt;
  request.messages = {{llm::Role::User, user_content}};
  request.temperature = options.temperature;
  request.max_tokens = options.max_tokens;
  request.seed = options.seed;

  llm::ChatResult first = client.complete(request);
  if (auto verdict = verdict_from_reply(first.text, options.mode)) {
    return {verdict, first.text};
  }

  // One format-reminder retry, then the side goes Invalid.
  llm::ChatRequest reminder = request;
  reminder.messages.push_back({llm::Role::Assistant, first.text});
  reminder.messages.push_back(
      {llm::Role::User, std::string(options.mode == ProbeMode::Tas ? kTasFormatReminder
                                                                   : kFormatReminder)});
  llm::ChatResult second = client.complete(reminder);
  return {verdict_from_reply(second.text, options.mode), second.text};
}

std::vector<std::string> f1_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

}  // namespace

std::string_view to_string(OutcomeCategory category) {
  switch (category) {
    case OutcomeCategory::Internal: return "Internal";
    case OutcomeCategory::External: return "External";
    case OutcomeCategory::VAoa: return "V-AOA";
    case OutcomeCategory::RAoa: return "R-AOA";
    case OutcomeCategory::Invalid: return "Invalid";
  }
  return "Invalid";
}

std::optional<OutcomeCategory> outcome_category_from_string(std::string_view name) {
  if (name == "Internal") return OutcomeCategory::Internal;
  if (name == "External") return OutcomeCategory::External;
  if (name == "V-AOA") return OutcomeCategory::VAoa;
  if (name == "R-AOA") return OutcomeCategory::RAoa;
  if (name == "Invalid") return OutcomeCategory::Invalid;
  return std::nullopt;
}

void to_json(nlohmann::json& j, const PairedOutcome& o) {
  j = nlohmann::json{
      {"trace_id", o.trace_id},
      {"y_act", o.y_act ? std::string(to_string(*o.y_act)) : std::string("Invalid")},
      {"y_obs", o.y_obs ? std::string(to_string(*o.y_obs)) : std::string("Invalid")},
      {"category", to_string(o.category)},
      {"raw_actor", o.raw_actor},
      {"raw_observer", o.raw_observer},
  };
}

void from_json(const nlohmann::json& j, PairedOutcome& o) {
  o.trace_id = j.at("trace_id").get<std::string>();
  auto parse_side = [&](const char* field) -> std::optional<ForcedChoice> {
    std::string value = j.at(field).get<std::string>();
    if (value == "Invalid") return std::nullopt;
    auto choice = forced_choice_from_string(value);
    if (!choice) throw SchemaError(std::string("unknown verdict '") + value + "'");
    return choice;
  };
  o.y_act = parse_side("y_act");
  o.y_obs = parse_side("y_obs");
  std::string category = j.at("category").get<std::string>();
  auto parsed = outcome_category_from_string(category);
  if (!parsed) throw SchemaError("unknown category '" + category + "'");
  o.category = *parsed;
  o.raw_actor = j.value("raw_actor", std::string{});
  o.raw_observer = j.value("raw_observer", std::string{});
  if (o.category != classify_outcome(o.y_act, o.y_obs)) {
    throw SchemaError("category does not match the verdict pair");
  }
}

OutcomeCategory classify_pair(ForcedChoice y_act, ForcedChoice y_obs) {
  if (y_act == y_obs) {
    return y_act == ForcedChoice::Int ? OutcomeCategory::Internal : OutcomeCategory::External;
  }
  return y_act == ForcedChoice::Ext ? OutcomeCategory::VAoa : OutcomeCategory::RAoa;
}

OutcomeCategory classify_outcome(std::optional<ForcedChoice> y_act,
                                 std::optional<ForcedChoice> y_obs) {
  if (!y_act || !y_obs) return OutcomeCategory::Invalid;
  return classify_pair(*y_act, *y_obs);
}

void to_json(nlohmann::json& j, const MetricsSummary& m) {
  j = nlohmann::json{
      {"n_total", m.n_total},   {"n_internal", m.n_internal}, {"n_external", m.n_external},
      {"n_vaoa", m.n_vaoa},     {"n_raoa", m.n_raoa},         {"n_invalid", m.n_invalid},
      {"flip", m.flip},
  };
  if (m.acc) j["acc"] = *m.acc;
  if (m.acc_actor) j["acc_actor"] = *m.acc_actor;
  if (m.acc_observer) j["acc_observer"] = *m.acc_observer;
  if (m.f1) j["f1"] = *m.f1;
}

MetricsSummary aggregate_metrics(const std::vector<PairedOutcome>& outcomes,
                                 const GoldChoices* golds, const std::vector<AnswerPair>* answers) {
  MetricsSummary summary;
  summary.n_total = outcomes.size();
  for (const auto& outcome : outcomes) {
    switch (outcome.category) {
      case OutcomeCategory::Internal: ++summary.n_internal; break;
      case OutcomeCategory::External: ++summary.n_external; break;
      case OutcomeCategory::VAoa: ++summary.n_vaoa; break;
      case OutcomeCategory::RAoa: ++summary.n_raoa; break;
      case OutcomeCategory::Invalid: ++summary.n_invalid; break;
    }
  }
  summary.flip = summary.n_vaoa + summary.n_raoa;

  if (golds) {
    std::size_t actor_valid = 0, actor_correct = 0, observer_valid = 0, observer_correct = 0;
    for (const auto& outcome : outcomes) {
      auto it = golds->find(outcome.trace_id);
      if (it == golds->end()) continue;
      if (outcome.y_act) {
        ++actor_valid;
        if (*outcome.y_act == it->second) ++actor_correct;
      }
      if (outcome.y_obs) {
        ++observer_valid;
        if (*outcome.y_obs == it->second) ++observer_correct;
      }
    }
    if (actor_valid > 0) summary.acc_actor = static_cast<double>(actor_correct) / actor_valid;
    if (observer_valid > 0) {
      summary.acc_observer = static_cast<double>(observer_correct) / observer_valid;
    }
    if (summary.acc_actor && summary.acc_observer) {
      summary.acc = (*summary.acc_actor + *summary.acc_observer) / 2.0;
    } else if (summary.acc_actor) {
      summary.acc = summary.acc_actor;
    } else if (summary.acc_observer) {
      summary.acc = summary.acc_observer;
    }
  }

  if (answers && !answers->empty()) {
    double sum = 0.0;
    for (const auto& pair : *answers) sum += answer_f1(pair.predicted, pair.gold);
    summary.f1 = sum / static_cast<double>(answers->size());
  }
  return summary;
}

double answer_f1(const std::string& predicted, const std::string& gold) {
  auto lhs = parse_numeric_answer(predicted);
  auto rhs = parse_numeric_answer(gold);
  if (lhs && rhs && numeric_equal(*lhs, *rhs)) return 1.0;

  std::vector<std::string> pred_tokens = f1_tokens(predicted);
  std::vector<std::string> gold_tokens = f1_tokens(gold);
  if (pred_tokens.empty() && gold_tokens.empty()) return 1.0;
  if (pred_tokens.empty() || gold_tokens.empty()) return 0.0;

  // Multiset overlap.
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& token : gold_tokens) ++counts[token];
  std::size_t overlap = 0;
  for (const auto& token : pred_tokens) {
    auto it = counts.find(token);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  double precision = static_cast<double>(overlap) / pred_tokens.size();
  double recall = static_cast<double>(overlap) / gold_tokens.size();
  return 2.0 * precision * recall / (precision + recall);
}

std::string_view to_string(ProbeMode mode) {
  switch (mode) {
    case ProbeMode::ForcedChoice: return "forced-choice";
    case ProbeMode::DualView: return "dual-view";
    case ProbeMode::Tas: return "tas";
  }
  return "forced-choice";
}

std::optional<ProbeMode> probe_mode_from_string(std::string_view name) {
  if (name == "forced-choice") return ProbeMode::ForcedChoice;
  if (name == "dual-view") return ProbeMode::DualView;
  if (name == "tas") return ProbeMode::Tas;
  return std::nullopt;
}

PairedOutcome run_paired_probe(const InteractionTrace& trace, llm::ChatClient& client,
                               const ProbeOptions& options) {
  std::string actor_prompt = trace.system_prompt_actor;
  std::string observer_prompt = trace.system_prompt_observer;
  if (options.mode == ProbeMode::DualView) {
    if (!options.actor_system_override.empty()) actor_prompt = options.actor_system_override;
    if (!options.observer_system_override.empty()) {
      observer_prompt = options.observer_system_override;
    }
  }
  std::string shared_user = user_turn(trace, options);

  SideResult actor = probe_side(actor_prompt, shared_user, client, options);
  SideResult observer = probe_side(observer_prompt, shared_user, client, options);

  PairedOutcome outcome;
  outcome.trace_id = trace.trace_id;
  outcome.y_act = actor.verdict;
  outcome.y_obs = observer.verdict;
  outcome.category = classify_outcome(actor.verdict, observer.verdict);
  outcome.raw_actor = actor.raw;
  outcome.raw_observer = observer.raw;
  return outcome;
}

std::vector<PairedOutcome> run_probe_corpus(const std::vector<InteractionTrace>& traces,
                                            llm::ChatClient& client, const ProbeOptions& options,
                                            int parallelism) {
  std::vector<PairedOutcome> outcomes(traces.size());
  int workers = std::clamp(parallelism, 1, static_cast<int>(std::max<std::size_t>(traces.size(), 1)));
  if (workers == 1) {
    for (std::size_t i = 0; i < traces.size(); ++i) {
      outcomes[i] = run_paired_probe(traces[i], client, options);
    }
    return outcomes;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= traces.size()) return;
        try {
          outcomes[i] = run_paired_probe(traces[i], client, options);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mu);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& thread : pool) thread.join();
  if (failure) std::rethrow_exception(failure);
  return outcomes;
}

}  // namespace aoa
