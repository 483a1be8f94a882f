#include "aoa/datagen.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace aoa::datagen {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

constexpr std::array<std::string_view, 2> kMetaCommentaryMarkers = {
    "you failed",
    "i did what you asked",
};

std::string render_evidence(const CaseRecord& record) {
  if (record.retrieved_evidence.empty()) return "(no evidence retrieved)";
  std::string out;
  for (const auto& item : record.retrieved_evidence) {
    out += "[" + item.id + "] " + item.body + "\n";
  }
  if (!out.empty()) out.pop_back();
  return out;
}

std::string render_missing_ids(const LabeledCase& labeled) {
  std::vector<std::string> missing;
  for (const auto& gold_id : labeled.record.gold_evidence_ids) {
    bool found = std::any_of(labeled.record.retrieved_evidence.begin(),
                             labeled.record.retrieved_evidence.end(),
                             [&](const EvidenceItem& item) { return item.id == gold_id; });
    if (!found) missing.push_back(gold_id);
  }
  if (missing.empty()) return "(none missing; evidence is sufficient)";
  std::string out;
  for (const auto& id : missing) {
    if (!out.empty()) out += ", ";
    out += id;
  }
  return out;
}

TasTrace call_side(const std::string& system_prompt, const std::string& case_input,
                   llm::ChatClient& client, const DatagenOptions& options,
                   PairFormatError::Side side) {
  llm::ChatRequest request;
  request.model = options.teacher_model;
  request.system_prompt = system_prompt;
  request.messages = {{llm::Role::User, case_input}};
  request.temperature = options.temperature;
  request.max_tokens = options.max_tokens;
  llm::ChatResult result = client.complete(request);
  try {
    return parse_tas(result.text).trace;
  } catch (const FormatError& e) {
    throw PairFormatError(side, e);
  }
}

}  // namespace

void to_json(nlohmann::json& j, const GenMeta& m) {
  j = nlohmann::json{{"teacher_model", m.teacher_model},
                     {"created_at", m.created_at},
                     {"prompt_version", m.prompt_version}};
}

void from_json(const nlohmann::json& j, GenMeta& m) {
  m.teacher_model = j.at("teacher_model").get<std::string>();
  m.created_at = j.at("created_at").get<std::string>();
  m.prompt_version = j.at("prompt_version").get<std::string>();
}

void to_json(nlohmann::json& j, const ScenarioRecord& r) {
  to_json(j, r.trace);
  j["metadata"] = r.meta;
}

void from_json(const nlohmann::json& j, ScenarioRecord& r) {
  r.trace = j.get<InteractionTrace>();
  r.meta = j.at("metadata").get<GenMeta>();
}

bool violates_naturalness(std::string_view history) {
  std::string haystack = lower(history);
  return std::any_of(kMetaCommentaryMarkers.begin(), kMetaCommentaryMarkers.end(),
                     [&](std::string_view marker) {
                       return haystack.find(marker) != std::string::npos;
                     });
}

std::optional<nlohmann::json> extract_json_object(std::string_view reply) {
  std::size_t begin = reply.find('{');
  std::size_t end = reply.rfind('}');
  if (begin == std::string_view::npos || end == std::string_view::npos || end < begin) {
    return std::nullopt;
  }
  nlohmann::json parsed =
      nlohmann::json::parse(reply.substr(begin, end - begin + 1), nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) return std::nullopt;
  return parsed;
}

ScenarioRecord generate_scenario(Domain domain, Pairing pairing, llm::ChatClient& client,
                                 const PromptLibrary& prompts, const DatagenOptions& options,
                                 std::vector<std::string>* reject_log) {
  const std::string template_name = pairing == Pairing::HumanAgent
                                        ? "scenario_generator_human_agent"
                                        : "scenario_generator_agent_agent";
  std::string prompt = prompts.render(template_name, {
      {"DOMAIN_NAME", std::string(to_string(domain))},
      {"DOMAIN_INSTRUCTIONS", prompts.domain_instructions(domain)},
  });

  std::vector<std::string> rejects;
  for (int attempt = 0; attempt < std::max(options.retry_budget, 1); ++attempt) {
    llm::ChatRequest request;
    request.model = options.teacher_model;
    request.system_prompt = prompt;
    request.messages = {{llm::Role::User, "Generate the scenario now."}};
    request.temperature = options.temperature;
    request.max_tokens = options.max_tokens;
    llm::ChatResult result = client.complete(request);

    auto reject = [&](const std::string& reason) {
      rejects.push_back("attempt " + std::to_string(attempt + 1) + ": " + reason);
      if (reject_log) reject_log->push_back(rejects.back());
    };

    auto body = extract_json_object(result.text);
    if (!body) {
      reject("reply is not a JSON object");
      continue;
    }
    (*body)["pairing"] = to_string(pairing);
    InteractionTrace trace;
    try {
      trace = body->get<InteractionTrace>();
    } catch (const SchemaError& e) {
      reject(e.what());
      continue;
    }
    if (trace.domain != domain) {
      reject("domain mismatch: asked for '" + std::string(to_string(domain)) + "', got '" +
             std::string(to_string(trace.domain)) + "'");
      continue;
    }
    if (violates_naturalness(trace.shared_interaction_history)) {
      reject("naturalness: interaction history contains meta-commentary");
      continue;
    }

    ScenarioRecord record;
    record.trace = std::move(trace);
    record.meta.teacher_model = options.teacher_model;
    record.meta.created_at = to_iso8601_utc(options.clock());
    record.meta.prompt_version = prompts.version(template_name);
    return record;
  }

  std::string message = "scenario generation exhausted its retry budget for domain '" +
                        std::string(to_string(domain)) + "'";
  for (const auto& reason : rejects) message += "; " + reason;
  throw GenerationError(message);
}

std::vector<ScenarioRecord> generate_scenarios(const std::vector<Domain>& domains, int per_domain,
                                               const std::vector<Pairing>& pairings,
                                               llm::ChatClient& client,
                                               const PromptLibrary& prompts,
                                               const DatagenOptions& options,
                                               std::vector<std::string>* reject_log) {
  std::vector<ScenarioRecord> records;
  records.reserve(domains.size() * pairings.size() * static_cast<std::size_t>(per_domain));
  for (Pairing pairing : pairings) {
    for (Domain domain : domains) {
      for (int i = 0; i < per_domain; ++i) {
        ScenarioRecord record =
            generate_scenario(domain, pairing, client, prompts, options, reject_log);
        record.trace.trace_id = std::string(pairing == Pairing::HumanAgent ? "ha" : "aa") + "-" +
                                domain_slug(domain) + "-" + std::to_string(i + 1);
        records.push_back(std::move(record));
      }
    }
  }
  return records;
}

void to_json(nlohmann::json& j, const TasPair& p) {
  j = nlohmann::json{
      {"case_id", p.case_id},
      {"actor_trajectory", p.actor_trajectory},
      {"reviewer_trajectory", p.reviewer_trajectory},
      {"gold", to_string(p.gold)},
      {"converged", p.converged},
      // Canonical serializations double as SFT target texts.
      {"actor_text", serialize_tas(p.actor_trajectory)},
      {"reviewer_text", serialize_tas(p.reviewer_trajectory)},
  };
}

void from_json(const nlohmann::json& j, TasPair& p) {
  p.case_id = j.at("case_id").get<std::string>();
  p.actor_trajectory = j.at("actor_trajectory").get<TasTrace>();
  p.reviewer_trajectory = j.at("reviewer_trajectory").get<TasTrace>();
  std::string gold = j.at("gold").get<std::string>();
  auto label = attribution_label_from_string(gold);
  if (!label) throw SchemaError("unknown gold label '" + gold + "'");
  p.gold = *label;
  p.converged = j.at("converged").get<bool>();
}

std::string reviewer_template_name(AttributionLabel label) {
  switch (label) {
    case AttributionLabel::FalseExt: return "tas_reviewer_false_ext";
    case AttributionLabel::FalseInt: return "tas_reviewer_false_int";
    case AttributionLabel::True: return "tas_reviewer_true";
  }
  return "tas_reviewer_true";
}

std::string executor_template_name(AttributionLabel label) {
  switch (label) {
    case AttributionLabel::FalseExt: return "tas_executor_false_ext";
    case AttributionLabel::FalseInt: return "tas_executor_false_int";
    case AttributionLabel::True: return "tas_executor_true";
  }
  return "tas_executor_true";
}

TasPair synthesize_tas_pair(const LabeledCase& labeled, llm::ChatClient& client,
                            const PromptLibrary& prompts, const DatagenOptions& options) {
  const CaseRecord& record = labeled.record;
  std::string case_input = prompts.render("tas_case_input", {
      {"question", record.question},
      {"evidence", render_evidence(record)},
      {"predicted_answer", record.predicted_answer},
      {"code", record.generated_program.value_or("(none)")},
      {"missing_inds", render_missing_ids(labeled)},
  });

  TasPair pair;
  pair.case_id = record.case_id.value_or("case");
  pair.gold = labeled.label;
  pair.reviewer_trajectory =
      call_side(prompts.text(reviewer_template_name(labeled.label)), case_input, client, options,
                PairFormatError::Side::Reviewer);
  pair.actor_trajectory =
      call_side(prompts.text(executor_template_name(labeled.label)), case_input, client, options,
                PairFormatError::Side::Actor);
  pair.converged = pair.actor_trajectory.attribution == pair.reviewer_trajectory.attribution;
  return pair;
}

std::string_view to_string(DropReason reason) {
  return reason == DropReason::Diverged ? "Diverged" : "WrongLabel";
}

FilterResult convergence_filter(const std::vector<TasPair>& pairs) {
  FilterResult result;
  for (const auto& pair : pairs) {
    if (!pair.converged) {
      result.dropped.push_back({pair, DropReason::Diverged});
    } else if (pair.actor_trajectory.attribution != pair.gold) {
      // Converged-but-wrong pairs would reward confident error; drop them too.
      result.dropped.push_back({pair, DropReason::WrongLabel});
    } else {
      result.kept.push_back(pair);
    }
  }
  return result;
}

}  // namespace aoa::datagen
