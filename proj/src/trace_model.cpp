#include "aoa/trace_model.hpp"

#include <algorithm>
#include <set>

#include "aoa/jsonl.hpp"

namespace aoa {

namespace {

std::string require_string(const nlohmann::json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end()) throw SchemaError(std::string("missing field '") + field + "'");
  if (!it->is_string()) throw SchemaError(std::string("field '") + field + "' must be a string");
  return it->get<std::string>();
}

std::string require_nonempty(const nlohmann::json& j, const char* field) {
  std::string value = require_string(j, field);
  if (value.empty()) throw SchemaError(std::string("field '") + field + "' must be non-empty");
  return value;
}

}  // namespace

void to_json(nlohmann::json& j, const InteractionTrace& t) {
  j = nlohmann::json{
      {"trace_id", t.trace_id},
      {"pairing", to_string(t.pairing)},
      {"domain", to_string(t.domain)},
      {"scenario_summary", t.scenario_summary},
      {"shared_interaction_history", t.shared_interaction_history},
      {"system_prompt_actor", t.system_prompt_actor},
      {"system_prompt_observer", t.system_prompt_observer},
      {"neutral_task_question", t.neutral_task_question},
  };
}

void from_json(const nlohmann::json& j, InteractionTrace& t) {
  if (!j.is_object()) throw SchemaError("trace record must be a JSON object");

  std::string domain_name = require_string(j, "domain");
  auto domain = domain_from_string(domain_name);
  if (!domain) throw SchemaError("unknown domain '" + domain_name + "'");
  t.domain = *domain;

  std::string pairing_name = require_string(j, "pairing");
  auto pairing = pairing_from_string(pairing_name);
  if (!pairing) throw SchemaError("unknown pairing '" + pairing_name + "'");
  t.pairing = *pairing;

  t.scenario_summary = require_nonempty(j, "scenario_summary");
  t.shared_interaction_history = require_nonempty(j, "shared_interaction_history");
  t.system_prompt_actor = require_nonempty(j, "system_prompt_actor");
  t.system_prompt_observer = require_nonempty(j, "system_prompt_observer");
  t.neutral_task_question = require_nonempty(j, "neutral_task_question");
  if (t.system_prompt_actor == t.system_prompt_observer) {
    throw SchemaError("actor and observer system prompts must differ");
  }

  // trace_id is harness-added; callers may assign a line-derived default.
  t.trace_id = j.value("trace_id", std::string{});
}

void to_json(nlohmann::json& j, const EvidenceItem& e) {
  j = nlohmann::json{{"id", e.id}, {"body", e.body}};
}

void from_json(const nlohmann::json& j, EvidenceItem& e) {
  e.id = require_nonempty(j, "id");
  e.body = require_string(j, "body");
}

std::string_view to_string(TaskKind kind) {
  return kind == TaskKind::HybridQa ? "hybrid_qa" : "text_to_sql";
}

std::optional<TaskKind> task_kind_from_string(std::string_view name) {
  if (name == "hybrid_qa") return TaskKind::HybridQa;
  if (name == "text_to_sql") return TaskKind::TextToSql;
  return std::nullopt;
}

void CaseRecord::validate() const {
  if (gold_evidence_ids.empty()) throw SchemaError("gold_evidence_ids must be non-empty");
  std::set<std::string> seen;
  for (const auto& item : retrieved_evidence) {
    if (!seen.insert(item.id).second) {
      throw SchemaError("duplicate retrieved evidence id '" + item.id + "'");
    }
  }
}

void to_json(nlohmann::json& j, const CaseRecord& c) {
  j = nlohmann::json{
      {"question", c.question},
      {"retrieved_evidence", c.retrieved_evidence},
      {"gold_evidence_ids", c.gold_evidence_ids},
      {"predicted_answer", c.predicted_answer},
      {"gold_answer", c.gold_answer},
      {"task_kind", to_string(c.task_kind)},
  };
  if (c.case_id) j["case_id"] = *c.case_id;
  if (c.generated_program) j["generated_program"] = *c.generated_program;
}

void from_json(const nlohmann::json& j, CaseRecord& c) {
  if (!j.is_object()) throw SchemaError("case record must be a JSON object");
  c.question = require_string(j, "question");
  c.retrieved_evidence.clear();
  auto ev = j.find("retrieved_evidence");
  if (ev == j.end() || !ev->is_array()) throw SchemaError("missing field 'retrieved_evidence'");
  for (const auto& item : *ev) c.retrieved_evidence.push_back(item.get<EvidenceItem>());
  auto gold = j.find("gold_evidence_ids");
  if (gold == j.end() || !gold->is_array()) throw SchemaError("missing field 'gold_evidence_ids'");
  c.gold_evidence_ids = gold->get<std::vector<std::string>>();
  c.predicted_answer = require_string(j, "predicted_answer");
  c.gold_answer = require_string(j, "gold_answer");
  std::string kind_name = require_string(j, "task_kind");
  auto kind = task_kind_from_string(kind_name);
  if (!kind) throw SchemaError("unknown task_kind '" + kind_name + "'");
  c.task_kind = *kind;
  c.case_id = std::nullopt;
  if (j.contains("case_id")) c.case_id = j.at("case_id").get<std::string>();
  c.generated_program = std::nullopt;
  if (j.contains("generated_program") && !j.at("generated_program").is_null()) {
    c.generated_program = j.at("generated_program").get<std::string>();
  }
  c.validate();
}

std::string_view to_string(AttributionLabel label) {
  switch (label) {
    case AttributionLabel::FalseExt: return "FalseExt";
    case AttributionLabel::FalseInt: return "FalseInt";
    case AttributionLabel::True: return "True";
  }
  return "True";
}

std::optional<AttributionLabel> attribution_label_from_string(std::string_view name) {
  if (name == "FalseExt") return AttributionLabel::FalseExt;
  if (name == "FalseInt") return AttributionLabel::FalseInt;
  if (name == "True") return AttributionLabel::True;
  return std::nullopt;
}

std::string_view to_string(ForcedChoice choice) {
  return choice == ForcedChoice::Int ? "Int" : "Ext";
}

std::optional<ForcedChoice> forced_choice_from_string(std::string_view name) {
  if (name == "Int") return ForcedChoice::Int;
  if (name == "Ext") return ForcedChoice::Ext;
  return std::nullopt;
}

bool is_known_result_kind(std::string_view kind) {
  return kind == kPairedOutcomeKind || kind == kRewardBreakdownKind ||
         kind == kNegotiationSessionKind || kind == kScenarioKind || kind == kRunConfigKind;
}

void to_json(nlohmann::json& j, const ResultEnvelope& e) {
  j = nlohmann::json{
      {"schema_version", e.schema_version},
      {"created_at", e.created_at},
      {"run_id", e.run_id},
      {"kind", e.kind},
      {"payload", e.payload},
  };
}

void from_json(const nlohmann::json& j, ResultEnvelope& e) {
  if (!j.is_object()) throw SchemaError("result record must be a JSON object");
  auto version = j.find("schema_version");
  if (version == j.end() || !version->is_number_integer()) {
    throw SchemaError("missing field 'schema_version'");
  }
  e.schema_version = version->get<int>();
  e.created_at = require_string(j, "created_at");
  e.run_id = require_string(j, "run_id");
  e.kind = require_string(j, "kind");
  if (!is_known_result_kind(e.kind)) throw SchemaError("unknown result kind '" + e.kind + "'");
  auto payload = j.find("payload");
  if (payload == j.end()) throw SchemaError("missing field 'payload'");
  e.payload = *payload;
}

TraceLoadReport load_traces(const std::filesystem::path& path) {
  TraceLoadReport report;
  for_each_jsonl_line(path, [&](std::size_t line_no, const std::string& line) {
    nlohmann::json parsed = nlohmann::json::parse(line, nullptr, false);
    if (parsed.is_discarded()) {
      report.rejects.push_back({line_no, "malformed JSON"});
      return;
    }
    try {
      InteractionTrace trace = parsed.get<InteractionTrace>();
      if (trace.trace_id.empty()) trace.trace_id = "trace-" + std::to_string(line_no);
      report.traces.push_back(std::move(trace));
    } catch (const SchemaError& e) {
      report.rejects.push_back({line_no, e.what()});
    } catch (const nlohmann::json::exception& e) {
      report.rejects.push_back({line_no, e.what()});
    }
  });
  return report;
}

std::vector<InteractionTrace> load_traces_strict(const std::filesystem::path& path) {
  TraceLoadReport report = load_traces(path);
  if (!report.rejects.empty()) {
    const TraceReject& first = report.rejects.front();
    throw SchemaError(first.reason, first.line);
  }
  return std::move(report.traces);
}

ResultStore::ResultStore(std::filesystem::path path) : path_(std::move(path)) {
  if (std::filesystem::exists(path_)) {
    for_each_jsonl_line(path_, [&](std::size_t line_no, const std::string& line) {
      nlohmann::json parsed = nlohmann::json::parse(line, nullptr, false);
      if (parsed.is_discarded()) throw SchemaError("malformed JSON in result store", line_no);
      int version = parsed.value("schema_version", 0);
      max_version_ = std::max(max_version_, version);
      ++size_;
    });
  }
  out_.open(path_, std::ios::app);
  if (!out_) throw IoError("cannot open " + path_.string() + " for append");
}

void ResultStore::append(const ResultEnvelope& record) {
  std::lock_guard<std::mutex> lock(mu_);
  if (record.schema_version < max_version_) {
    throw VersionError("schema_version " + std::to_string(record.schema_version) +
                       " regresses below " + std::to_string(max_version_));
  }
  nlohmann::json j = record;
  out_ << j.dump() << '\n';
  out_.flush();
  if (!out_) throw IoError("append failed for " + path_.string());
  max_version_ = record.schema_version;
  ++size_;
}

std::size_t ResultStore::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return size_;
}

std::vector<ResultEnvelope> ResultStore::load(const std::filesystem::path& path) {
  std::vector<ResultEnvelope> records;
  for (const auto& j : read_jsonl(path)) {
    records.push_back(j.get<ResultEnvelope>());
  }
  return records;
}

}  // namespace aoa
