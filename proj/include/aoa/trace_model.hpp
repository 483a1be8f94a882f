#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "aoa/domain.hpp"
#include "aoa/errors.hpp"

namespace aoa {

/// One ambiguous-failure case: a shared history probed twice under
/// actor and observer framings of the same neutral question.
struct InteractionTrace {
  std::string trace_id;
  Domain domain = Domain::Coding;
  Pairing pairing = Pairing::HumanAgent;
  std::string scenario_summary;
  std::string shared_interaction_history;
  std::string system_prompt_actor;
  std::string system_prompt_observer;
  std::string neutral_task_question;

  bool operator==(const InteractionTrace&) const = default;
};

void to_json(nlohmann::json& j, const InteractionTrace& t);
void from_json(const nlohmann::json& j, InteractionTrace& t);

struct EvidenceItem {
  std::string id;
  std::string body;

  bool operator==(const EvidenceItem&) const = default;
};

void to_json(nlohmann::json& j, const EvidenceItem& e);
void from_json(const nlohmann::json& j, EvidenceItem& e);

enum class TaskKind { HybridQa, TextToSql };

std::string_view to_string(TaskKind kind);
std::optional<TaskKind> task_kind_from_string(std::string_view name);

/// One retrieval-pipeline episode. Evidence identity is by stable string id;
/// gold-coverage checks compare id sets, never body text.
struct CaseRecord {
  std::optional<std::string> case_id;  // harness-added, like trace_id
  std::string question;
  std::vector<EvidenceItem> retrieved_evidence;
  std::vector<std::string> gold_evidence_ids;
  std::string predicted_answer;
  std::string gold_answer;
  std::optional<std::string> generated_program;
  TaskKind task_kind = TaskKind::HybridQa;

  /// Throws SchemaError: empty gold set, or duplicate retrieved-evidence ids.
  void validate() const;

  bool operator==(const CaseRecord&) const = default;
};

void to_json(nlohmann::json& j, const CaseRecord& c);
void from_json(const nlohmann::json& j, CaseRecord& c);

/// Ground-truth failure category of one case.
enum class AttributionLabel { FalseExt, FalseInt, True };

std::string_view to_string(AttributionLabel label);
std::optional<AttributionLabel> attribution_label_from_string(std::string_view name);

/// The binary verdict a probe forces out of a model.
enum class ForcedChoice { Int, Ext };

std::string_view to_string(ForcedChoice choice);
std::optional<ForcedChoice> forced_choice_from_string(std::string_view name);

inline constexpr std::string_view kPairedOutcomeKind = "paired_outcome";
inline constexpr std::string_view kRewardBreakdownKind = "reward_breakdown";
inline constexpr std::string_view kNegotiationSessionKind = "negotiation_session";
inline constexpr std::string_view kScenarioKind = "scenario";
inline constexpr std::string_view kRunConfigKind = "run_config";

bool is_known_result_kind(std::string_view kind);

/// Append-only result record. `kind` names the payload schema; the payload itself
/// stays generic JSON so one store serves every subsystem.
struct ResultEnvelope {
  int schema_version = 1;
  std::string created_at;  // UTC ISO-8601
  std::string run_id;
  std::string kind;
  nlohmann::json payload;

  bool operator==(const ResultEnvelope&) const = default;
};

void to_json(nlohmann::json& j, const ResultEnvelope& e);
void from_json(const nlohmann::json& j, ResultEnvelope& e);

template <typename Payload>
ResultEnvelope make_envelope(std::string_view kind, const Payload& payload, std::string run_id,
                             std::string created_at, int schema_version = 1) {
  ResultEnvelope env;
  env.schema_version = schema_version;
  env.created_at = std::move(created_at);
  env.run_id = std::move(run_id);
  env.kind = std::string(kind);
  env.payload = payload;
  return env;
}

struct TraceReject {
  std::size_t line = 0;  // 1-based
  std::string reason;

  bool operator==(const TraceReject&) const = default;
};

struct TraceLoadReport {
  std::vector<InteractionTrace> traces;
  std::vector<TraceReject> rejects;
};

/// Reads a traces.jsonl corpus, keeping valid records in file order and
/// collecting one reject (line number + reason) per bad line.
/// Throws IoError only; schema problems land in the reject list.
TraceLoadReport load_traces(const std::filesystem::path& path);

/// Same, but throws SchemaError (carrying the line number) at the first bad line.
std::vector<InteractionTrace> load_traces_strict(const std::filesystem::path& path);

/// Append-only JSONL store for ResultEnvelope records. One writer at a time;
/// appends from multiple threads are serialized internally.
class ResultStore {
 public:
  /// Opens (or creates) the store for appending. Scans existing records to
  /// recover the version high-water mark. Throws IoError.
  explicit ResultStore(std::filesystem::path path);

  /// Durably appends one record. Throws VersionError if the record's
  /// schema_version is lower than any already in the file.
  void append(const ResultEnvelope& record);

  std::size_t size() const;
  const std::filesystem::path& path() const { return path_; }

  static std::vector<ResultEnvelope> load(const std::filesystem::path& path);

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::ofstream out_;
  int max_version_ = 0;
  std::size_t size_ = 0;
};

}  // namespace aoa
