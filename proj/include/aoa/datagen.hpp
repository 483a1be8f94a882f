#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "aoa/labeler.hpp"
#include "aoa/llm_client.hpp"
#include "aoa/prompts.hpp"
#include "aoa/tas.hpp"
#include "aoa/time_utils.hpp"
#include "aoa/trace_model.hpp"

namespace aoa::datagen {

struct GenMeta {
  std::string teacher_model;
  std::string created_at;
  std::string prompt_version;

  bool operator==(const GenMeta&) const = default;
};

void to_json(nlohmann::json& j, const GenMeta& m);
void from_json(const nlohmann::json& j, GenMeta& m);

/// A synthesized ambiguous-failure scenario plus its generation metadata.
/// The trace part passes the same schema validation as a loaded corpus.
struct ScenarioRecord {
  InteractionTrace trace;
  GenMeta meta;

  bool operator==(const ScenarioRecord&) const = default;
};

void to_json(nlohmann::json& j, const ScenarioRecord& r);
void from_json(const nlohmann::json& j, ScenarioRecord& r);

/// True when the interaction history breaks the generator's naturalness rules
/// (meta-commentary such as "You failed" / "I did what you asked").
bool violates_naturalness(std::string_view history);

/// Extracts the first JSON object from a teacher reply, tolerating code fences
/// and surrounding prose. Returns nullopt when none parses.
std::optional<nlohmann::json> extract_json_object(std::string_view reply);

struct DatagenOptions {
  std::string teacher_model = "teacher";
  double temperature = 0.8;
  int max_tokens = 2048;
  int retry_budget = 3;  // attempts per scenario
  Clock clock = system_clock_now();
};

/// Fills the generator template for one domain/pairing, calls the teacher, and
/// validates the reply (schema, closed domain, naturalness). Invalid replies
/// consume retries; an exhausted budget throws GenerationError carrying the
/// reject reasons. Reject reasons are also appended to `reject_log` when given.
ScenarioRecord generate_scenario(Domain domain, Pairing pairing, llm::ChatClient& client,
                                 const PromptLibrary& prompts, const DatagenOptions& options,
                                 std::vector<std::string>* reject_log = nullptr);

/// Generates exactly `per_domain` scenarios for every requested domain/pairing
/// combination, in deterministic order.
std::vector<ScenarioRecord> generate_scenarios(const std::vector<Domain>& domains, int per_domain,
                                               const std::vector<Pairing>& pairings,
                                               llm::ChatClient& client,
                                               const PromptLibrary& prompts,
                                               const DatagenOptions& options,
                                               std::vector<std::string>* reject_log = nullptr);

/// Two dialectical trajectories for one case, synthesized from opposing roles.
struct TasPair {
  std::string case_id;
  TasTrace actor_trajectory;
  TasTrace reviewer_trajectory;
  AttributionLabel gold = AttributionLabel::True;
  bool converged = false;

  bool operator==(const TasPair&) const = default;
};

void to_json(nlohmann::json& j, const TasPair& p);
void from_json(const nlohmann::json& j, TasPair& p);

/// FormatError from one side of a pair synthesis, tagged with the role.
class PairFormatError : public FormatError {
 public:
  enum class Side { Actor, Reviewer };

  PairFormatError(Side side, const FormatError& cause)
      : FormatError(cause.kind(), std::string(side == Side::Actor ? "actor" : "reviewer") +
                                      " reply: " + cause.what()),
        side_(side) {}

  Side side() const noexcept { return side_; }

 private:
  Side side_;
};

/// Issues the label-matched prompt pair (defensive actor + critical reviewer)
/// for one labeled case, parses both replies as dialectical traces, and marks
/// whether the two trajectories converged on one attribution.
TasPair synthesize_tas_pair(const LabeledCase& labeled, llm::ChatClient& client,
                            const PromptLibrary& prompts, const DatagenOptions& options);

enum class DropReason { Diverged, WrongLabel };

std::string_view to_string(DropReason reason);

struct DroppedPair {
  TasPair pair;
  DropReason reason = DropReason::Diverged;
};

struct FilterResult {
  std::vector<TasPair> kept;
  std::vector<DroppedPair> dropped;
};

/// Keeps pairs whose trajectories converged on the gold attribution; a
/// converged-but-wrong pair drops as WrongLabel, a split pair as Diverged.
FilterResult convergence_filter(const std::vector<TasPair>& pairs);

/// Template names for the label-matched prompt pair.
std::string reviewer_template_name(AttributionLabel label);
std::string executor_template_name(AttributionLabel label);

}  // namespace aoa::datagen
