#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "aoa/llm_client.hpp"
#include "aoa/trace_model.hpp"

namespace aoa {

/// Joint classification of one paired probe.
enum class OutcomeCategory { Internal, External, VAoa, RAoa, Invalid };

std::string_view to_string(OutcomeCategory category);
std::optional<OutcomeCategory> outcome_category_from_string(std::string_view name);

struct PairedOutcome {
  std::string trace_id;
  std::optional<ForcedChoice> y_act;  // nullopt = that side never produced a verdict
  std::optional<ForcedChoice> y_obs;
  OutcomeCategory category = OutcomeCategory::Invalid;
  std::string raw_actor;
  std::string raw_observer;

  bool operator==(const PairedOutcome&) const = default;
};

void to_json(nlohmann::json& j, const PairedOutcome& o);
void from_json(const nlohmann::json& j, PairedOutcome& o);

/// The four-way joint taxonomy: agreement keeps the shared verdict's name,
/// actor-Ext/observer-Int is the vanilla asymmetry, the inverse is the
/// reverse asymmetry.
OutcomeCategory classify_pair(ForcedChoice y_act, ForcedChoice y_obs);

OutcomeCategory classify_outcome(std::optional<ForcedChoice> y_act,
                                 std::optional<ForcedChoice> y_obs);

struct MetricsSummary {
  std::size_t n_total = 0;
  std::size_t n_internal = 0;
  std::size_t n_external = 0;
  std::size_t n_vaoa = 0;
  std::size_t n_raoa = 0;
  std::size_t n_invalid = 0;
  std::size_t flip = 0;  // n_vaoa + n_raoa
  std::optional<double> acc;           // mean of the two per-side accuracies
  std::optional<double> acc_actor;
  std::optional<double> acc_observer;
  std::optional<double> f1;

  bool operator==(const MetricsSummary&) const = default;
};

void to_json(nlohmann::json& j, const MetricsSummary& m);

using GoldChoices = std::unordered_map<std::string, ForcedChoice>;  // keyed by trace_id

struct AnswerPair {
  std::string predicted;
  std::string gold;
};

/// Counts per category over a finished outcome set. Invalid outcomes are
/// reported but excluded from accuracy denominators; flip is the V-AOA +
/// R-AOA sum. Accuracy appears only when golds are given, F1 only when
/// answer pairs are given.
MetricsSummary aggregate_metrics(const std::vector<PairedOutcome>& outcomes,
                                 const GoldChoices* golds = nullptr,
                                 const std::vector<AnswerPair>* answers = nullptr);

/// Token-level F1 after lowercasing and punctuation stripping. Numerically
/// equal answers (labeler comparator) short-circuit to 1.
double answer_f1(const std::string& predicted, const std::string& gold);

enum class ProbeMode { ForcedChoice, DualView, Tas };

std::string_view to_string(ProbeMode mode);
std::optional<ProbeMode> probe_mode_from_string(std::string_view name);

struct ProbeOptions {
  std::string model = "scripted";
  double temperature = 0.0;  // perspective change, not sampling noise, must drive any flip
  int max_tokens = 1024;
  std::optional<long> seed;
  ProbeMode mode = ProbeMode::ForcedChoice;
  // Dual-view mode replaces the per-trace prompts with one fixed role pair.
  std::string actor_system_override;
  std::string observer_system_override;
  // Appended to the user turn in TAS mode to request the dialectical format.
  std::string tas_instruction;
};

/// Queries the model twice on identical shared context, varying only the
/// system prompt, and classifies the joint outcome. A reply with no verdict
/// is retried once with a format reminder; a side that still fails is
/// Invalid. Transport failures propagate.
PairedOutcome run_paired_probe(const InteractionTrace& trace, llm::ChatClient& client,
                               const ProbeOptions& options);

/// Runs the whole corpus with up to `parallelism` traces in flight; output
/// order matches input order.
std::vector<PairedOutcome> run_probe_corpus(const std::vector<InteractionTrace>& traces,
                                            llm::ChatClient& client, const ProbeOptions& options,
                                            int parallelism = 1);

}  // namespace aoa
