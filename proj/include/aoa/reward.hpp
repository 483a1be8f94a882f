#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "aoa/labeler.hpp"
#include "aoa/tas.hpp"
#include "aoa/trace_model.hpp"

namespace aoa {

/// Coefficients of the composite reward total = alpha*r1 + beta*r2 + gamma*r3.
/// Zeroing individual weights reproduces the component-ablation configurations;
/// no weight vector is special-cased.
struct RewardWeights {
  double alpha = 1.0;
  double beta = 2.0;
  double gamma = 4.0;

  /// Throws SchemaError on negative weights or an all-zero vector.
  void validate() const;

  bool operator==(const RewardWeights&) const = default;
};

void to_json(nlohmann::json& j, const RewardWeights& w);
void from_json(const nlohmann::json& j, RewardWeights& w);

struct RewardBreakdown {
  double r1_format = 0.0;
  double r2_attribution = 0.0;
  double r3_answer = 0.0;
  double total = 0.0;
  RewardWeights weights;
  std::optional<std::string> case_id;

  bool operator==(const RewardBreakdown&) const = default;
};

void to_json(nlohmann::json& j, const RewardBreakdown& b);
void from_json(const nlohmann::json& j, RewardBreakdown& b);

/// Plain weighted sum, no gating. Exposed so the arithmetic is testable over
/// all component combinations independent of how components are earned.
double weighted_total(const RewardWeights& w, double r1, double r2, double r3);

/// 1 when the rollout parses as a structured dialectical trace, else 0.
double score_format(std::string_view raw);

/// 1 when the predicted attribution matches the assigned label, else 0.
double score_attribution(const TasTrace& trace, AttributionLabel gold);

/// Answer-correctness component of one rollout.
///
/// For a FalseExt gold the corrective action is the answer: a Search action
/// with a non-empty query earns 1, anything else 0. Otherwise the rollout's
/// final answer is compared against the gold answer with the labeler
/// comparator. The final answer is taken from an "[Answer]" line after the
/// action, else from free text trailing the action, else — for a bare
/// Confirm() — from the record's predicted answer (confirming asserts it was
/// right). Unparseable rollouts score 0.
double score_answer(std::string_view rollout, const CaseRecord& record, AttributionLabel gold);

/// Convenience overload deriving the gold label from the record itself.
double score_answer(std::string_view rollout, const CaseRecord& record);

/// Full composite reward with format gating: an unparseable rollout zeroes
/// every component (no semantic credit without structure).
RewardBreakdown composite_reward(std::string_view rollout, AttributionLabel gold,
                                 const CaseRecord& record, const RewardWeights& weights = {});

}  // namespace aoa
