#include "aoa/reward.hpp"

#include <cctype>

namespace aoa {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// The rollout's final answer, per the trailer conventions documented in the header.
std::optional<std::string> extract_final_answer(const TasParse& parsed, const CaseRecord& record) {
  if (parsed.trailing_ignored) {
    std::string_view text = parsed.trailing_text;
    std::size_t marker = text.find("[Answer]");
    if (marker != std::string_view::npos) {
      std::string_view line = text.substr(marker + 8);
      std::size_t end = line.find('\n');
      if (end != std::string_view::npos) line = line.substr(0, end);
      return std::string(trim(line));
    }
    return std::string(trim(text));
  }
  if (parsed.trace.action.kind == TasActionKind::Confirm) {
    return record.predicted_answer;
  }
  return std::nullopt;
}

}  // namespace

void RewardWeights::validate() const {
  if (alpha < 0 || beta < 0 || gamma < 0) throw SchemaError("reward weights must be non-negative");
  if (alpha == 0 && beta == 0 && gamma == 0) {
    throw SchemaError("at least one reward weight must be positive");
  }
}

void to_json(nlohmann::json& j, const RewardWeights& w) {
  j = nlohmann::json{{"alpha", w.alpha}, {"beta", w.beta}, {"gamma", w.gamma}};
}

void from_json(const nlohmann::json& j, RewardWeights& w) {
  w.alpha = j.at("alpha").get<double>();
  w.beta = j.at("beta").get<double>();
  w.gamma = j.at("gamma").get<double>();
  w.validate();
}

void to_json(nlohmann::json& j, const RewardBreakdown& b) {
  j = nlohmann::json{
      {"r1_format", b.r1_format}, {"r2_attribution", b.r2_attribution},
      {"r3_answer", b.r3_answer}, {"total", b.total},
      {"weights", b.weights},
  };
  if (b.case_id) j["case_id"] = *b.case_id;
}

void from_json(const nlohmann::json& j, RewardBreakdown& b) {
  b.r1_format = j.at("r1_format").get<double>();
  b.r2_attribution = j.at("r2_attribution").get<double>();
  b.r3_answer = j.at("r3_answer").get<double>();
  b.total = j.at("total").get<double>();
  b.weights = j.at("weights").get<RewardWeights>();
  b.case_id = std::nullopt;
  if (j.contains("case_id")) b.case_id = j.at("case_id").get<std::string>();
}

double weighted_total(const RewardWeights& w, double r1, double r2, double r3) {
  return w.alpha * r1 + w.beta * r2 + w.gamma * r3;
}

double score_format(std::string_view raw) { return try_parse_tas(raw) ? 1.0 : 0.0; }

double score_attribution(const TasTrace& trace, AttributionLabel gold) {
  return trace.attribution == gold ? 1.0 : 0.0;
}

double score_answer(std::string_view rollout, const CaseRecord& record, AttributionLabel gold) {
  auto parsed = try_parse_tas(rollout);
  if (!parsed) return 0.0;
  if (gold == AttributionLabel::FalseExt) {
    // The task is unsolvable as retrieved; the right answer is to go get the
    // missing evidence. Any non-empty query counts (query matching is not scored).
    const TasAction& action = parsed->trace.action;
    return action.kind == TasActionKind::Search && !action.argument.empty() ? 1.0 : 0.0;
  }
  auto answer = extract_final_answer(*parsed, record);
  if (!answer) return 0.0;
  return answers_equal(*answer, record.gold_answer, record.task_kind) ? 1.0 : 0.0;
}

double score_answer(std::string_view rollout, const CaseRecord& record) {
  return score_answer(rollout, record, assign_label(record).label);
}

RewardBreakdown composite_reward(std::string_view rollout, AttributionLabel gold,
                                 const CaseRecord& record, const RewardWeights& weights) {
  weights.validate();
  RewardBreakdown breakdown;
  breakdown.weights = weights;
  breakdown.case_id = record.case_id;
  breakdown.r1_format = score_format(rollout);
  if (breakdown.r1_format == 0.0) {
    breakdown.total = 0.0;  // no semantic credit without structure
    return breakdown;
  }
  TasParse parsed = parse_tas(rollout);
  breakdown.r2_attribution = score_attribution(parsed.trace, gold);
  breakdown.r3_answer = score_answer(rollout, record, gold);
  breakdown.total =
      weighted_total(weights, breakdown.r1_format, breakdown.r2_attribution, breakdown.r3_answer);
  return breakdown;
}

}  // namespace aoa
