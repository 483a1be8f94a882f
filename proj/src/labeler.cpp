#include "aoa/labeler.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <unordered_set>

namespace aoa {

namespace {

std::string_view strip(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

void to_json(nlohmann::json& j, const LabeledCase& c) {
  j = nlohmann::json{
      {"case", c.record},
      {"label", to_string(c.label)},
      {"evidence_covered", c.evidence_covered},
      {"answer_correct", c.answer_correct},
  };
}

void from_json(const nlohmann::json& j, LabeledCase& c) {
  c.record = j.at("case").get<CaseRecord>();
  std::string label = j.at("label").get<std::string>();
  auto parsed = attribution_label_from_string(label);
  if (!parsed) throw SchemaError("unknown label '" + label + "'");
  c.label = *parsed;
  c.evidence_covered = j.at("evidence_covered").get<bool>();
  c.answer_correct = j.at("answer_correct").get<bool>();
}

bool evidence_covered(const CaseRecord& record) {
  std::unordered_set<std::string_view> retrieved;
  retrieved.reserve(record.retrieved_evidence.size());
  for (const auto& item : record.retrieved_evidence) retrieved.insert(item.id);
  return std::all_of(record.gold_evidence_ids.begin(), record.gold_evidence_ids.end(),
                     [&](const std::string& id) { return retrieved.contains(id); });
}

std::optional<double> parse_numeric_answer(std::string_view text) {
  std::string_view s = strip(text);
  if (s.empty()) return std::nullopt;
  bool percent = false;
  if (s.back() == '%') {
    percent = true;
    s = strip(s.substr(0, s.size() - 1));
  }
  std::string cleaned;
  cleaned.reserve(s.size());
  for (char c : s) {
    if (c == '$' || c == ',' || c == ' ') continue;
    cleaned.push_back(c);
  }
  if (cleaned.empty()) return std::nullopt;
  char* end = nullptr;
  double value = std::strtod(cleaned.c_str(), &end);
  if (end != cleaned.c_str() + cleaned.size()) return std::nullopt;
  if (!std::isfinite(value)) return std::nullopt;
  return percent ? value / 100.0 : value;
}

bool numeric_equal(double a, double b, double rel_tol) {
  if (a == b) return true;
  double scale = std::max(std::fabs(a), std::fabs(b));
  return std::fabs(a - b) <= rel_tol * scale;
}

std::string normalize_answer_text(std::string_view text) {
  std::string_view stripped = strip(text);
  std::string out;
  out.reserve(stripped.size());
  for (char c : stripped) {
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::string normalize_denotation(std::string_view text) {
  std::string_view stripped = strip(text);
  std::string out;
  out.reserve(stripped.size());
  bool in_space = false;
  for (char c : stripped) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_space = true;
      continue;
    }
    if (in_space && !out.empty()) out.push_back(' ');
    in_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

bool answers_equal(std::string_view predicted, std::string_view gold, TaskKind kind) {
  if (kind == TaskKind::TextToSql) {
    return normalize_denotation(predicted) == normalize_denotation(gold);
  }
  auto lhs = parse_numeric_answer(predicted);
  auto rhs = parse_numeric_answer(gold);
  if (lhs && rhs) return numeric_equal(*lhs, *rhs);
  return normalize_answer_text(predicted) == normalize_answer_text(gold);
}

bool answer_correct(const CaseRecord& record) {
  return answers_equal(record.predicted_answer, record.gold_answer, record.task_kind);
}

LabeledCase assign_label(const CaseRecord& record) {
  LabeledCase labeled;
  labeled.record = record;
  labeled.evidence_covered = evidence_covered(record);
  labeled.answer_correct = answer_correct(record);
  if (!labeled.evidence_covered) {
    labeled.label = AttributionLabel::FalseExt;  // unsolvable as retrieved, whatever the answer
  } else if (!labeled.answer_correct) {
    labeled.label = AttributionLabel::FalseInt;
  } else {
    labeled.label = AttributionLabel::True;
  }
  return labeled;
}

LabelCounts count_labels(std::span<const LabeledCase> cases) {
  LabelCounts counts;
  for (const auto& c : cases) {
    switch (c.label) {
      case AttributionLabel::FalseExt: ++counts.n_false_ext; break;
      case AttributionLabel::FalseInt: ++counts.n_false_int; break;
      case AttributionLabel::True: ++counts.n_true; break;
    }
  }
  return counts;
}

}  // namespace aoa
