#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "json.hpp"

#include "aoa/trace_model.hpp"

namespace aoa {

/// A case plus its fact-checked failure label. The label is a pure function of
/// (evidence_covered, answer_correct): uncovered evidence wins regardless of
/// the answer, then wrong answers, then success.
struct LabeledCase {
  CaseRecord record;  // serialized under the key "case"
  AttributionLabel label = AttributionLabel::True;
  bool evidence_covered = false;
  bool answer_correct = false;

  bool operator==(const LabeledCase&) const = default;
};

void to_json(nlohmann::json& j, const LabeledCase& c);
void from_json(const nlohmann::json& j, LabeledCase& c);

/// True iff every gold evidence id appears among the retrieved evidence ids.
bool evidence_covered(const CaseRecord& record);

/// Answer comparator. Hybrid-QA answers that both parse as numbers compare
/// with relative tolerance 1e-4 after percent/currency normalization
/// ("25%" == "0.25"); otherwise text compares lowercased and stripped.
/// Text-to-SQL denotations compare as normalized strings (lowercased,
/// whitespace collapsed); the harness never executes SQL itself.
bool answers_equal(std::string_view predicted, std::string_view gold, TaskKind kind);

bool answer_correct(const CaseRecord& record);

LabeledCase assign_label(const CaseRecord& record);

/// Parses "25%", "$1,234.50", "-0.3" and friends. Percent values are scaled
/// to their decimal form. Returns nullopt when the text is not one number.
std::optional<double> parse_numeric_answer(std::string_view text);

bool numeric_equal(double a, double b, double rel_tol = 1e-4);

std::string normalize_answer_text(std::string_view text);  // lowercase + strip
std::string normalize_denotation(std::string_view text);   // lowercase + collapse whitespace

struct LabelCounts {
  std::size_t n_false_ext = 0;
  std::size_t n_false_int = 0;
  std::size_t n_true = 0;
  std::size_t total() const { return n_false_ext + n_false_int + n_true; }
};

LabelCounts count_labels(std::span<const LabeledCase> cases);

}  // namespace aoa
