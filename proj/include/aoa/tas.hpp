#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "aoa/errors.hpp"
#include "aoa/trace_model.hpp"

namespace aoa {

enum class TasActionKind { Search, Revise, Confirm };

std::string_view to_string(TasActionKind kind);

/// Corrective action closing a dialectical trace. Search and Revise carry a
/// non-empty argument (query / code); Confirm carries none.
struct TasAction {
  TasActionKind kind = TasActionKind::Confirm;
  std::string argument;

  static TasAction search(std::string query) { return {TasActionKind::Search, std::move(query)}; }
  static TasAction revise(std::string code) { return {TasActionKind::Revise, std::move(code)}; }
  static TasAction confirm() { return {TasActionKind::Confirm, {}}; }

  bool operator==(const TasAction&) const = default;
};

void to_json(nlohmann::json& j, const TasAction& a);
void from_json(const nlohmann::json& j, TasAction& a);

/// A parsed thesis/antithesis/synthesis trace. Segments are stored trimmed and
/// must be non-empty; they may span multiple lines but must not themselves
/// contain the reserved tag or trailer byte patterns.
struct TasTrace {
  std::string thesis;
  std::string antithesis;
  std::string synthesis;
  AttributionLabel attribution = AttributionLabel::True;
  TasAction action;

  bool operator==(const TasTrace&) const = default;
};

void to_json(nlohmann::json& j, const TasTrace& t);
void from_json(const nlohmann::json& j, TasTrace& t);

struct TasParse {
  TasTrace trace;
  bool trailing_ignored = false;  // text after the action was dropped
  std::string trailing_text;      // what was dropped, trimmed
};

/// Parses the structured dialectical format:
///
///   <thinking>
///     <thesis> ... </thesis>
///     <antithesis> ... </antithesis>
///     <synthesis> ... </synthesis>
///   </thinking>
///   [Attribution] FalseExt | FalseInt | True
///   [Action] Search(new_query) | Revise(code) | Confirm()
///
/// Tag names are case-sensitive; whitespace between tags is free. An
/// "[Analysis]" line before the attribution is skipped. "[Responsibility]"
/// is accepted in place of "[Attribution]", with External -> FalseExt and
/// Internal -> FalseInt; the prose action forms "Search New Query: q" and
/// "Revise Code: c" are accepted alongside the call forms. A missing or empty
/// dialectic segment reports MissingSegment; a missing trailer reports
/// UnknownAttribution / UnknownAction.
///
/// Throws FormatError naming the first violated rule.
TasParse parse_tas(std::string_view raw);

/// Non-throwing variant; on failure stores the error in `err` when given.
std::optional<TasParse> try_parse_tas(std::string_view raw,
                                      std::optional<FormatError>* err = nullptr);

/// Emits the canonical layout above. parse_tas(serialize_tas(t)).trace == t
/// for every trace satisfying the TasTrace invariants.
std::string serialize_tas(const TasTrace& trace);

/// Extracts the final Internal/External verdict from free text. Whole-word
/// tokens "int"/"internal" and "ext"/"external" match case-insensitively;
/// when several occur, the last one wins. Throws AmbiguityError when none is
/// found.
ForcedChoice parse_forced_choice(std::string_view raw);

std::optional<ForcedChoice> try_parse_forced_choice(std::string_view raw);

}  // namespace aoa
