#include "aoa/tas.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace aoa {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_blank(std::string_view s) { return trim(s).empty(); }

struct TagSpan {
  std::size_t open_begin = std::string_view::npos;
  std::size_t open_end = std::string_view::npos;
  std::size_t close_begin = std::string_view::npos;
  std::size_t close_end = std::string_view::npos;
  bool found() const { return open_begin != std::string_view::npos && close_begin != std::string_view::npos; }
};

TagSpan find_tag(std::string_view raw, std::string_view name) {
  std::string open = "<" + std::string(name) + ">";
  std::string close = "</" + std::string(name) + ">";
  TagSpan span;
  span.open_begin = raw.find(open);
  if (span.open_begin != std::string_view::npos) span.open_end = span.open_begin + open.size();
  span.close_begin = raw.find(close);
  if (span.close_begin != std::string_view::npos) span.close_end = span.close_begin + close.size();
  return span;
}

std::optional<AttributionLabel> attribution_from_token(std::string_view token) {
  std::string t = lower(token);
  if (t == "falseext") return AttributionLabel::FalseExt;
  if (t == "falseint") return AttributionLabel::FalseInt;
  if (t == "true" || t == "correct") return AttributionLabel::True;
  // "[Responsibility] External/Internal" trailer vocabulary.
  if (t == "ext" || t == "external") return AttributionLabel::FalseExt;
  if (t == "int" || t == "internal") return AttributionLabel::FalseInt;
  return std::nullopt;
}

// Strips non-alphanumeric decoration ("**External**", "External.") off a token.
std::string_view strip_decoration(std::string_view token) {
  while (!token.empty() && !std::isalnum(static_cast<unsigned char>(token.front()))) {
    token.remove_prefix(1);
  }
  while (!token.empty() && !std::isalnum(static_cast<unsigned char>(token.back()))) {
    token.remove_suffix(1);
  }
  return token;
}

struct ActionParse {
  TasAction action;
  std::string_view after;  // text following the action expression
};

// Parses the text following "[Action]". `rest` runs to the end of the raw input;
// call arguments may span lines, prose-form arguments end at the line break.
ActionParse parse_action(std::string_view rest) {
  std::string_view body = rest;
  while (!body.empty() && (body.front() == ' ' || body.front() == '\t')) body.remove_prefix(1);

  std::size_t line_end = body.find('\n');
  std::string_view first_line = body.substr(0, line_end);
  std::string first_line_lower = lower(first_line);

  auto prose_form = [&](std::string_view prefix, TasActionKind kind,
                        const char* missing_msg) -> ActionParse {
    std::string_view arg = first_line.substr(prefix.size());
    arg = trim(arg);
    if (!arg.empty() && arg.front() == ':') arg = trim(arg.substr(1));
    if (arg.empty()) throw FormatError(FormatErrorKind::ActionArity, missing_msg);
    std::string_view after = line_end == std::string_view::npos ? std::string_view{} : body.substr(line_end);
    return {TasAction{kind, std::string(arg)}, after};
  };

  if (first_line_lower.rfind("search new query", 0) == 0) {
    return prose_form(std::string_view("search new query"), TasActionKind::Search,
                      "Search requires a query");
  }
  if (first_line_lower.rfind("revise code", 0) == 0) {
    return prose_form(std::string_view("revise code"), TasActionKind::Revise,
                      "Revise requires code");
  }

  std::size_t verb_len = 0;
  while (verb_len < body.size() && std::isalpha(static_cast<unsigned char>(body[verb_len]))) {
    ++verb_len;
  }
  std::string verb = lower(body.substr(0, verb_len));
  TasActionKind kind;
  if (verb == "search") {
    kind = TasActionKind::Search;
  } else if (verb == "revise") {
    kind = TasActionKind::Revise;
  } else if (verb == "confirm") {
    kind = TasActionKind::Confirm;
  } else {
    throw FormatError(FormatErrorKind::UnknownAction,
                      verb.empty() ? "missing action verb" : "unknown action verb '" + verb + "'");
  }

  std::size_t pos = verb_len;
  while (pos < body.size() && (body[pos] == ' ' || body[pos] == '\t')) ++pos;

  if (pos >= body.size() || body[pos] != '(') {
    if (kind == TasActionKind::Confirm) {
      // Bare "Confirm" without parentheses.
      return {TasAction::confirm(), body.substr(pos)};
    }
    throw FormatError(FormatErrorKind::ActionArity,
                      std::string(to_string(kind)) + " requires an argument");
  }

  // Arguments (e.g. revised code) may contain balanced parentheses.
  std::size_t depth = 0;
  std::size_t close_pos = std::string_view::npos;
  for (std::size_t i = pos; i < body.size(); ++i) {
    if (body[i] == '(') {
      ++depth;
    } else if (body[i] == ')') {
      if (--depth == 0) {
        close_pos = i;
        break;
      }
    }
  }
  if (close_pos == std::string_view::npos) {
    throw FormatError(FormatErrorKind::ActionArity, "unterminated action argument");
  }

  std::string_view arg = trim(body.substr(pos + 1, close_pos - pos - 1));
  if (kind == TasActionKind::Confirm) {
    if (!arg.empty()) {
      throw FormatError(FormatErrorKind::ActionArity, "Confirm takes no argument");
    }
    return {TasAction::confirm(), body.substr(close_pos + 1)};
  }
  if (arg.empty()) {
    throw FormatError(FormatErrorKind::ActionArity,
                      std::string(to_string(kind)) + " requires a non-empty argument");
  }
  return {TasAction{kind, std::string(arg)}, body.substr(close_pos + 1)};
}

}  // namespace

std::string_view to_string(TasActionKind kind) {
  switch (kind) {
    case TasActionKind::Search: return "Search";
    case TasActionKind::Revise: return "Revise";
    case TasActionKind::Confirm: return "Confirm";
  }
  return "Confirm";
}

void to_json(nlohmann::json& j, const TasAction& a) {
  j = nlohmann::json{{"kind", to_string(a.kind)}};
  if (a.kind != TasActionKind::Confirm) j["argument"] = a.argument;
}

void from_json(const nlohmann::json& j, TasAction& a) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "Search") {
    a = TasAction::search(j.at("argument").get<std::string>());
  } else if (kind == "Revise") {
    a = TasAction::revise(j.at("argument").get<std::string>());
  } else if (kind == "Confirm") {
    a = TasAction::confirm();
  } else {
    throw SchemaError("unknown action kind '" + kind + "'");
  }
}

void to_json(nlohmann::json& j, const TasTrace& t) {
  j = nlohmann::json{
      {"thesis", t.thesis},         {"antithesis", t.antithesis}, {"synthesis", t.synthesis},
      {"attribution", to_string(t.attribution)}, {"action", t.action},
  };
}

void from_json(const nlohmann::json& j, TasTrace& t) {
  t.thesis = j.at("thesis").get<std::string>();
  t.antithesis = j.at("antithesis").get<std::string>();
  t.synthesis = j.at("synthesis").get<std::string>();
  std::string label = j.at("attribution").get<std::string>();
  auto parsed = attribution_label_from_string(label);
  if (!parsed) throw SchemaError("unknown attribution '" + label + "'");
  t.attribution = *parsed;
  t.action = j.at("action").get<TasAction>();
}

TasParse parse_tas(std::string_view raw) {
  static constexpr std::array<std::string_view, 4> kNames = {"thinking", "thesis", "antithesis",
                                                             "synthesis"};
  std::array<TagSpan, 4> spans;
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    spans[i] = find_tag(raw, kNames[i]);
    if (!spans[i].found()) {
      throw FormatError(FormatErrorKind::MissingSegment,
                        "missing <" + std::string(kNames[i]) + "> segment");
    }
  }
  const TagSpan& thinking = spans[0];
  const TagSpan& thesis = spans[1];
  const TagSpan& antithesis = spans[2];
  const TagSpan& synthesis = spans[3];

  bool ordered = thinking.open_end <= thesis.open_begin && thesis.open_end <= thesis.close_begin &&
                 thesis.close_end <= antithesis.open_begin &&
                 antithesis.open_end <= antithesis.close_begin &&
                 antithesis.close_end <= synthesis.open_begin &&
                 synthesis.open_end <= synthesis.close_begin &&
                 synthesis.close_end <= thinking.close_begin;
  if (!ordered) {
    throw FormatError(FormatErrorKind::SegmentOrder,
                      "segments must appear as thesis, antithesis, synthesis inside <thinking>");
  }

  TasTrace trace;
  auto segment_text = [&](const TagSpan& span, std::string_view name) {
    std::string_view text = trim(raw.substr(span.open_end, span.close_begin - span.open_end));
    if (text.empty()) {
      throw FormatError(FormatErrorKind::MissingSegment,
                        "empty <" + std::string(name) + "> segment");
    }
    return std::string(text);
  };
  trace.thesis = segment_text(thesis, "thesis");
  trace.antithesis = segment_text(antithesis, "antithesis");
  trace.synthesis = segment_text(synthesis, "synthesis");

  std::string_view trailer = raw.substr(thinking.close_end);

  std::size_t attr_pos = trailer.find("[Attribution]");
  std::size_t attr_len = 13;
  std::size_t resp_pos = trailer.find("[Responsibility]");
  if (resp_pos != std::string_view::npos &&
      (attr_pos == std::string_view::npos || resp_pos < attr_pos)) {
    attr_pos = resp_pos;
    attr_len = 16;
  }
  if (attr_pos == std::string_view::npos) {
    throw FormatError(FormatErrorKind::UnknownAttribution, "no attribution trailer found");
  }
  std::size_t attr_line_end = trailer.find('\n', attr_pos);
  std::string_view attr_line =
      trailer.substr(attr_pos + attr_len, (attr_line_end == std::string_view::npos
                                               ? trailer.size()
                                               : attr_line_end) -
                                              (attr_pos + attr_len));
  attr_line = trim(attr_line);
  std::string_view token = attr_line.substr(0, attr_line.find_first_of(" \t"));
  token = strip_decoration(token);
  if (token.empty()) {
    throw FormatError(FormatErrorKind::UnknownAttribution, "empty attribution token");
  }
  auto label = attribution_from_token(token);
  if (!label) {
    throw FormatError(FormatErrorKind::UnknownAttribution,
                      "unknown attribution '" + std::string(token) + "'");
  }
  trace.attribution = *label;

  std::size_t action_pos = trailer.find("[Action]", attr_pos + attr_len);
  if (action_pos == std::string_view::npos) {
    throw FormatError(FormatErrorKind::UnknownAction, "no action trailer found");
  }
  ActionParse parsed = parse_action(trailer.substr(action_pos + 8));
  trace.action = parsed.action;

  TasParse result;
  result.trace = std::move(trace);
  if (!is_blank(parsed.after)) {
    result.trailing_ignored = true;
    result.trailing_text = std::string(trim(parsed.after));
  }
  return result;
}

std::optional<TasParse> try_parse_tas(std::string_view raw, std::optional<FormatError>* err) {
  try {
    return parse_tas(raw);
  } catch (const FormatError& e) {
    if (err) *err = e;
    return std::nullopt;
  }
}

std::string serialize_tas(const TasTrace& trace) {
  std::string action_text;
  switch (trace.action.kind) {
    case TasActionKind::Search:
      action_text = "Search(" + trace.action.argument + ")";
      break;
    case TasActionKind::Revise:
      action_text = "Revise(" + trace.action.argument + ")";
      break;
    case TasActionKind::Confirm:
      action_text = "Confirm()";
      break;
  }
  std::string out;
  out += "<thinking>\n";
  out += "  <thesis> " + trace.thesis + " </thesis>\n";
  out += "  <antithesis> " + trace.antithesis + " </antithesis>\n";
  out += "  <synthesis> " + trace.synthesis + " </synthesis>\n";
  out += "</thinking>\n";
  out += "[Attribution] " + std::string(to_string(trace.attribution)) + "\n";
  out += "[Action] " + action_text;
  return out;
}

ForcedChoice parse_forced_choice(std::string_view raw) {
  auto choice = try_parse_forced_choice(raw);
  if (!choice) throw AmbiguityError("reply contains neither an internal nor an external verdict");
  return *choice;
}

std::optional<ForcedChoice> try_parse_forced_choice(std::string_view raw) {
  std::optional<ForcedChoice> last;
  std::size_t i = 0;
  while (i < raw.size()) {
    if (!std::isalpha(static_cast<unsigned char>(raw[i]))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < raw.size() && std::isalpha(static_cast<unsigned char>(raw[i]))) ++i;
    std::string word = lower(raw.substr(start, i - start));
    if (word == "int" || word == "internal") {
      last = ForcedChoice::Int;
    } else if (word == "ext" || word == "external") {
      last = ForcedChoice::Ext;
    }
  }
  return last;
}

}  // namespace aoa
