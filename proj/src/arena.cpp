#include "aoa/arena.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>

namespace aoa::arena {

namespace {

constexpr double kEps = 1e-9;

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string side_tag(Side side) { return side == Side::Seller ? "[SELLER]" : "[BUYER]"; }

}  // namespace

std::string_view to_string(ReflectionMode mode) {
  switch (mode) {
    case ReflectionMode::None: return "none";
    case ReflectionMode::Solo: return "solo";
    case ReflectionMode::Dual: return "dual";
    case ReflectionMode::Tas: return "tas";
  }
  return "none";
}

std::optional<ReflectionMode> reflection_mode_from_string(std::string_view name) {
  if (name == "none") return ReflectionMode::None;
  if (name == "solo") return ReflectionMode::Solo;
  if (name == "dual") return ReflectionMode::Dual;
  if (name == "tas") return ReflectionMode::Tas;
  return std::nullopt;
}

void ArenaConfig::validate() const {
  if (n_items < 1) throw SchemaError("n_items must be at least 1");
  if (max_turns_per_item < 1) throw SchemaError("max_turns_per_item must be at least 1");
  if (concession_step <= 0) throw SchemaError("concession_step must be positive");
  if (buyer_budget < 0) throw SchemaError("buyer_budget must be non-negative");
  if (!(unit_cost < accept_below && accept_below <= seller_target &&
        seller_target <= reject_above)) {
    throw SchemaError("price thresholds must satisfy unit_cost < accept_below <= seller_target "
                      "<= reject_above");
  }
}

void to_json(nlohmann::json& j, const ArenaConfig& c) {
  j = nlohmann::json{
      {"n_items", c.n_items},
      {"buyer_budget", c.buyer_budget},
      {"unit_cost", c.unit_cost},
      {"seller_target", c.seller_target},
      {"accept_below", c.accept_below},
      {"reject_above", c.reject_above},
      {"max_turns_per_item", c.max_turns_per_item},
      {"reflection", to_string(c.reflection)},
      {"concession_step", c.concession_step},
  };
}

void from_json(const nlohmann::json& j, ArenaConfig& c) {
  ArenaConfig defaults;
  c.n_items = j.value("n_items", defaults.n_items);
  c.buyer_budget = j.value("buyer_budget", defaults.buyer_budget);
  c.unit_cost = j.value("unit_cost", defaults.unit_cost);
  c.seller_target = j.value("seller_target", defaults.seller_target);
  c.accept_below = j.value("accept_below", defaults.accept_below);
  c.reject_above = j.value("reject_above", defaults.reject_above);
  c.max_turns_per_item = j.value("max_turns_per_item", defaults.max_turns_per_item);
  c.concession_step = j.value("concession_step", defaults.concession_step);
  std::string mode = j.value("reflection", std::string{"none"});
  auto parsed = reflection_mode_from_string(mode);
  if (!parsed) throw SchemaError("unknown reflection mode '" + mode + "'");
  c.reflection = *parsed;
  c.validate();
}

std::string_view to_string(Side side) { return side == Side::Seller ? "seller" : "buyer"; }

std::string_view to_string(TurnKind kind) {
  switch (kind) {
    case TurnKind::Offer: return "offer";
    case TurnKind::Counter: return "counter";
    case TurnKind::Accept: return "accept";
    case TurnKind::Reject: return "reject";
  }
  return "offer";
}

namespace {

std::optional<TurnKind> turn_kind_from_string(std::string_view name) {
  if (name == "offer") return TurnKind::Offer;
  if (name == "counter") return TurnKind::Counter;
  if (name == "accept") return TurnKind::Accept;
  if (name == "reject") return TurnKind::Reject;
  return std::nullopt;
}

}  // namespace

void to_json(nlohmann::json& j, const Turn& t) {
  j = nlohmann::json{{"side", to_string(t.side)}, {"kind", to_string(t.kind)},
                     {"utterance", t.utterance}};
  if (t.price) j["price"] = *t.price;
}

void from_json(const nlohmann::json& j, Turn& t) {
  std::string side = j.at("side").get<std::string>();
  if (side == "seller") {
    t.side = Side::Seller;
  } else if (side == "buyer") {
    t.side = Side::Buyer;
  } else {
    throw SchemaError("unknown side '" + side + "'");
  }
  std::string kind = j.at("kind").get<std::string>();
  auto parsed = turn_kind_from_string(kind);
  if (!parsed) throw SchemaError("unknown turn kind '" + kind + "'");
  t.kind = *parsed;
  t.price = std::nullopt;
  if (j.contains("price")) t.price = j.at("price").get<double>();
  t.utterance = j.value("utterance", std::string{});
}

std::string_view to_string(ItemEnd end) {
  switch (end) {
    case ItemEnd::Accepted: return "accepted";
    case ItemEnd::Rejected: return "rejected";
    case ItemEnd::TurnLimit: return "turn_limit";
    case ItemEnd::BudgetExhausted: return "budget_exhausted";
  }
  return "rejected";
}

namespace {

std::optional<ItemEnd> item_end_from_string(std::string_view name) {
  if (name == "accepted") return ItemEnd::Accepted;
  if (name == "rejected") return ItemEnd::Rejected;
  if (name == "turn_limit") return ItemEnd::TurnLimit;
  if (name == "budget_exhausted") return ItemEnd::BudgetExhausted;
  return std::nullopt;
}

}  // namespace

void to_json(nlohmann::json& j, const ItemOutcome& o) {
  j = nlohmann::json{
      {"item_index", o.item_index}, {"turns", o.turns},   {"n_exchanges", o.n_exchanges},
      {"closed", o.closed},         {"profit", o.profit}, {"end_reason", to_string(o.end_reason)},
  };
  if (o.final_price) j["final_price"] = *o.final_price;
}

void from_json(const nlohmann::json& j, ItemOutcome& o) {
  o.item_index = j.at("item_index").get<int>();
  o.turns = j.at("turns").get<std::vector<Turn>>();
  o.n_exchanges = j.at("n_exchanges").get<int>();
  o.closed = j.at("closed").get<bool>();
  o.profit = j.at("profit").get<double>();
  std::string end = j.at("end_reason").get<std::string>();
  auto parsed = item_end_from_string(end);
  if (!parsed) throw SchemaError("unknown end_reason '" + end + "'");
  o.end_reason = *parsed;
  o.final_price = std::nullopt;
  if (j.contains("final_price")) o.final_price = j.at("final_price").get<double>();
}

void to_json(nlohmann::json& j, const ReflectionRecord& r) {
  j = nlohmann::json{{"after_item", r.after_item},
                     {"mode", to_string(r.mode)},
                     {"segments", r.segments},
                     {"combined", r.combined}};
}

void from_json(const nlohmann::json& j, ReflectionRecord& r) {
  r.after_item = j.at("after_item").get<int>();
  std::string mode = j.at("mode").get<std::string>();
  auto parsed = reflection_mode_from_string(mode);
  if (!parsed) throw SchemaError("unknown reflection mode '" + mode + "'");
  r.mode = *parsed;
  r.segments = j.at("segments").get<std::vector<std::string>>();
  r.combined = j.at("combined").get<std::string>();
}

void to_json(nlohmann::json& j, const NegotiationSession& s) {
  j = nlohmann::json{{"config", s.config},
                     {"items", s.items},
                     {"reflections", s.reflections},
                     {"budget_spent", s.budget_spent}};
}

void from_json(const nlohmann::json& j, NegotiationSession& s) {
  s.config = j.at("config").get<ArenaConfig>();
  s.items = j.at("items").get<std::vector<ItemOutcome>>();
  s.reflections = j.value("reflections", std::vector<ReflectionRecord>{});
  s.budget_spent = j.value("budget_spent", 0.0);
}

std::string format_money(double value) {
  char buf[32];
  if (std::fabs(value - std::round(value)) < 1e-9) {
    std::snprintf(buf, sizeof(buf), "$%.0f", value);
  } else {
    std::snprintf(buf, sizeof(buf), "$%.2f", value);
  }
  return buf;
}

BuyerDecision buyer_decide(double offer, const BuyerState& state, const ArenaConfig& config) {
  if (offer <= 0) throw SchemaError("offer must be positive");

  auto guarded_accept = [&](const std::string& utterance) {
    if (offer > state.remaining_budget + kEps) {
      throw BudgetExhausted("accepting " + format_money(offer) + " would exceed the remaining " +
                            format_money(state.remaining_budget));
    }
    return BuyerDecision{TurnKind::Accept, offer, utterance};
  };

  if (offer < config.accept_below) {
    return guarded_accept("That price works for me. Deal at " + format_money(offer) + ".");
  }
  if (offer > config.reject_above) {
    return {TurnKind::Reject, std::nullopt,
            "That's far beyond anything I'd pay. I'm walking away."};
  }

  // Mid-band: aggressive bargaining. A conceding re-offer near our own counter
  // is a compromise worth taking; otherwise push back another step.
  if (state.last_counter && state.last_seller_offer &&
      offer <= *state.last_counter + config.concession_step + kEps &&
      offer < *state.last_seller_offer - kEps) {
    return guarded_accept("Alright, " + format_money(offer) +
                          " is close enough to my number. Deal.");
  }
  double counter = std::max(config.unit_cost, offer - config.concession_step);
  return {TurnKind::Counter, counter,
          "That's too high. I can only do " + format_money(counter) + " for this item."};
}

std::optional<double> extract_offer_price(std::string_view text) {
  std::optional<double> last;
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    if (text[i] != '$') continue;
    std::size_t j = i + 1;
    std::string digits;
    bool dot = false;
    while (j < text.size() &&
           (std::isdigit(static_cast<unsigned char>(text[j])) || (text[j] == '.' && !dot))) {
      if (text[j] == '.') dot = true;
      digits.push_back(text[j]);
      ++j;
    }
    if (!digits.empty() && digits != ".") last = std::stod(digits);
  }
  return last;
}

ScheduleSeller::ScheduleSeller(std::vector<std::vector<SellerMove>> per_item)
    : per_item_(std::move(per_item)) {}

SellerMove ScheduleSeller::offer(double price) {
  SellerMove move;
  move.offer = price;
  move.utterance = "I can offer this item at " + format_money(price) + ".";
  return move;
}

SellerMove ScheduleSeller::accept() {
  SellerMove move;
  move.accept_counter = true;
  move.utterance = "Your number works. Let's close at that.";
  return move;
}

SellerMove ScheduleSeller::next_move(const ItemContext& context, const ArenaConfig&) {
  if (per_item_.empty()) throw SchemaError("seller schedule is empty");
  const auto& schedule = per_item_[(context.item_index - 1) % per_item_.size()];
  if (schedule.empty()) throw SchemaError("seller schedule for an item is empty");
  std::size_t index = std::min<std::size_t>(context.turn_index - 1, schedule.size() - 1);
  return schedule[index];
}

SellerMove PolicySeller::next_move(const ItemContext& context, const ArenaConfig& config) {
  double open = config.seller_target;
  double floor = config.unit_cost + 1.0;
  double price = std::max(floor, open - concession_ * (context.turn_index - 1));
  SellerMove move;
  move.offer = price;
  move.utterance = context.turn_index == 1
                       ? "I'd like to present this at " + format_money(price) +
                             ", which reflects the quality you'll receive."
                       : "I hear you. I can come down to " + format_money(price) + ".";
  return move;
}

SellerMove RandomSeller::next_move(const ItemContext& context, const ArenaConfig& config) {
  if (context.turn_index == 1) {
    std::uniform_int_distribution<int> open(static_cast<int>(config.unit_cost) - 10,
                                            static_cast<int>(config.reject_above) + 15);
    last_offer_ = std::max(1, open(rng_));
    return ScheduleSeller::offer(last_offer_);
  }
  if (context.last_counter) {
    std::uniform_int_distribution<int> coin(0, 9);
    if (coin(rng_) < 2) return ScheduleSeller::accept();
  }
  std::uniform_int_distribution<int> step(0, 10);
  last_offer_ = std::max(1.0, last_offer_ - step(rng_));
  return ScheduleSeller::offer(last_offer_);
}

BuyerDecision ScriptedBuyer::decide(double offer, const BuyerState& state,
                                    const ArenaConfig& config) {
  return buyer_decide(offer, state, config);
}

LlmSeller::LlmSeller(llm::ChatClient& client, const PromptLibrary& prompts, std::string model)
    : client_(client), prompts_(prompts), model_(std::move(model)) {}

SellerMove LlmSeller::next_move(const ItemContext& context, const ArenaConfig& config) {
  std::string system = prompts_.render(
      "arena_seller", {{"unit_cost", format_money(config.unit_cost)},
                       {"seller_target", format_money(config.seller_target)},
                       {"strategy_context", context.strategy_context.empty()
                                                ? "(none yet)"
                                                : context.strategy_context}});
  std::string user = "Item " + std::to_string(context.item_index) + ", exchange " +
                     std::to_string(context.turn_index) + ".\n";
  if (!context.transcript.empty()) user += "Dialogue so far:\n" + context.transcript + "\n";
  if (context.last_counter) {
    user += "The buyer's latest counter-offer is " + format_money(*context.last_counter) + ".\n";
  }
  user += "Make your move.";

  llm::ChatRequest request;
  request.model = model_;
  request.system_prompt = system;
  request.messages = {{llm::Role::User, user}};
  request.max_tokens = 512;

  for (int attempt = 0; attempt < 2; ++attempt) {
    llm::ChatResult result = client_.complete(request);
    std::string text = result.text;
    std::string lowered(text);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (context.last_counter && lowered.find("accept") != std::string::npos &&
        !extract_offer_price(text)) {
      SellerMove move;
      move.accept_counter = true;
      move.utterance = text;
      return move;
    }
    if (auto price = extract_offer_price(text); price && *price > 0) {
      SellerMove move;
      move.offer = *price;
      move.utterance = text;
      return move;
    }
    request.messages.push_back({llm::Role::Assistant, text});
    request.messages.push_back(
        {llm::Role::User,
         "Your reply had no extractable move. Restate it with a final line containing only "
         "your price, e.g. \"$62\", or the single word ACCEPT."});
  }
  throw MalformedOffer(Side::Seller, "no extractable price after one reformat retry");
}

LlmBuyer::LlmBuyer(llm::ChatClient& client, const PromptLibrary& prompts, std::string model)
    : client_(client), prompts_(prompts), model_(std::move(model)) {}

BuyerDecision LlmBuyer::decide(double offer, const BuyerState& state, const ArenaConfig& config) {
  // The hard thresholds are the buyer's rules, not suggestions; enforce them here.
  if (offer < config.accept_below || offer > config.reject_above) {
    return buyer_decide(offer, state, config);
  }

  std::string system = prompts_.render(
      "arena_buyer", {{"remaining_budget", format_money(state.remaining_budget)}});
  std::string user = "The seller offers " + format_money(offer) + ".";
  if (state.last_counter) {
    user += " Your previous counter was " + format_money(*state.last_counter) + ".";
  }
  user += " Respond with your move.";

  llm::ChatRequest request;
  request.model = model_;
  request.system_prompt = system;
  request.messages = {{llm::Role::User, user}};
  request.max_tokens = 512;

  for (int attempt = 0; attempt < 2; ++attempt) {
    llm::ChatResult result = client_.complete(request);
    std::string text = result.text;
    std::string lowered(text);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    bool says_accept = lowered.find("accept") != std::string::npos;
    bool says_reject = lowered.find("reject") != std::string::npos;
    auto price = extract_offer_price(text);

    if (says_accept && state.last_counter) {
      if (offer > state.remaining_budget + kEps) {
        throw BudgetExhausted("accepting " + format_money(offer) +
                              " would exceed the remaining budget");
      }
      return {TurnKind::Accept, offer, text};
    }
    if (says_reject && !price) return {TurnKind::Reject, std::nullopt, text};
    if (price && *price > 0 && *price < offer - kEps) {
      return {TurnKind::Counter, std::max(config.unit_cost, *price), text};
    }
    if (says_accept && !state.last_counter) {
      // Mid-band acceptance before any counter would break threshold soundness;
      // bargain one step instead.
      double counter = std::max(config.unit_cost, offer - config.concession_step);
      return {TurnKind::Counter, counter, text};
    }
    request.messages.push_back({llm::Role::Assistant, text});
    request.messages.push_back(
        {llm::Role::User,
         "Your reply had no extractable move. Counter with a final line containing only a "
         "price below " + format_money(offer) + ", or the single word ACCEPT or REJECT."});
  }
  throw MalformedOffer(Side::Buyer, "no extractable decision after one reformat retry");
}

ReflectionRecord apply_reflection(ReflectionMode mode, const NegotiationSession& history,
                                  llm::ChatClient* client, const PromptLibrary* prompts,
                                  const std::string& model) {
  ReflectionRecord record;
  record.mode = mode;
  if (mode == ReflectionMode::None) return record;
  if (!client || !prompts) {
    throw UsageError("reflection mode '" + std::string(to_string(mode)) +
                     "' needs a model client and prompt templates");
  }

  std::string session_log = transcript(history);
  auto call = [&](const std::string& template_name, const std::string& user_content,
                  const char* side) {
    llm::ChatRequest request;
    request.model = model;
    request.system_prompt = prompts->text(template_name);
    request.messages = {{llm::Role::User, user_content}};
    request.max_tokens = 1024;
    try {
      return client->complete(request).text;
    } catch (const llm::TransportError& e) {
      throw llm::TransportError(std::string(side) + " reflection call: " + e.what(), e.status());
    }
  };

  switch (mode) {
    case ReflectionMode::None:
      break;
    case ReflectionMode::Solo: {
      std::string text = call("arena_reflect_solo", session_log, "actor");
      record.segments = {text};
      record.combined = text;
      break;
    }
    case ReflectionMode::Dual: {
      std::string actor = call("arena_reflect_dual_actor", session_log, "actor");
      std::string reviewer = call("arena_reflect_dual_reviewer",
                                  session_log + "\n\nThe seller's own position:\n" + actor,
                                  "reviewer");
      record.segments = {actor, reviewer};
      record.combined = actor + "\n\n" + reviewer;
      break;
    }
    case ReflectionMode::Tas: {
      std::string actor = call("arena_reflect_tas_actor", session_log, "actor");
      if (is_blank(actor)) {
        throw FormatError(FormatErrorKind::MissingSegment, "actor dialectic is empty");
      }
      std::string reviewer = call("arena_reflect_tas_reviewer", session_log, "reviewer");
      if (is_blank(reviewer)) {
        throw FormatError(FormatErrorKind::MissingSegment, "reviewer dialectic is empty");
      }
      std::string combined = call("arena_reflect_tas_combine",
                                  "--- ACTOR full_dialectic ---\n" + actor +
                                      "\n\n--- REVIEWER full_dialectic ---\n" + reviewer,
                                  "combiner");
      if (is_blank(combined)) {
        throw FormatError(FormatErrorKind::MissingSegment, "combined synthesis is empty");
      }
      record.segments = {actor, reviewer, combined};
      record.combined = combined;
      break;
    }
  }
  return record;
}

NegotiationSession run_session(const ArenaConfig& config, SellerAgent& seller, BuyerAgent& buyer,
                               llm::ChatClient* reflection_client, const PromptLibrary* prompts,
                               const std::string& reflection_model) {
  config.validate();
  NegotiationSession session;
  session.config = config;
  double budget = config.buyer_budget;
  std::string strategy_context;

  for (int item = 1; item <= config.n_items; ++item) {
    ItemOutcome outcome;
    outcome.item_index = item;
    outcome.end_reason = ItemEnd::TurnLimit;
    BuyerState state{budget, std::nullopt, std::nullopt};
    std::string item_log;
    bool done = false;

    for (int turn = 1; turn <= config.max_turns_per_item && !done; ++turn) {
      outcome.n_exchanges = turn;
      ItemContext context{item, turn, state.last_counter, strategy_context, item_log};
      SellerMove move = seller.next_move(context, config);

      if (move.accept_counter && state.last_counter) {
        double price = *state.last_counter;
        outcome.turns.push_back({Side::Seller, TurnKind::Accept, price, move.utterance});
        if (price > budget + kEps) {
          outcome.end_reason = ItemEnd::BudgetExhausted;
        } else {
          outcome.closed = true;
          outcome.final_price = price;
          outcome.end_reason = ItemEnd::Accepted;
          budget -= price;
        }
        done = true;
        break;
      }

      if (move.offer <= 0) {
        throw MalformedOffer(Side::Seller, "offer must be a positive price");
      }
      outcome.turns.push_back({Side::Seller, TurnKind::Offer, move.offer, move.utterance});
      item_log += side_tag(Side::Seller) + " " + format_money(move.offer) + " — " +
                  move.utterance + "\n";

      BuyerDecision decision;
      try {
        decision = buyer.decide(move.offer, state, config);
      } catch (const BudgetExhausted&) {
        outcome.turns.push_back({Side::Buyer, TurnKind::Reject, std::nullopt,
                                 "I can't cover that with my remaining budget."});
        outcome.end_reason = ItemEnd::BudgetExhausted;
        done = true;
        break;
      }
      outcome.turns.push_back({Side::Buyer, decision.kind, decision.price, decision.utterance});
      item_log += side_tag(Side::Buyer) + " " + decision.utterance + "\n";

      switch (decision.kind) {
        case TurnKind::Accept:
          outcome.closed = true;
          outcome.final_price = move.offer;
          outcome.end_reason = ItemEnd::Accepted;
          budget -= move.offer;
          done = true;
          break;
        case TurnKind::Reject:
          outcome.end_reason = ItemEnd::Rejected;
          done = true;
          break;
        case TurnKind::Counter:
          state.last_counter = decision.price;
          state.last_seller_offer = move.offer;
          break;
        case TurnKind::Offer:
          throw SchemaError("buyer decisions cannot be offers");
      }
    }

    outcome.profit = outcome.closed ? *outcome.final_price - config.unit_cost : 0.0;
    session.items.push_back(std::move(outcome));
    session.budget_spent = config.buyer_budget - budget;

    if (config.reflection != ReflectionMode::None && item < config.n_items) {
      ReflectionRecord record = apply_reflection(config.reflection, session, reflection_client,
                                                 prompts, reflection_model);
      record.after_item = item;
      if (!record.combined.empty()) {
        if (!strategy_context.empty()) strategy_context += "\n\n";
        strategy_context += record.combined;
      }
      session.reflections.push_back(std::move(record));
    }
  }
  return session;
}

void to_json(nlohmann::json& j, const ArenaMetrics& m) {
  j = nlohmann::json{
      {"total_profit", m.total_profit},
      {"avg_profit_per_item", m.avg_profit_per_item},
      {"avg_profit_per_deal", m.avg_profit_per_deal},
      {"avg_profit_per_turn", m.avg_profit_per_turn},
      {"avg_turns", m.avg_turns},
      {"success_rate", m.success_rate},
      {"items_attempted", m.items_attempted},
      {"items_closed", m.items_closed},
      {"sessions", m.sessions},
  };
}

ArenaMetrics arena_metrics(const std::vector<NegotiationSession>& sessions) {
  ArenaMetrics metrics;
  metrics.sessions = sessions.size();
  std::size_t total_turns = 0;
  for (const auto& session : sessions) {
    for (const auto& item : session.items) {
      ++metrics.items_attempted;
      total_turns += static_cast<std::size_t>(item.n_exchanges);
      metrics.total_profit += item.profit;
      if (item.closed) ++metrics.items_closed;
    }
  }
  if (metrics.items_attempted > 0) {
    metrics.avg_profit_per_item = metrics.total_profit / metrics.items_attempted;
    metrics.avg_turns = static_cast<double>(total_turns) / metrics.items_attempted;
    metrics.success_rate =
        static_cast<double>(metrics.items_closed) / metrics.items_attempted;
  }
  if (metrics.items_closed > 0) {
    metrics.avg_profit_per_deal = metrics.total_profit / metrics.items_closed;
  }
  if (total_turns > 0) {
    metrics.avg_profit_per_turn = metrics.total_profit / static_cast<double>(total_turns);
  }
  return metrics;
}

std::string transcript(const NegotiationSession& session) {
  std::string out = "=== SALES ARENA SESSION (reflection: " +
                    std::string(to_string(session.config.reflection)) + ") ===\n";
  for (const auto& item : session.items) {
    out += "\n### ITEM " + std::to_string(item.item_index) + "\n";
    for (const auto& turn : item.turns) {
      out += side_tag(turn.side) + " (" + std::string(to_string(turn.kind));
      if (turn.price) out += " " + format_money(*turn.price);
      out += ") " + turn.utterance + "\n";
    }
    if (item.closed) {
      out += ">> closed at " + format_money(*item.final_price) + ", profit " +
             format_money(item.profit) + "\n";
    } else {
      out += ">> no deal (" + std::string(to_string(item.end_reason)) + ")\n";
    }
    for (const auto& reflection : session.reflections) {
      if (reflection.after_item != item.item_index) continue;
      out += "\n--- REFLECTION after item " + std::to_string(reflection.after_item) + " (" +
             std::string(to_string(reflection.mode)) + ") ---\n";
      if (reflection.mode == ReflectionMode::Tas && reflection.segments.size() == 3) {
        out += "--- ACTOR full_dialectic ---\n" + reflection.segments[0] + "\n";
        out += "--- REVIEWER full_dialectic ---\n" + reflection.segments[1] + "\n";
        out += "--- COMBINED ---\n" + reflection.segments[2] + "\n";
      } else if (reflection.mode == ReflectionMode::Dual && reflection.segments.size() == 2) {
        out += "--- ACTOR ---\n" + reflection.segments[0] + "\n";
        out += "--- REVIEWER ---\n" + reflection.segments[1] + "\n";
      } else {
        for (const auto& segment : reflection.segments) out += segment + "\n";
      }
    }
  }
  return out;
}

std::vector<std::pair<int, double>> turn_offer_series(
    const std::vector<NegotiationSession>& sessions) {
  std::map<int, std::pair<double, std::size_t>> sums;  // exchange index -> (sum, count)
  for (const auto& session : sessions) {
    for (const auto& item : session.items) {
      if (!item.closed) continue;
      int exchange = 0;
      for (const auto& turn : item.turns) {
        if (turn.side != Side::Seller) continue;
        ++exchange;
        if (turn.kind == TurnKind::Offer && turn.price) {
          auto& slot = sums[exchange];
          slot.first += *turn.price;
          ++slot.second;
        }
      }
    }
  }
  std::vector<std::pair<int, double>> series;
  series.reserve(sums.size());
  for (const auto& [index, sum_count] : sums) {
    series.emplace_back(index, sum_count.first / static_cast<double>(sum_count.second));
  }
  return series;
}

}  // namespace aoa::arena
