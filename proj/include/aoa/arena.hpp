#pragma once

#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "aoa/errors.hpp"
#include "aoa/llm_client.hpp"
#include "aoa/prompts.hpp"

namespace aoa::arena {

enum class ReflectionMode { None, Solo, Dual, Tas };

std::string_view to_string(ReflectionMode mode);
std::optional<ReflectionMode> reflection_mode_from_string(std::string_view name);

/// Economic parameters of one arena run. The buyer budget is shared across
/// items; it deliberately may be tighter than n_items * unit_cost.
struct ArenaConfig {
  int n_items = 4;
  double buyer_budget = 260.0;
  double unit_cost = 50.0;
  double seller_target = 65.0;
  double accept_below = 55.0;   // seller offers under this close immediately
  double reject_above = 75.0;   // seller offers over this end the item
  int max_turns_per_item = 8;
  ReflectionMode reflection = ReflectionMode::None;
  double concession_step = 5.0;  // scripted-buyer step-down per counter

  /// Throws SchemaError unless unit_cost < accept_below <= seller_target <= reject_above.
  void validate() const;

  bool operator==(const ArenaConfig&) const = default;
};

void to_json(nlohmann::json& j, const ArenaConfig& c);
void from_json(const nlohmann::json& j, ArenaConfig& c);

enum class Side { Seller, Buyer };
enum class TurnKind { Offer, Counter, Accept, Reject };

std::string_view to_string(Side side);
std::string_view to_string(TurnKind kind);

struct Turn {
  Side side = Side::Seller;
  TurnKind kind = TurnKind::Offer;
  std::optional<double> price;
  std::string utterance;

  bool operator==(const Turn&) const = default;
};

void to_json(nlohmann::json& j, const Turn& t);
void from_json(const nlohmann::json& j, Turn& t);

enum class ItemEnd { Accepted, Rejected, TurnLimit, BudgetExhausted };

std::string_view to_string(ItemEnd end);

struct ItemOutcome {
  int item_index = 0;  // 1-based
  std::vector<Turn> turns;
  int n_exchanges = 0;  // seller moves; bounded by max_turns_per_item
  bool closed = false;
  std::optional<double> final_price;
  double profit = 0.0;  // final_price - unit_cost when closed, else 0
  ItemEnd end_reason = ItemEnd::Rejected;

  bool operator==(const ItemOutcome&) const = default;
};

void to_json(nlohmann::json& j, const ItemOutcome& o);
void from_json(const nlohmann::json& j, ItemOutcome& o);

struct ReflectionRecord {
  int after_item = 0;
  ReflectionMode mode = ReflectionMode::None;
  std::vector<std::string> segments;  // one per captured call
  std::string combined;               // what feeds the next item's strategy context

  bool operator==(const ReflectionRecord&) const = default;
};

void to_json(nlohmann::json& j, const ReflectionRecord& r);
void from_json(const nlohmann::json& j, ReflectionRecord& r);

struct NegotiationSession {
  ArenaConfig config;
  std::vector<ItemOutcome> items;
  std::vector<ReflectionRecord> reflections;
  double budget_spent = 0.0;

  bool operator==(const NegotiationSession&) const = default;
};

void to_json(nlohmann::json& j, const NegotiationSession& s);
void from_json(const nlohmann::json& j, NegotiationSession& s);

/// Buyer-visible negotiation state for one item.
struct BuyerState {
  double remaining_budget = 0.0;
  std::optional<double> last_counter;
  std::optional<double> last_seller_offer;
};

struct BuyerDecision {
  TurnKind kind = TurnKind::Counter;  // Accept, Counter, or Reject
  std::optional<double> price;
  std::string utterance;
};

/// Acceptance would overdraw the buyer's remaining budget.
class BudgetExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A negotiator's reply carried no extractable move even after a retry.
class MalformedOffer : public std::runtime_error {
 public:
  MalformedOffer(Side side, const std::string& message)
      : std::runtime_error(std::string(to_string(side)) + ": " + message), side_(side) {}
  Side side() const noexcept { return side_; }

 private:
  Side side_;
};

/// Deterministic buyer policy. Offers under accept_below close immediately
/// (budget permitting), offers over reject_above end the item, anything in
/// between draws a counter of max(unit_cost, offer - step). Once the buyer has
/// countered, a seller offer that concedes (below the previous offer) and
/// lands within one step of the counter is accepted as a compromise.
/// Throws BudgetExhausted when acceptance would overdraw the budget.
BuyerDecision buyer_decide(double offer, const BuyerState& state, const ArenaConfig& config);

/// "$62" / "$57.50" pattern; the last priced line wins.
std::optional<double> extract_offer_price(std::string_view text);

std::string format_money(double value);

struct ItemContext {
  int item_index = 0;
  int turn_index = 0;  // 1-based exchange number
  std::optional<double> last_counter;
  std::string strategy_context;
  std::string transcript;  // dialogue so far within this item
};

struct SellerMove {
  bool accept_counter = false;  // close at the buyer's last counter price
  double offer = 0.0;
  std::string utterance;
};

class SellerAgent {
 public:
  virtual ~SellerAgent() = default;
  virtual SellerMove next_move(const ItemContext& context, const ArenaConfig& config) = 0;
};

class BuyerAgent {
 public:
  virtual ~BuyerAgent() = default;
  virtual BuyerDecision decide(double offer, const BuyerState& state,
                               const ArenaConfig& config) = 0;
};

/// Per-item offer schedules; the final move of a schedule repeats if the item
/// runs longer. Schedules cycle across items when fewer are given than items.
class ScheduleSeller : public SellerAgent {
 public:
  explicit ScheduleSeller(std::vector<std::vector<SellerMove>> per_item);

  SellerMove next_move(const ItemContext& context, const ArenaConfig& config) override;

  static SellerMove offer(double price);
  static SellerMove accept();

 private:
  std::vector<std::vector<SellerMove>> per_item_;
};

/// Opens at the target price and concedes a fixed step per exchange, never
/// below cost + 1.
class PolicySeller : public SellerAgent {
 public:
  explicit PolicySeller(double concession = 3.0) : concession_(concession) {}

  SellerMove next_move(const ItemContext& context, const ArenaConfig& config) override;

 private:
  double concession_;
};

/// Seeded random seller for soundness sweeps: random integer openings around
/// the configured bands, random concessions, occasional counter acceptance.
class RandomSeller : public SellerAgent {
 public:
  explicit RandomSeller(unsigned long seed) : rng_(seed) {}

  SellerMove next_move(const ItemContext& context, const ArenaConfig& config) override;

 private:
  std::mt19937_64 rng_;
  double last_offer_ = 0.0;
};

class ScriptedBuyer : public BuyerAgent {
 public:
  BuyerDecision decide(double offer, const BuyerState& state, const ArenaConfig& config) override;
};

/// LLM-driven seller. The reply must end with "$<price>" or the word ACCEPT;
/// one reformat retry, then MalformedOffer.
class LlmSeller : public SellerAgent {
 public:
  LlmSeller(llm::ChatClient& client, const PromptLibrary& prompts, std::string model);

  SellerMove next_move(const ItemContext& context, const ArenaConfig& config) override;

 private:
  llm::ChatClient& client_;
  const PromptLibrary& prompts_;
  std::string model_;
};

/// LLM buyer with the hard thresholds still enforced in code: the model only
/// chooses behavior inside the bargaining band, and a mid-band ACCEPT without
/// a prior counter is demoted to a counter so threshold soundness holds in
/// live mode too.
class LlmBuyer : public BuyerAgent {
 public:
  LlmBuyer(llm::ChatClient& client, const PromptLibrary& prompts, std::string model);

  BuyerDecision decide(double offer, const BuyerState& state, const ArenaConfig& config) override;

 private:
  llm::ChatClient& client_;
  const PromptLibrary& prompts_;
  std::string model_;
};

/// Runs the reflection strategy between items and returns the captured record.
/// None leaves the context untouched; Solo adds one self-reflection; Dual adds
/// an actor/reviewer debate; Tas adds actor dialectic + reviewer dialectic +
/// a combined synthesis, each validated non-empty.
ReflectionRecord apply_reflection(ReflectionMode mode, const NegotiationSession& history,
                                  llm::ChatClient* client, const PromptLibrary* prompts,
                                  const std::string& model = "reflector");

/// Negotiates every item in sequence under the config's reflection strategy.
/// `reflection_client`/`prompts` are required for any mode other than None.
NegotiationSession run_session(const ArenaConfig& config, SellerAgent& seller, BuyerAgent& buyer,
                               llm::ChatClient* reflection_client = nullptr,
                               const PromptLibrary* prompts = nullptr,
                               const std::string& reflection_model = "reflector");

struct ArenaMetrics {
  double total_profit = 0.0;
  double avg_profit_per_item = 0.0;  // per item attempted (headline average)
  double avg_profit_per_deal = 0.0;
  double avg_profit_per_turn = 0.0;
  double avg_turns = 0.0;
  double success_rate = 0.0;
  std::size_t items_attempted = 0;
  std::size_t items_closed = 0;
  std::size_t sessions = 0;
};

void to_json(nlohmann::json& j, const ArenaMetrics& m);

ArenaMetrics arena_metrics(const std::vector<NegotiationSession>& sessions);

/// Human-readable transcript in the dialogue-log shape, reflections included.
std::string transcript(const NegotiationSession& session);

/// Average seller offer per exchange index over closed items, for turn plots.
std::vector<std::pair<int, double>> turn_offer_series(
    const std::vector<NegotiationSession>& sessions);

}  // namespace aoa::arena
