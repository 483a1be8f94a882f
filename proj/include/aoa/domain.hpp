#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace aoa {

/// The ten scenario domains a trace corpus may use. The set is closed:
/// any other domain string is rejected at load time.
enum class Domain {
  Coding,
  CustomerService,
  RagSystem,
  SafetyAlignment,
  PlanningAgent,
  CreativeWriting,
  DataAnalysis,
  Translation,
  MathLogic,
  ProfCommunication,
};

inline constexpr std::array<Domain, 10> kAllDomains = {
    Domain::Coding,          Domain::CustomerService, Domain::RagSystem,
    Domain::SafetyAlignment, Domain::PlanningAgent,   Domain::CreativeWriting,
    Domain::DataAnalysis,    Domain::Translation,     Domain::MathLogic,
    Domain::ProfCommunication,
};

std::string_view to_string(Domain domain);
std::optional<Domain> domain_from_string(std::string_view name);

/// Lowercase, hyphenated form for ids and filenames ("customer-service").
std::string domain_slug(Domain domain);

enum class Pairing { HumanAgent, AgentAgent };

std::string_view to_string(Pairing pairing);
std::optional<Pairing> pairing_from_string(std::string_view name);

}  // namespace aoa
