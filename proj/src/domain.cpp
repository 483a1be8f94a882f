#include "aoa/domain.hpp"

#include <algorithm>
#include <cctype>

namespace aoa {

std::string_view to_string(Domain domain) {
  switch (domain) {
    case Domain::Coding: return "Coding";
    case Domain::CustomerService: return "Customer Service";
    case Domain::RagSystem: return "RAG System";
    case Domain::SafetyAlignment: return "Safety Alignment";
    case Domain::PlanningAgent: return "Planning Agent";
    case Domain::CreativeWriting: return "Creative Writing";
    case Domain::DataAnalysis: return "Data Analysis";
    case Domain::Translation: return "Translation";
    case Domain::MathLogic: return "Math Logic";
    case Domain::ProfCommunication: return "Prof. Communication";
  }
  return "Coding";
}

std::optional<Domain> domain_from_string(std::string_view name) {
  for (Domain d : kAllDomains) {
    if (to_string(d) == name) return d;
  }
  return std::nullopt;
}

std::string domain_slug(Domain domain) {
  std::string slug;
  for (char c : to_string(domain)) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      slug.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!slug.empty() && slug.back() != '-') {
      slug.push_back('-');
    }
  }
  while (!slug.empty() && slug.back() == '-') slug.pop_back();
  return slug;
}

std::string_view to_string(Pairing pairing) {
  return pairing == Pairing::HumanAgent ? "Human-Agent" : "Agent-Agent";
}

std::optional<Pairing> pairing_from_string(std::string_view name) {
  if (name == "Human-Agent") return Pairing::HumanAgent;
  if (name == "Agent-Agent") return Pairing::AgentAgent;
  return std::nullopt;
}

}  // namespace aoa
