#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "aoa/domain.hpp"

namespace aoa {

/// Versioned prompt templates loaded from a directory with a templates.json
/// manifest. Placeholders use {name} syntax; substitution replaces only the
/// keys it is given, so literal braces elsewhere in a template survive.
class PromptLibrary {
 public:
  static PromptLibrary load(const std::filesystem::path& dir);

  /// Resolves the template directory from the explicit argument, the
  /// AOA_TEMPLATES_DIR environment variable, or ./assets/prompts, in that order.
  static PromptLibrary load_default(const std::string& explicit_dir = {});

  const std::string& text(const std::string& name) const;
  const std::string& version(const std::string& name) const;
  bool has(const std::string& name) const;

  std::string render(const std::string& name,
                     const std::map<std::string, std::string>& subs) const;

  /// Per-domain instruction block injected into the scenario generator.
  const std::string& domain_instructions(Domain domain) const;

  static std::string substitute(std::string_view tpl,
                                const std::map<std::string, std::string>& subs);

 private:
  struct Entry {
    std::string text;
    std::string version;
  };
  std::map<std::string, Entry> entries_;
  std::map<std::string, std::string> domain_instructions_;
};

}  // namespace aoa
