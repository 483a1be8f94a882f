#include "aoa/prompts.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "aoa/errors.hpp"

namespace aoa {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open template " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
  std::filesystem::path manifest_path = dir / "templates.json";
  std::ifstream manifest_in(manifest_path);
  if (!manifest_in) throw IoError("cannot open template manifest " + manifest_path.string());
  nlohmann::json manifest = nlohmann::json::parse(manifest_in, nullptr, false);
  if (manifest.is_discarded() || !manifest.is_object()) {
    throw SchemaError("malformed template manifest " + manifest_path.string());
  }

  PromptLibrary lib;
  for (const auto& [name, spec] : manifest.items()) {
    if (!spec.is_object() || !spec.contains("file")) {
      throw SchemaError("manifest entry '" + name + "' needs a file field");
    }
    Entry entry;
    entry.text = read_file(dir / spec.at("file").get<std::string>());
    entry.version = spec.value("version", std::string{"unversioned"});
    lib.entries_.emplace(name, std::move(entry));
  }

  if (auto it = lib.entries_.find("domain_instructions"); it != lib.entries_.end()) {
    nlohmann::json table = nlohmann::json::parse(it->second.text, nullptr, false);
    if (table.is_discarded() || !table.is_object()) {
      throw SchemaError("domain_instructions template must be a JSON object");
    }
    for (const auto& [domain, text] : table.items()) {
      if (!domain_from_string(domain)) {
        throw SchemaError("domain_instructions has unknown domain '" + domain + "'");
      }
      lib.domain_instructions_[domain] = text.get<std::string>();
    }
    for (Domain d : kAllDomains) {
      if (!lib.domain_instructions_.contains(std::string(to_string(d)))) {
        throw SchemaError("domain_instructions missing '" + std::string(to_string(d)) + "'");
      }
    }
  }
  return lib;
}

PromptLibrary PromptLibrary::load_default(const std::string& explicit_dir) {
  if (!explicit_dir.empty()) return load(explicit_dir);
  if (const char* env = std::getenv("AOA_TEMPLATES_DIR"); env && *env) return load(env);
  return load("assets/prompts");
}

const std::string& PromptLibrary::text(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw SchemaError("unknown template '" + name + "'");
  return it->second.text;
}

const std::string& PromptLibrary::version(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw SchemaError("unknown template '" + name + "'");
  return it->second.version;
}

bool PromptLibrary::has(const std::string& name) const { return entries_.contains(name); }

std::string PromptLibrary::render(const std::string& name,
                                  const std::map<std::string, std::string>& subs) const {
  return substitute(text(name), subs);
}

const std::string& PromptLibrary::domain_instructions(Domain domain) const {
  auto it = domain_instructions_.find(std::string(to_string(domain)));
  if (it == domain_instructions_.end()) {
    throw SchemaError("no domain instructions loaded for '" + std::string(to_string(domain)) + "'");
  }
  return it->second;
}

std::string PromptLibrary::substitute(std::string_view tpl,
                                      const std::map<std::string, std::string>& subs) {
  std::string out(tpl);
  for (const auto& [key, value] : subs) {
    std::string placeholder = "{" + key + "}";
    std::size_t pos = 0;
    while ((pos = out.find(placeholder, pos)) != std::string::npos) {
      out.replace(pos, placeholder.size(), value);
      pos += value.size();
    }
  }
  return out;
}

}  // namespace aoa
