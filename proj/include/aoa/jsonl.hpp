#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace aoa {

/// Calls `fn(line_number, raw_line)` for every non-blank line. Line numbers are 1-based.
/// Throws IoError if the path cannot be opened.
void for_each_jsonl_line(const std::filesystem::path& path,
                         const std::function<void(std::size_t, const std::string&)>& fn);

/// Parses every non-blank line as JSON. Throws SchemaError (with line) on the first
/// malformed line, IoError on unreadable paths.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

/// Writes one compact JSON object per line, truncating any existing file.
void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& records);

}  // namespace aoa
