#pragma once

// Internal JSON helpers shared by the report and model writers.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "synthweight/metrics.hpp"

namespace synthweight::detail {

using ordered_json = nlohmann::ordered_json;

ordered_json to_json(const GroupReport& report);
ordered_json to_json(const std::vector<GroupReport>& reports);

nlohmann::json read_json_file(const std::filesystem::path& path, std::string_view what);
/// Opens `path` for binary writing, creating missing parent directories.
/// Throws IoError naming `what`.
std::ofstream open_output(const std::filesystem::path& path, std::string_view what);
void write_text_file(const std::filesystem::path& path, std::string_view text, std::string_view what);

// Throws ParseError naming `field` when it is absent or not of the expected kind.
const nlohmann::json& field(const nlohmann::json& obj, const char* name);
double number_field(const nlohmann::json& obj, const char* name);
std::int64_t integer_field(const nlohmann::json& obj, const char* name);

}  // namespace synthweight::detail
