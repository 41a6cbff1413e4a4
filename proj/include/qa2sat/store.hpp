#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace qa2sat {

// All writes go through a temp file in the same directory followed by a
// rename, so a killed run never leaves a half-written record behind.
void write_json_atomic(const std::filesystem::path& path,
                       const nlohmann::json& j);
void write_text_atomic(const std::filesystem::path& path,
                       const std::string& text);

nlohmann::json read_json_file(const std::filesystem::path& path);

// 16-hex-digit hash of the canonical dump; used to detect config drift
// between runs sharing a store.
std::string json_hash(const nlohmann::json& j);

// Tab-separated table with a header line; cells are formatted with
// enough digits to round-trip.
std::string tsv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);

}  // namespace qa2sat
