#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace summscore {

using Json = nlohmann::json;

// Reads a line-delimited JSON file. Blank lines are skipped. Parse failures
// raise DataError naming the 1-based line number.
std::vector<Json> read_jsonl(const std::filesystem::path& path);

// Calls fn(record, line_number) per record; line_number is 1-based and counts
// non-blank lines only, so it doubles as the record index used in error
// messages.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const Json&, std::size_t)>& fn);

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& records);

// Plain-text key=value manifest files (one pair per line).
void write_kv_manifest(const std::filesystem::path& path,
                       const std::vector<std::pair<std::string, std::string>>& entries);
std::vector<std::pair<std::string, std::string>> read_kv_manifest(
    const std::filesystem::path& path);
std::string manifest_value(
    const std::vector<std::pair<std::string, std::string>>& entries,
    const std::string& key);

// Raw little-endian double blobs (parameter storage).
void write_double_blob(const std::filesystem::path& path, const double* data,
                       std::size_t count);
std::vector<double> read_double_blob(const std::filesystem::path& path);

}  // namespace summscore
