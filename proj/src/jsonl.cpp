#include "summscore/jsonl.hpp"

#include <fstream>

#include "summscore/types.hpp"

namespace summscore {

namespace {

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open file: " + path.string());
  }
  return in;
}

bool is_blank(const std::string& line) {
  for (char c : line) {
    if (c != ' ' && c != '\t' && c != '\r') return false;
  }
  return true;
}

}  // namespace

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const Json&, std::size_t)>& fn) {
  std::ifstream in = open_for_read(path);
  std::string line;
  std::size_t record_no = 0;
  while (std::getline(in, line)) {
    if (is_blank(line)) continue;
    ++record_no;
    Json record;
    try {
      record = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw DataError("invalid JSON at record " + std::to_string(record_no) + " in " +
                      path.string() + ": " + e.what());
    }
    fn(record, record_no);
  }
}

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
  std::vector<Json> records;
  for_each_jsonl(path, [&](const Json& r, std::size_t) { records.push_back(r); });
  return records;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& records) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write file: " + path.string());
  }
  for (const Json& r : records) {
    out << r.dump() << '\n';
  }
}

void write_kv_manifest(const std::filesystem::path& path,
                       const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write manifest: " + path.string());
  }
  for (const auto& [key, value] : entries) {
    out << key << '=' << value << '\n';
  }
}

std::vector<std::pair<std::string, std::string>> read_kv_manifest(
    const std::filesystem::path& path) {
  std::ifstream in = open_for_read(path);
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (is_blank(line)) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError("malformed manifest line in " + path.string() + ": " + line);
    }
    std::string value = line.substr(eq + 1);
    if (!value.empty() && value.back() == '\r') value.pop_back();
    entries.emplace_back(line.substr(0, eq), std::move(value));
  }
  return entries;
}

std::string manifest_value(
    const std::vector<std::pair<std::string, std::string>>& entries,
    const std::string& key) {
  for (const auto& [k, v] : entries) {
    if (k == key) return v;
  }
  throw DataError("manifest is missing key: " + key);
}

void write_double_blob(const std::filesystem::path& path, const double* data,
                       std::size_t count) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write blob: " + path.string());
  }
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(count * sizeof(double)));
}

std::vector<double> read_double_blob(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open blob: " + path.string());
  }
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  if (bytes % sizeof(double) != 0) {
    throw DataError("blob size is not a multiple of 8 bytes: " + path.string());
  }
  std::vector<double> values(bytes / sizeof(double));
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(bytes));
  if (!in) {
    throw DataError("short read on blob: " + path.string());
  }
  return values;
}

}  // namespace summscore
