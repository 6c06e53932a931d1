#pragma once

// CSV (RFC 4180) and JSON file helpers shared by the export paths.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace qres {

/// Shortest round-trip text for a double ("%.17g" in the C locale).
std::string format_double(double v);

/// Quote a field if it contains a comma, quote, CR or LF.
std::string csv_escape(std::string_view field);

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);
  void row(std::initializer_list<std::string> fields);
  void row(const std::vector<std::string>& fields);

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::filesystem::path& path);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// Hash of a JSON document's canonical (sorted-key, compact) dump.
std::string config_hash(const nlohmann::json& doc);

}  // namespace qres
