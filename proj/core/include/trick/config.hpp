#pragma once

// Sectioned key = value text files shared by constellation, station,
// scenario, Monte Carlo and coverage definitions.
//
//   # comment
//   [section]
//   key = value
//   list_key = 1, 2, 3
//
// Keys are lower-case identifiers. A section name may repeat (e.g. one
// [station] block per site). Readers reject keys they do not consume.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace trick {

struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0;
};

struct ConfigSection {
  std::string name;
  int line = 0;
  std::vector<ConfigEntry> entries;

  void set(const std::string& key, const std::string& value);
};

struct ConfigDocument {
  std::string source;  // file path or label used in diagnostics
  std::vector<ConfigSection> sections;

  std::vector<const ConfigSection*> all(const std::string& name) const;
  const ConfigSection* find(const std::string& name) const;
  ConfigSection& add(const std::string& name);
};

ConfigDocument parse_config(std::istream& in, const std::string& source);
ConfigDocument load_config(const std::filesystem::path& path);
std::string format_config(const ConfigDocument& doc);

/// Typed access to one section. Call finish() after reading to reject
/// unknown keys; every lookup marks its key as consumed.
class SectionReader {
 public:
  SectionReader(const ConfigSection& section, std::string source);

  bool has(const std::string& key) const;
  std::string text(const std::string& key) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key) const;
  std::int64_t integer(const std::string& key, std::int64_t fallback) const;
  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const;
  std::vector<std::string> texts(const std::string& key) const;
  std::vector<std::string> texts(const std::string& key, std::vector<std::string> fallback) const;

  void finish() const;

  /// "file:line: message" diagnostic pointing at the key, or the section
  /// header when the key is absent.
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

 private:
  const ConfigEntry* entry(const std::string& key) const;

  const ConfigSection& section_;
  std::string source_;
  mutable std::set<std::string> consumed_;
};

/// Resolve a path written in a config file relative to that file.
std::filesystem::path resolve_relative(const std::string& source, const std::string& written);

std::string format_number(double value);

}  // namespace trick
