#include "trick/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "trick/errors.hpp"

namespace trick {
namespace {

std::string trim(std::string_view s) {
  auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

bool valid_identifier(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::islower(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) ||
           c == '_' || c == '-';
  });
}

[[noreturn]] void syntax_error(const std::string& source, int line, const std::string& message) {
  throw Error(ErrorCode::config_error, source + ":" + std::to_string(line) + ": " + message);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

std::optional<double> parse_double(const std::string& s) {
  // strtod accepts hex floats and locale quirks we do not want; from_chars is strict.
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

void ConfigSection::set(const std::string& key, const std::string& value) {
  for (auto& e : entries) {
    if (e.key == key) {
      e.value = value;
      return;
    }
  }
  entries.push_back({key, value, 0});
}

std::vector<const ConfigSection*> ConfigDocument::all(const std::string& name) const {
  std::vector<const ConfigSection*> out;
  for (const auto& s : sections)
    if (s.name == name) out.push_back(&s);
  return out;
}

const ConfigSection* ConfigDocument::find(const std::string& name) const {
  for (const auto& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

ConfigSection& ConfigDocument::add(const std::string& name) {
  sections.push_back({name, 0, {}});
  return sections.back();
}

ConfigDocument parse_config(std::istream& in, const std::string& source) {
  ConfigDocument doc;
  doc.source = source;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    auto hash = raw.find('#');
    auto line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') syntax_error(source, line_no, "unterminated section header");
      auto name = trim(line.substr(1, line.size() - 2));
      if (!valid_identifier(name)) syntax_error(source, line_no, "invalid section name '" + name + "'");
      doc.sections.push_back({name, line_no, {}});
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) syntax_error(source, line_no, "expected 'key = value'");
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (!valid_identifier(key)) syntax_error(source, line_no, "invalid key '" + key + "'");
    if (doc.sections.empty()) syntax_error(source, line_no, "key '" + key + "' outside of any [section]");
    auto& section = doc.sections.back();
    for (const auto& e : section.entries)
      if (e.key == key) syntax_error(source, line_no, "duplicate key '" + key + "'");
    section.entries.push_back({key, value, line_no});
  }
  return doc;
}

ConfigDocument load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config_error, path.string() + ": cannot open file");
  return parse_config(in, path.string());
}

std::string format_config(const ConfigDocument& doc) {
  std::ostringstream out;
  bool first = true;
  for (const auto& s : doc.sections) {
    if (!first) out << '\n';
    first = false;
    out << '[' << s.name << "]\n";
    for (const auto& e : s.entries) out << e.key << " = " << e.value << '\n';
  }
  return out.str();
}

SectionReader::SectionReader(const ConfigSection& section, std::string source)
    : section_(section), source_(std::move(source)) {}

const ConfigEntry* SectionReader::entry(const std::string& key) const {
  for (const auto& e : section_.entries) {
    if (e.key == key) {
      consumed_.insert(key);
      return &e;
    }
  }
  return nullptr;
}

void SectionReader::fail(const std::string& key, const std::string& message) const {
  int line = section_.line;
  for (const auto& e : section_.entries)
    if (e.key == key) line = e.line;
  throw Error(ErrorCode::config_error,
              source_ + ":" + std::to_string(line) + ": [" + section_.name + "] " + key + ": " + message);
}

bool SectionReader::has(const std::string& key) const {
  return std::any_of(section_.entries.begin(), section_.entries.end(),
                     [&](const ConfigEntry& e) { return e.key == key; });
}

std::string SectionReader::text(const std::string& key) const {
  const auto* e = entry(key);
  if (!e) fail(key, "missing required key");
  return e->value;
}

std::string SectionReader::text(const std::string& key, const std::string& fallback) const {
  const auto* e = entry(key);
  return e ? e->value : fallback;
}

double SectionReader::number(const std::string& key) const {
  auto value = text(key);
  auto parsed = parse_double(value);
  if (!parsed) fail(key, "expected a number, got '" + value + "'");
  return *parsed;
}

double SectionReader::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::int64_t SectionReader::integer(const std::string& key) const {
  auto value = text(key);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) fail(key, "expected an integer, got '" + value + "'");
  return v;
}

std::int64_t SectionReader::integer(const std::string& key, std::int64_t fallback) const {
  return has(key) ? integer(key) : fallback;
}

std::uint64_t SectionReader::unsigned_integer(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  auto value = text(key);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size())
    fail(key, "expected a non-negative integer, got '" + value + "'");
  return v;
}

bool SectionReader::boolean(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  auto value = text(key);
  if (value == "true" || value == "yes" || value == "1") return true;
  if (value == "false" || value == "no" || value == "0") return false;
  fail(key, "expected true/false, got '" + value + "'");
}

std::vector<double> SectionReader::numbers(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(text(key))) {
    auto parsed = parse_double(item);
    if (!parsed) fail(key, "expected a list of numbers, got '" + item + "'");
    out.push_back(*parsed);
  }
  return out;
}

std::vector<double> SectionReader::numbers(const std::string& key, std::vector<double> fallback) const {
  return has(key) ? numbers(key) : fallback;
}

std::vector<std::string> SectionReader::texts(const std::string& key) const {
  return split_list(text(key));
}

std::vector<std::string> SectionReader::texts(const std::string& key, std::vector<std::string> fallback) const {
  return has(key) ? texts(key) : fallback;
}

void SectionReader::finish() const {
  for (const auto& e : section_.entries) {
    if (!consumed_.count(e.key)) {
      throw Error(ErrorCode::config_error, source_ + ":" + std::to_string(e.line) + ": [" + section_.name +
                                               "] unknown key '" + e.key + "'");
    }
  }
}

std::filesystem::path resolve_relative(const std::string& source, const std::string& written) {
  std::filesystem::path p(written);
  if (p.is_absolute()) return p;
  return std::filesystem::path(source).parent_path() / p;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (value == 0) value = 0;  // no "-0" in tables
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

}  // namespace trick
