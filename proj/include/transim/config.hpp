#pragma once

// Nested-section key = value configuration:
//
//   [device]
//   freq_ghz = 5.641, 6.517, 5.507
//   [device.coupling]
//   g_ab_mhz = 40
//
// Every key is declared in a schema with a kind, a default and a unit; anything
// else is rejected with the offending path. The resolved configuration
// serializes back to the same format, which is what run manifests contain.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "transim/errors.hpp"

namespace transim {

enum class KeyKind { Number, NumberList, Integer, Flag, Choice, Text };

struct KeySpec {
  std::string path;           // section.sub.key
  KeyKind kind = KeyKind::Number;
  std::string default_value;
  std::string unit;           // "GHz", "MHz", "ns", "us", "rad", "1", "" for non-numeric
  std::vector<std::string> choices;
  std::string help;
};

const std::vector<KeySpec>& config_schema();
const KeySpec& key_spec(const std::string& path);  // ConfigError for unknown keys

class Config {
 public:
  /// Every schema key at its default.
  static Config defaults();
  /// Defaults overlaid with the keys in `text`.
  static Config parse(std::string_view text, const std::string& origin = "<string>");
  static Config load(const std::filesystem::path& path);

  void set(const std::string& path, const std::string& value);
  /// "section.key=value".
  void apply_override(const std::string& assignment);
  /// Replaces entry `index` of a list-valued key.
  void set_element(const std::string& path, std::size_t index, double value);

  const std::string& raw(const std::string& path) const;
  double number(const std::string& path) const;
  std::vector<double> numbers(const std::string& path) const;
  long integer(const std::string& path) const;
  bool flag(const std::string& path) const;
  const std::string& text(const std::string& path) const;

  /// Type-checks every value against the schema.
  void validate() const;
  /// All keys grouped by section, each with its unit as a trailing comment.
  std::string serialize() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Shortest round-trip decimal text of a double ("inf" for infinity).
std::string format_number(double value);

double parse_number(const std::string& text, const std::string& path);
std::vector<double> parse_number_list(const std::string& text, const std::string& path);

}  // namespace transim
