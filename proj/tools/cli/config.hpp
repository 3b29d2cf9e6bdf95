#pragma once

#include <map>
#include <string>
#include <vector>

namespace kgstab::cli {

enum class ValueType { real, integer, boolean, text };

struct OptionSpec {
  std::string key;
  std::string default_value;
  ValueType type;
  std::string help;
};

// Every key understood by the runner, with defaults.
const std::vector<OptionSpec>& option_schema();
const OptionSpec* find_option(const std::string& key);

// Flat key -> value configuration. Values are kept as text and converted on
// access, so a resolved config can be written out and read back unchanged.
class Config {
 public:
  Config() = default;

  static Config defaults();
  // "key = value" lines, '#' starts a comment.
  static Config parse_text(const std::string& text, const std::string& origin = "<text>");
  // A summary JSON (reads its "config" object) or a key = value file.
  static Config load_file(const std::string& path);

  // Later sources win.
  void merge(const Config& other);
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  double real(const std::string& key) const;
  long integer(const std::string& key) const;
  bool boolean(const std::string& key) const;
  const std::string& text(const std::string& key) const;
  std::vector<double> real_list(const std::string& key) const;

  // Numeric parse with the error reported against key.
  static double to_real(const std::string& key, const std::string& value);

  const std::map<std::string, std::string>& values() const { return values_; }

  // JSON object of all values: booleans typed, everything else as the exact
  // text the run used.
  std::string to_json_object() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace kgstab::cli
