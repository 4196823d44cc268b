#pragma once

#include <map>
#include <string>
#include <vector>

namespace kfadmm {

/// Flat key = value configuration with [section] headers. Keys are stored
/// as "section.key" ("" section for keys before any header). '#' and ';'
/// start comments; whitespace around keys and values is trimmed.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  /// Typed getters; the key name is included in any error. The _or forms
  /// fall back to the default when the key is absent (but still throw on a
  /// malformed present value).
  std::string get_str(const std::string& key) const;
  std::string get_str_or(const std::string& key, const std::string& dflt) const;
  double get_num(const std::string& key) const;
  double get_num_or(const std::string& key, double dflt) const;
  long get_int(const std::string& key) const;
  long get_int_or(const std::string& key, long dflt) const;
  bool get_bool_or(const std::string& key, bool dflt) const;

  const std::map<std::string, std::string>& items() const { return items_; }

  /// Serialized form with keys grouped back under their sections, suitable
  /// for re-parsing; used to write the resolved config next to run outputs.
  std::string to_text() const;
  void write_file(const std::string& path) const;

 private:
  std::map<std::string, std::string> items_;
};

}  // namespace kfadmm
