#include "kfadmm/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kfadmm {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string strip_comment(const std::string& line) {
  for (std::size_t i = 0; i < line.size(); ++i)
    if (line[i] == '#' || line[i] == ';') return line.substr(0, i);
  return line;
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config: unterminated section at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: expected key = value at line " + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw std::runtime_error("config: empty key at line " + std::to_string(lineno));
    const std::string full = section.empty() ? key : section + "." + key;
    cfg.items_[full] = trim(line.substr(eq + 1));
  }
  return cfg;
}

bool Config::has(const std::string& key) const { return items_.count(key) != 0; }

void Config::set(const std::string& key, const std::string& value) { items_[key] = value; }

std::string Config::get_str(const std::string& key) const {
  auto it = items_.find(key);
  if (it == items_.end()) throw std::runtime_error("config: missing key '" + key + "'");
  return it->second;
}

std::string Config::get_str_or(const std::string& key, const std::string& dflt) const {
  auto it = items_.find(key);
  return it == items_.end() ? dflt : it->second;
}

double Config::get_num(const std::string& key) const {
  const std::string s = get_str(key);
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (trim(s.substr(pos)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw std::runtime_error("config: key '" + key + "' is not a number: '" + s + "'");
}

double Config::get_num_or(const std::string& key, double dflt) const {
  return has(key) ? get_num(key) : dflt;
}

long Config::get_int(const std::string& key) const {
  const std::string s = get_str(key);
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (trim(s.substr(pos)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw std::runtime_error("config: key '" + key + "' is not an integer: '" + s + "'");
}

long Config::get_int_or(const std::string& key, long dflt) const {
  return has(key) ? get_int(key) : dflt;
}

bool Config::get_bool_or(const std::string& key, bool dflt) const {
  if (!has(key)) return dflt;
  const std::string s = get_str(key);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw std::runtime_error("config: key '" + key + "' is not a boolean: '" + s + "'");
}

std::string Config::to_text() const {
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> groups;
  for (const auto& [full, value] : items_) {
    const std::size_t dot = full.find('.');
    const std::string sec = dot == std::string::npos ? "" : full.substr(0, dot);
    const std::string key = dot == std::string::npos ? full : full.substr(dot + 1);
    groups[sec].emplace_back(key, value);
  }
  std::ostringstream out;
  bool first = true;
  for (const auto& [sec, kvs] : groups) {
    if (!first) out << "\n";
    first = false;
    if (!sec.empty()) out << "[" << sec << "]\n";
    for (const auto& [key, value] : kvs) out << key << " = " << value << "\n";
  }
  return out.str();
}

void Config::write_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("config: cannot write " + path);
  out << to_text();
}

}  // namespace kfadmm
