#include "wtconv/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace wtconv {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail("empty section name");
      cfg.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    if (section.empty()) fail("key outside of any [section]");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail("empty key");
    if (!cfg.sections_[section].emplace(key, value).second)
      fail("duplicate key '" + key + "' in [" + section + "]");
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

void RunConfig::validate(const ConfigSchema& schema) const {
  for (const auto& [section, keys] : sections_) {
    const auto it = schema.find(section);
    if (it == schema.end()) throw ConfigError(origin_ + ": unknown section [" + section + "]");
    for (const auto& [key, value] : keys)
      if (!it->second.count(key))
        throw ConfigError(origin_ + ": unknown key '" + key + "' in [" + section + "]");
  }
}

const std::string* RunConfig::find(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return nullptr;
  const auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

bool RunConfig::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

std::string RunConfig::get_string(const std::string& section, const std::string& key,
                                  const std::string& fallback) const {
  const std::string* v = find(section, key);
  return v ? *v : fallback;
}

std::int64_t RunConfig::get_int(const std::string& section, const std::string& key,
                                std::int64_t fallback) const {
  const std::string* v = find(section, key);
  if (!v) return fallback;
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || ptr != v->data() + v->size())
    throw ConfigError(origin_ + ": [" + section + "] " + key + " = '" + *v +
                      "' is not an integer");
  return out;
}

std::uint64_t RunConfig::get_seed(const std::string& section, const std::string& key,
                                  std::uint64_t fallback) const {
  const std::string* v = find(section, key);
  if (!v) return fallback;
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || ptr != v->data() + v->size())
    throw ConfigError(origin_ + ": [" + section + "] " + key + " = '" + *v +
                      "' is not an unsigned integer");
  return out;
}

double RunConfig::get_double(const std::string& section, const std::string& key,
                             double fallback) const {
  const std::string* v = find(section, key);
  if (!v) return fallback;
  double out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || ptr != v->data() + v->size() || !std::isfinite(out))
    throw ConfigError(origin_ + ": [" + section + "] " + key + " = '" + *v +
                      "' is not a finite number");
  return out;
}

std::string RunConfig::get_choice(const std::string& section, const std::string& key,
                                  const std::set<std::string>& choices,
                                  const std::string& fallback) const {
  const std::string v = get_string(section, key, fallback);
  if (!choices.count(v)) {
    std::string allowed;
    for (const auto& c : choices) allowed += (allowed.empty() ? "" : ", ") + c;
    throw ConfigError(origin_ + ": [" + section + "] " + key + " = '" + v +
                      "' must be one of: " + allowed);
  }
  return v;
}

}  // namespace wtconv
