#ifndef WTCONV_CONFIG_HPP
#define WTCONV_CONFIG_HPP

// Run configuration files: a flat "[section]" / "key = value" dialect.
//
//   # comment
//   [layer]
//   channels = 2
//   kernel = 5
//
// Every key must belong to a section. Blank lines and lines starting with
// '#' or ';' are ignored. Keys may not repeat within a section.

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

namespace wtconv {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Allowed keys per section.
using ConfigSchema = std::map<std::string, std::set<std::string>>;

class RunConfig {
 public:
  static RunConfig parse(const std::string& text, const std::string& origin = "<config>");
  static RunConfig load(const std::string& path);

  /// Throws ConfigError naming the first unknown section or key.
  void validate(const ConfigSchema& schema) const;

  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  std::int64_t get_int(const std::string& section, const std::string& key,
                       std::int64_t fallback) const;
  std::uint64_t get_seed(const std::string& section, const std::string& key,
                         std::uint64_t fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  /// The value must be one of `choices`.
  std::string get_choice(const std::string& section, const std::string& key,
                         const std::set<std::string>& choices, const std::string& fallback) const;

  const std::map<std::string, std::map<std::string, std::string>>& sections() const {
    return sections_;
  }

 private:
  const std::string* find(const std::string& section, const std::string& key) const;

  std::string origin_;
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

}  // namespace wtconv

#endif  // WTCONV_CONFIG_HPP
