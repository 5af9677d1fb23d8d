#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

namespace radarsr {

/// Plain-text key/value file with optional [section] headers. Keys are
/// addressed as "section.key"; keys before any header live at top level.
/// Insertion order is preserved on write, so outputs are byte-stable.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& is);
  static KeyValueConfig load(const std::filesystem::path& path);
  void write(std::ostream& os) const;
  void save(const std::filesystem::path& path) const;

  bool has(const std::string& key) const;
  std::optional<std::string> raw(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;

  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, long long value);
  void set(const std::string& key, int value) { set(key, static_cast<long long>(value)); }
  void set(const std::string& key, bool value);
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }

  /// Applies "section.key=value" overrides (e.g. from the command line).
  void apply_override(const std::string& assignment);

  std::vector<std::string> keys() const;

 private:
  boost::property_tree::ptree tree_;
};

}  // namespace radarsr
