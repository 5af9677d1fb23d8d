#include "radarsr/kv_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>

#include "radarsr/errors.hpp"

namespace radarsr {

namespace pt = boost::property_tree;

namespace {

template <typename T>
T convert(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last) {
    throw ValidationError("config key '" + key + "': cannot parse '" + text + "'");
  }
  return value;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& is) {
  KeyValueConfig cfg;
  try {
    pt::read_ini(is, cfg.tree_);
  } catch (const pt::ini_parser_error& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open config '" + path.string() + "'");
  return parse(is);
}

void KeyValueConfig::write(std::ostream& os) const { pt::write_ini(os, tree_); }

void KeyValueConfig::save(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  write(os);
}

bool KeyValueConfig::has(const std::string& key) const { return raw(key).has_value(); }

std::optional<std::string> KeyValueConfig::raw(const std::string& key) const {
  const auto node = tree_.get_child_optional(key);
  if (!node || !node->empty()) return std::nullopt;
  return node->data();
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  return raw(key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto text = raw(key);
  return text ? convert<double>(key, *text) : fallback;
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
  const auto text = raw(key);
  return text ? convert<long long>(key, *text) : fallback;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto text = raw(key);
  if (!text) return fallback;
  if (*text == "true" || *text == "1" || *text == "yes") return true;
  if (*text == "false" || *text == "0" || *text == "no") return false;
  throw ValidationError("config key '" + key + "': expected a boolean, got '" + *text + "'");
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  const auto text = raw(key);
  if (!text) return fallback;
  std::vector<double> out;
  std::istringstream ss(*text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    std::istringstream ts(token);
    std::string trimmed;
    while (ts >> trimmed) out.push_back(convert<double>(key, trimmed));
  }
  return out;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) { tree_.put(key, value); }

void KeyValueConfig::set(const std::string& key, double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  tree_.put(key, std::string(buf, res.ptr));
}

void KeyValueConfig::set(const std::string& key, long long value) { tree_.put(key, std::to_string(value)); }

void KeyValueConfig::set(const std::string& key, bool value) { tree_.put(key, value ? "true" : "false"); }

void KeyValueConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ValidationError("override '" + assignment + "' is not key=value");
  set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

std::vector<std::string> KeyValueConfig::keys() const {
  std::vector<std::string> out;
  for (const auto& [name, node] : tree_) {
    if (node.empty()) {
      out.push_back(name);
    } else {
      for (const auto& [sub, leaf] : node) out.push_back(name + "." + sub);
    }
  }
  return out;
}

}  // namespace radarsr
