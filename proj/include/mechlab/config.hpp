#ifndef MECHLAB_CONFIG_HPP
#define MECHLAB_CONFIG_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mechlab/common.hpp"
#include "mechlab/geometry.hpp"

namespace mechlab {

// ---------------------------------------------------------------------------
// Value parsing
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t lo = 0, hi = s.size();
  while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
  while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
  return s.substr(lo, hi - lo);
}

inline std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> words;
  std::istringstream in(s);
  std::string word;
  while (in >> word) words.push_back(word);
  return words;
}

inline double parse_plain_real(const std::string& token) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw ConfigError("not a number: '" + token + "'");
  return value;
}

}  // namespace detail

// Real-number token.  Besides the usual literals, `base^exp` is accepted so
// dyadic values like 2^-100 round-trip exactly (base 2 goes through ldexp).
inline double parse_real_token(const std::string& token) {
  const std::size_t caret = token.find('^');
  if (caret == std::string::npos) return detail::parse_plain_real(token);
  const double base = detail::parse_plain_real(token.substr(0, caret));
  const double exponent = detail::parse_plain_real(token.substr(caret + 1));
  if (exponent != std::floor(exponent))
    throw ConfigError("exponent must be an integer: '" + token + "'");
  if (base == 2.0) return std::ldexp(1.0, static_cast<int>(exponent));
  return std::pow(base, exponent);
}

// ---------------------------------------------------------------------------
// Key/value store
// ---------------------------------------------------------------------------

// Flat map of dotted keys to raw string values.  Typed getters record which
// keys were consumed so a complete experiment build can reject typos.
struct ConfigMap {
  std::map<std::string, std::string> values;
  mutable std::set<std::string> used;

  bool has(const std::string& key) const { return values.count(key) != 0; }

  std::string get_string(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end()) throw ConfigError("missing key: " + key);
    used.insert(key);
    return it->second;
  }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
  }

  double get_real(const std::string& key) const {
    try {
      return parse_real_token(get_string(key));
    } catch (const ConfigError& e) {
      throw ConfigError(key + ": " + e.what());
    }
  }

  double get_real(const std::string& key, double fallback) const {
    return has(key) ? get_real(key) : fallback;
  }

  long get_int(const std::string& key) const {
    const double value = get_real(key);
    if (value != std::floor(value)) throw ConfigError(key + ": expected an integer");
    return static_cast<long>(value);
  }

  long get_int(const std::string& key, long fallback) const {
    return has(key) ? get_int(key) : fallback;
  }

  std::vector<double> get_reals(const std::string& key) const {
    std::vector<double> reals;
    for (const std::string& word : detail::split_words(get_string(key))) {
      try {
        reals.push_back(parse_real_token(word));
      } catch (const ConfigError& e) {
        throw ConfigError(key + ": " + e.what());
      }
    }
    if (reals.empty()) throw ConfigError(key + ": expected at least one number");
    return reals;
  }

  std::vector<std::string> get_words(const std::string& key) const {
    const std::vector<std::string> words = detail::split_words(get_string(key));
    if (words.empty()) throw ConfigError(key + ": expected at least one word");
    return words;
  }

  // Number of consecutive indices 0..n-1 for which `prefix.<i>` exists,
  // either as a key itself or as a further-nested prefix.
  int count_indexed(const std::string& prefix) const {
    int n = 0;
    while (true) {
      const std::string base = prefix + "." + std::to_string(n);
      const auto it = values.lower_bound(base);
      const bool present =
          it != values.end() &&
          (it->first == base ||
           (it->first.size() > base.size() && it->first.compare(0, base.size(), base) == 0 &&
            it->first[base.size()] == '.'));
      if (!present) break;
      ++n;
    }
    return n;
  }

  // After assembly: every key must have been consumed by some getter.
  void ensure_all_used() const {
    for (const auto& [key, value] : values)
      if (used.count(key) == 0) throw ConfigError("unknown key: " + key);
  }
};

// ---------------------------------------------------------------------------
// Text and JSON front ends
// ---------------------------------------------------------------------------

// Plain-text form: one `key = value` per line, '#' starts a comment (whole
// line, or after the value when preceded by whitespace), blank lines ignored.
inline ConfigMap parse_config_text(const std::string& text) {
  ConfigMap cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string stripped = detail::trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = detail::trim(stripped.substr(0, eq));
    std::string value = stripped.substr(eq + 1);
    for (std::size_t i = 0; i + 1 < value.size(); ++i) {
      if (value[i + 1] == '#' && std::isspace(static_cast<unsigned char>(value[i]))) {
        value = value.substr(0, i);
        break;
      }
    }
    value = detail::trim(value);
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (!cfg.values.emplace(key, value).second)
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
  }
  return cfg;
}

namespace detail {

inline void flatten_json(const nlohmann::json& node, const std::string& prefix, ConfigMap& cfg) {
  const auto emit = [&](const std::string& key, std::string value) {
    if (!cfg.values.emplace(key, std::move(value)).second)
      throw ConfigError("duplicate key '" + key + "'");
  };
  if (node.is_object()) {
    for (const auto& [key, child] : node.items())
      flatten_json(child, prefix.empty() ? key : prefix + "." + key, cfg);
    return;
  }
  if (node.is_array()) {
    const bool all_scalar = std::all_of(node.begin(), node.end(), [](const nlohmann::json& c) {
      return c.is_number() || c.is_string() || c.is_boolean();
    });
    if (all_scalar) {
      std::string joined;
      for (const nlohmann::json& child : node) {
        if (!joined.empty()) joined += ' ';
        joined += child.is_string() ? child.get<std::string>() : child.dump();
      }
      emit(prefix, std::move(joined));
    } else {
      int index = 0;
      for (const nlohmann::json& child : node)
        flatten_json(child, prefix + "." + std::to_string(index++), cfg);
    }
    return;
  }
  if (node.is_string()) {
    emit(prefix, node.get<std::string>());
    return;
  }
  if (node.is_null()) {
    emit(prefix, "");
    return;
  }
  emit(prefix, node.dump());
}

}  // namespace detail

// JSON form: the same keys as nested objects; arrays of scalars become
// space-joined lists, arrays of structures become numbered sub-keys.
inline ConfigMap parse_config_json(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("JSON parse error: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("JSON config must be an object");
  ConfigMap cfg;
  detail::flatten_json(root, "", cfg);
  return cfg;
}

inline ConfigMap parse_config(const std::string& text) {
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    return c == '{' ? parse_config_json(text) : parse_config_text(text);
  }
  throw ConfigError("empty config");
}

// ---------------------------------------------------------------------------
// Config-level constraint grammar
// ---------------------------------------------------------------------------

// Allocation reference: a label from the space, or a bare index.
inline int resolve_allocation(const AllocationSpace& space, const std::string& token) {
  for (int a = 0; a < space.size(); ++a)
    if (space.labels[a] == token) return a;
  try {
    const double index = detail::parse_plain_real(token);
    if (index == std::floor(index) && index >= 0.0 && index < space.size())
      return static_cast<int>(index);
  } catch (const ConfigError&) {
  }
  throw ConfigError("unknown allocation '" + token + "'");
}

// Linear row: `[coef*]alloc (+|-) [coef*]alloc ... (<=|>=|==) bound`,
// whitespace-separated, e.g. "g0 + 2*g1 <= 6".
inline LinearConstraint parse_constraint_row(const AllocationSpace& space,
                                             const std::string& text) {
  const std::vector<std::string> words = detail::split_words(text);
  LinearConstraint row;
  double sign = 1.0;
  bool saw_rel = false;
  std::size_t w = 0;
  for (; w < words.size(); ++w) {
    const std::string& word = words[w];
    if (word == "<=" || word == ">=" || word == "==") {
      row.rel = word == "<=" ? Relation::LessEq
                             : (word == ">=" ? Relation::GreaterEq : Relation::Equal);
      saw_rel = true;
      ++w;
      break;
    }
    if (word == "+") {
      sign = 1.0;
      continue;
    }
    if (word == "-") {
      sign = -1.0;
      continue;
    }
    double coef = sign;
    std::string alloc_token = word;
    const std::size_t star = word.find('*');
    if (star != std::string::npos) {
      coef = sign * parse_real_token(word.substr(0, star));
      alloc_token = word.substr(star + 1);
    }
    row.coeffs[resolve_allocation(space, alloc_token)] += coef;
    sign = 1.0;
  }
  if (!saw_rel || w + 1 != words.size())
    throw ConfigError("constraint row '" + text + "': expected 'terms (<=|>=|==) bound'");
  if (row.coeffs.empty())
    throw ConfigError("constraint row '" + text + "': no terms");
  row.bound = parse_real_token(words[w]);
  return row;
}

}  // namespace mechlab

#endif  // MECHLAB_CONFIG_HPP
