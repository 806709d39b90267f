#pragma once

// Flat key=value scenario configuration and the flux/entropy spec grammars.

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "entrolab/entropy.hpp"
#include "entrolab/errors.hpp"
#include "entrolab/flux.hpp"
#include "entrolab/numerics.hpp"

namespace entrolab {

inline constexpr const char* kFluxGrammar = "burgers | power:beta=<float> | poly:<c0,c1,...,cn> | exp";
inline constexpr const char* kEntropyGrammar = "quadratic | poly:<c0,c1,...,cn>";

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

inline double parse_double(std::string_view text, std::string_view what) {
  const std::string s = trim(text);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(std::string(what) + ": cannot parse '" + s + "' as a number");
  }
  return v;
}

inline std::vector<double> parse_list(std::string_view text, std::string_view what) {
  std::vector<double> out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) out.push_back(parse_double(item, what));
  if (out.empty()) throw ConfigError(std::string(what) + ": empty list");
  return out;
}

}  // namespace detail

/// Parses a flux spec; domain overrides the family default when given.
inline FluxFunction parse_flux(const std::string& spec, std::optional<Interval> domain = std::nullopt) {
  const std::string s = detail::trim(spec);
  auto fail = [&] { return ConfigError("unknown flux spec '" + s + "'; expected " + kFluxGrammar); };
  try {
    if (s == "burgers") return domain ? FluxFunction::burgers(*domain) : FluxFunction::burgers();
    if (s == "exp") return domain ? FluxFunction::exponential(*domain) : FluxFunction::exponential();
    if (s.rfind("power:beta=", 0) == 0) {
      const double beta = detail::parse_double(s.substr(11), "power flux beta");
      return domain ? FluxFunction::power(beta, *domain) : FluxFunction::power(beta);
    }
    if (s.rfind("poly:", 0) == 0) {
      auto c = detail::parse_list(s.substr(5), "polynomial flux coefficients");
      return domain ? FluxFunction::polynomial(std::move(c), *domain) : FluxFunction::polynomial(std::move(c));
    }
  } catch (const DomainError& e) {
    throw ConfigError("flux spec '" + s + "': " + e.what());
  }
  throw fail();
}

inline Entropy parse_entropy(const std::string& spec) {
  const std::string s = detail::trim(spec);
  if (s == "quadratic") return Entropy::quadratic();
  if (s.rfind("poly:", 0) == 0) return Entropy::polynomial(detail::parse_list(s.substr(5), "entropy coefficients"));
  throw ConfigError("unknown entropy spec '" + s + "'; expected " + kEntropyGrammar);
}

/// key=value pairs. Lines may carry '#' comments; a "[name]" line prefixes the
/// following keys with "name.".
class Config {
 public:
  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    load_text(buf.str(), path);
  }

  void load_text(const std::string& text, const std::string& origin = "<text>") {
    std::istringstream in(text);
    std::string line, section;
    int number = 0;
    while (std::getline(in, line)) {
      ++number;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError(origin + ":" + std::to_string(number) + ": bad section header");
        section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(origin + ":" + std::to_string(number) + ": expected key=value");
      }
      std::string key = detail::trim(std::string_view(line).substr(0, eq));
      if (!section.empty()) key = section + "." + key;
      values_[key] = detail::trim(std::string_view(line).substr(eq + 1));
    }
  }

  /// Applies a "key=value" override.
  void set(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
    values_[detail::trim(std::string_view(assignment).substr(0, eq))] =
        detail::trim(std::string_view(assignment).substr(eq + 1));
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string str(const std::string& key, const std::string& fallback) {
    auto it = values_.find(key);
    if (it != values_.end()) return it->second;
    values_[key] = fallback;
    return fallback;
  }

  std::string str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
    return it->second;
  }

  /// Reads a number, recording the fallback so that reports show it.
  double num(const std::string& key, double fallback) {
    auto it = values_.find(key);
    if (it == values_.end()) {
      std::ostringstream os;
      os.precision(17);
      os << fallback;
      values_[key] = os.str();
      return fallback;
    }
    return detail::parse_double(it->second, key);
  }

  double num(const std::string& key) const { return detail::parse_double(str(key), key); }

  int integer(const std::string& key, int fallback) {
    const double v = num(key, fallback);
    if (v != static_cast<int>(v)) throw ConfigError(key + ": expected an integer");
    return static_cast<int>(v);
  }

  std::vector<double> list(const std::string& key) const { return detail::parse_list(str(key), key); }

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace entrolab
