#pragma once

// Experiment configuration: a flat "key = value" text file checked against a
// per-kind schema, with defaults filled in so the resolved copy is
// self-describing.

#include <algorithm>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "alloy/error.hpp"
#include "alloy/geometry.hpp"
#include "alloy/model.hpp"

namespace alloy {

/// Config violates the schema (unknown key, missing key, unparsable value).
class SchemaError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A run would exceed a configured resource limit.
class ResourceError : public Error {
 public:
  using Error::Error;
};

enum class ValueType { integer, real, boolean, text, reals, integers, complex, sites, density };

struct KeySpec {
  std::string name;
  ValueType type;
  std::optional<std::string> fallback;  // empty: required unless optional
  bool optional = false;                // may be absent with no default
};

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"identities", "averaging", "apriori",  "decay",           "criterion",
                                              "wegner",     "twobox",    "eigenloc", "nonlocal-apriori"};
  return kinds;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

inline double to_real(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw SchemaError("key '" + key + "': expected a number, got '" + v + "'");
  }
}

inline long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw SchemaError("key '" + key + "': expected an integer, got '" + v + "'");
  }
}

inline std::vector<std::string> words(const std::string& v) {
  std::vector<std::string> out;
  std::string w;
  std::istringstream is(v);
  while (is >> w) out.push_back(w);
  return out;
}

}  // namespace detail

inline const std::vector<KeySpec>& common_keys() {
  using V = ValueType;
  static const std::vector<KeySpec> keys{
      {"kind", V::text, std::nullopt},
      {"dim", V::integer, "1"},
      {"box", V::integer, "10"},
      {"u", V::reals, "1"},
      {"theta", V::sites, std::nullopt, true},
      {"rho", V::density, "uniform 0 1"},
      {"s", V::real, "0.3"},
      {"z", V::complex, "0 0.01"},
      {"samples", V::integer, "1000"},
      {"seed", V::integer, "1"},
      {"workers", V::integer, "1"},
      {"theorem_mode", V::boolean, "false"},
      {"exploratory", V::boolean, "false"},
      {"max_sites", V::integer, "5000"},
      {"output", V::text, std::nullopt, true},
  };
  return keys;
}

inline std::vector<KeySpec> kind_keys(const std::string& kind) {
  using V = ValueType;
  if (kind == "identities") return {{"cases", V::integer, "100"}, {"tolerance", V::real, "1e-8"}, {"case_sites", V::integer, "300"}};
  if (kind == "averaging")
    return {{"cases", V::integer, "50"}, {"n", V::integer, "3"}, {"kappa", V::real, "1"}, {"slope_tolerance", V::real, "0.1"}};
  if (kind == "apriori")
    return {{"lambdas", V::reals, std::nullopt}, {"pairs", V::sites, std::nullopt, true}, {"part_b", V::boolean, "false"},
            {"tolerance", V::real, "0.15"}};
  if (kind == "decay")
    return {{"lambda", V::real, std::nullopt}, {"distances", V::integers, std::nullopt, true}, {"x", V::sites, std::nullopt, true},
            {"axis", V::integer, "0"}};
  if (kind == "criterion")
    return {{"lambdas", V::reals, std::nullopt}, {"L", V::integer, std::nullopt}, {"B_s", V::real, std::nullopt, true},
            {"x", V::sites, std::nullopt, true}};
  if (kind == "wegner")
    return {{"lambda", V::real, std::nullopt}, {"L", V::integer, "20"}, {"L_alt", V::integer, "0"},
            {"widths", V::reals, "0.2 0.1 0.05 0.025"}, {"center", V::real, "0"}};
  if (kind == "twobox")
    return {{"lambdas", V::reals, std::nullopt}, {"L", V::integer, "6"}, {"a", V::real, "-0.2"}, {"b", V::real, "0.2"},
            {"m", V::real, "0.5"}, {"delta", V::real, "0.01"}};
  if (kind == "eigenloc")
    return {{"lambda", V::real, std::nullopt}, {"L", V::integer, "30"}, {"window", V::reals, std::nullopt, true}};
  if (kind == "nonlocal-apriori")
    return {{"lambdas", V::reals, std::nullopt}, {"x", V::sites, std::nullopt, true}, {"y", V::sites, std::nullopt, true},
            {"tolerance", V::real, "0.1"}};
  throw SchemaError("unknown experiment kind '" + kind + "'");
}

/// Parsed and schema-checked configuration with defaults filled in.
class Config {
 public:
  static Config parse(std::istream& is, const std::string& origin = "<config>") {
    std::map<std::string, std::string> raw;
    std::string line;
    int no = 0;
    while (std::getline(is, line)) {
      ++no;
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      line = detail::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw SchemaError(origin + ":" + std::to_string(no) + ": expected 'key = value'");
      const std::string key = detail::trim(line.substr(0, eq));
      const std::string value = detail::trim(line.substr(eq + 1));
      if (key.empty()) throw SchemaError(origin + ":" + std::to_string(no) + ": empty key");
      if (!raw.emplace(key, value).second) throw SchemaError(origin + ":" + std::to_string(no) + ": duplicate key '" + key + "'");
    }
    return Config(std::move(raw));
  }

  static Config parse_string(const std::string& text) {
    std::istringstream is(text);
    return parse(is);
  }

  static Config load(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read config file " + path.string());
    return parse(f, path.string());
  }

  explicit Config(std::map<std::string, std::string> raw) : values_(std::move(raw)) {
    auto it = values_.find("kind");
    if (it == values_.end()) throw SchemaError("missing required key 'kind'");
    kind_ = it->second;
    std::vector<KeySpec> schema = common_keys();
    for (auto& k : kind_keys(kind_)) schema.push_back(k);
    std::set<std::string> known;
    for (const auto& k : schema) known.insert(k.name);
    for (const auto& [k, v] : values_)
      if (!known.count(k)) throw SchemaError("unknown key '" + k + "' for kind " + kind_);
    for (const auto& k : schema) {
      auto f = values_.find(k.name);
      if (f == values_.end()) {
        if (k.fallback) values_[k.name] = *k.fallback;
        else if (!k.optional) throw SchemaError("missing required key '" + k.name + "' for kind " + kind_);
        else continue;
      }
      check(k);
    }
    validate_ranges();
  }

  const std::string& kind() const noexcept { return kind_; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  std::string text(const std::string& key) const { return at(key); }
  double real(const std::string& key) const { return detail::to_real(key, at(key)); }
  long long integer(const std::string& key) const { return detail::to_int(key, at(key)); }
  bool boolean(const std::string& key) const {
    const auto& v = at(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw SchemaError("key '" + key + "': expected true or false, got '" + v + "'");
  }
  std::vector<double> reals(const std::string& key) const {
    std::vector<double> out;
    std::string v = at(key);
    std::replace(v.begin(), v.end(), ',', ' ');
    for (const auto& w : detail::words(v)) out.push_back(detail::to_real(key, w));
    if (out.empty()) throw SchemaError("key '" + key + "': empty list");
    return out;
  }
  std::vector<int> integers(const std::string& key) const {
    std::vector<int> out;
    for (double x : reals(key)) {
      if (x != std::floor(x)) throw SchemaError("key '" + key + "': expected integers");
      out.push_back(static_cast<int>(x));
    }
    return out;
  }
  std::complex<double> complex(const std::string& key) const {
    std::string v = at(key);
    std::replace(v.begin(), v.end(), ',', ' ');
    const auto w = detail::words(v);
    if (w.size() != 2) throw SchemaError("key '" + key + "': expected 're im'");
    return {detail::to_real(key, w[0]), detail::to_real(key, w[1])};
  }
  /// Sites separated by ';', coordinates by spaces.
  std::vector<Site> sites(const std::string& key) const {
    std::vector<Site> out;
    for (const auto& part : detail::split(at(key), ';')) {
      if (part.empty()) continue;
      std::vector<int> c;
      for (const auto& w : detail::words(part)) c.push_back(static_cast<int>(detail::to_int(key, w)));
      if (static_cast<long long>(c.size()) != integer("dim"))
        throw SchemaError("key '" + key + "': site '" + part + "' does not have " + text("dim") + " coordinates");
      out.push_back(Site::from(c));
    }
    if (out.empty()) throw SchemaError("key '" + key + "': no sites");
    return out;
  }
  DisorderDistribution density(const std::string& key = "rho") const {
    const auto w = detail::words(at(key));
    if (w.empty()) throw SchemaError("key '" + key + "': empty density");
    try {
      if (w[0] == "uniform" && w.size() == 3)
        return DisorderDistribution::uniform(detail::to_real(key, w[1]), detail::to_real(key, w[2]));
      if (w[0] == "triangular" && w.size() == 3)
        return DisorderDistribution::triangular(detail::to_real(key, w[1]), detail::to_real(key, w[2]));
      if (w[0] == "bump" && w.size() == 3)
        return DisorderDistribution::bump(detail::to_real(key, w[1]), detail::to_real(key, w[2]));
      if (w[0] == "table" && w.size() >= 3) {
        std::vector<double> xs, ys;
        for (std::size_t i = 1; i < w.size(); ++i) {
          const auto c = w[i].find(':');
          if (c == std::string::npos) throw SchemaError("key '" + key + "': table entries are x:y");
          xs.push_back(detail::to_real(key, w[i].substr(0, c)));
          ys.push_back(detail::to_real(key, w[i].substr(c + 1)));
        }
        return DisorderDistribution::table(xs, ys);
      }
    } catch (const ModelError& e) {
      throw SchemaError("key '" + key + "': " + e.what());
    }
    throw SchemaError("key '" + key + "': expected 'uniform a b', 'triangular c w', 'bump c w' or 'table x:y ...'");
  }

  /// u values on theta; theta defaults to 0, e_1, 2e_1, ... along the first axis.
  SingleSitePotential potential() const {
    const auto vals = reals("u");
    const int d = static_cast<int>(integer("dim"));
    std::vector<Site> support;
    if (has("theta")) {
      support = sites("theta");
      if (support.size() != vals.size()) throw SchemaError("keys 'u' and 'theta' differ in length");
    } else {
      for (std::size_t i = 0; i < vals.size(); ++i) {
        Site s(d);
        s[0] = static_cast<int>(i);
        support.push_back(s);
      }
    }
    std::vector<std::pair<Site, double>> entries;
    for (std::size_t i = 0; i < vals.size(); ++i) entries.push_back({support[i], vals[i]});
    try {
      return SingleSitePotential(entries);
    } catch (const ModelError& e) {
      throw SchemaError(std::string("single-site potential: ") + e.what());
    }
  }

  /// Canonical text: kind first, then the remaining keys in order.
  std::string resolved_text() const {
    std::ostringstream os;
    os << "kind = " << kind_ << "\n";
    for (const auto& [k, v] : values_)
      if (k != "kind") os << k << " = " << v << "\n";
    return os.str();
  }

 private:
  const std::string& at(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw SchemaError("missing key '" + key + "'");
    return it->second;
  }

  void check(const KeySpec& k) const {
    switch (k.type) {
      case ValueType::integer: (void)integer(k.name); break;
      case ValueType::real: (void)real(k.name); break;
      case ValueType::boolean: (void)boolean(k.name); break;
      case ValueType::text: break;
      case ValueType::reals: (void)reals(k.name); break;
      case ValueType::integers: (void)integers(k.name); break;
      case ValueType::complex: (void)complex(k.name); break;
      case ValueType::sites: (void)sites(k.name); break;
      case ValueType::density: (void)density(k.name); break;
    }
  }

  void validate_ranges() const {
    const auto d = integer("dim");
    if (d < 1 || d > kMaxDim) throw SchemaError("dim must lie in [1, " + std::to_string(kMaxDim) + "]");
    if (integer("box") < 0) throw SchemaError("box must be non-negative");
    if (integer("samples") < 1) throw SchemaError("samples must be positive");
    if (integer("workers") < 1) throw SchemaError("workers must be positive");
    if (integer("seed") < 0) throw SchemaError("seed must be non-negative");
    const double s = real("s");
    if (!(s > 0 && s < 1)) throw SchemaError("s must lie in (0, 1)");
    (void)potential();
  }

  std::string kind_;
  std::map<std::string, std::string> values_;
};

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

}  // namespace alloy
