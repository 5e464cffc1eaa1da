#pragma once
// Experiment configs: one `key = value` per line, '#' starts a comment. Every
// key is declared in config_schema(); unknown keys and malformed values are
// rejected with the offending line before anything is computed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "nlkpp/core/error.hpp"
#include "nlkpp/core/expression.hpp"

namespace nlkpp {

enum class ValueType { text, choice, real, integer, boolean, list, expression };

struct KeySpec {
  std::string name;
  ValueType type;
  std::string fallback;
  std::string help;
  std::vector<std::string> choices{};
};

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"eigen",          "periodic-solution", "sweep-D", "sweep-sigma",
                                              "critical-sigma", "maxprin",           "consistency", "hypotheses"};
  return kinds;
}

inline const std::vector<KeySpec>& config_schema() {
  using V = ValueType;
  static const std::vector<KeySpec> schema{
      {"experiment", V::choice, "", "experiment kind", experiment_kinds()},
      // Problem.
      {"dimension", V::integer, "1", "spatial dimension (1 or 2)"},
      {"domain", V::list, "-1,1", "lo,hi in 1D; xlo,xhi,ylo,yhi in 2D"},
      {"topology", V::choice, "hostile", "hostile (no exterior) or torus (periodic)", {"hostile", "torus"}},
      {"kernel", V::choice, "triangular", "kernel profile", {"triangular", "uniform", "cosine", "custom"}},
      {"kernel_expr", V::expression, "", "custom kernel in z (1D offset) or r = |z|; normalized to unit mass"},
      {"kernel_radius", V::real, "1", "support radius of a custom kernel"},
      {"a", V::expression, "2 - x^2", "growth coefficient a(t, x, y); T is available as a constant"},
      {"b", V::expression, "1", "crowding coefficient b(t, x, y) of the logistic family"},
      {"nonlinearity", V::choice, "logistic", "reaction family", {"logistic", "linear"}},
      {"T", V::real, "1", "period"},
      {"D", V::real, "1", "dispersal rate"},
      {"sigma", V::real, "1", "dispersal range"},
      {"m", V::real, "0", "cost exponent"},
      {"resolution", V::integer, "201", "nodes per axis"},
      {"time_samples", V::integer, "64", "samples per period"},
      // Numerics.
      {"eigen_tol", V::real, "1e-10", "eigenvalue increment tolerance"},
      {"residual_tol", V::real, "1e-6", "eigenpair residual tolerance"},
      {"seed", V::integer, "1", "random seed"},
      {"threads", V::integer, "1", "worker threads"},
      {"output", V::text, "", "output directory"},
      // Sweeps.
      {"D_values", V::list, "0.001,0.01,0.1,1,10,100", "sweep-D: increasing D list"},
      {"sigma_values", V::list, "0.05,0.1,0.2,0.5,1,2,5,10,50", "sweep-sigma: increasing sigma list"},
      {"co_refine", V::boolean, "true", "sweep-sigma: refine h with sigma"},
      {"solutions", V::boolean, "false", "sweeps: also compute u*"},
      {"monotone_check", V::boolean, "false", "sweep-sigma: check sigma-monotonicity (needs m = 0, radial a)"},
      {"mono_tol", V::real, "1e-6", "sigma-monotonicity tolerance"},
      {"tail", V::integer, "3", "points in each tail-monotonicity verdict"},
      {"assert_tails", V::choice, "both", "sweep-sigma: which tail verdicts are assertions", {"both", "small", "large", "none"}},
      // critical-sigma.
      {"sigma_lo", V::real, "0.1", "critical-sigma: lower bracket"},
      {"sigma_hi", V::real, "10", "critical-sigma: upper bracket"},
      {"lambda_tol", V::real, "1e-4", "critical-sigma: |lambda1| at the root"},
      {"probe_fractions", V::list, "", "critical-sigma: sigma/sigma* values for the u* probe"},
      // periodic-solution.
      {"M_factor", V::real, "2", "periodic-solution: upper start M = factor * S"},
      // maxprin.
      {"lambda_targets", V::list, "-0.5,-0.3,-0.1,0,0.1,0.3,0.5", "maxprin: shift a so lambda1 hits each value"},
      {"band", V::real, "0.05", "maxprin: near-critical half-width"},
      {"instances", V::integer, "100", "maxprin: admissible instances per member"},
      {"mp_slack", V::real, "1e-8", "maxprin: hypothesis slack"},
      // consistency.
      {"consistency_sigmas", V::list, "0.2,0.1,0.05", "consistency: sigma list"},
      {"field", V::choice, "sin", "consistency: smooth test field", {"sin", "linear", "quadratic"}},
      {"order_min", V::real, "1.8", "consistency: minimum observed order"},
      {"nodes_per_support", V::real, "512", "consistency: sigma gamma / h"},
  };
  return schema;
}

inline const KeySpec* find_key(const std::string& name) {
  for (const auto& k : config_schema())
    if (k.name == name) return &k;
  return nullptr;
}

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1])});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline bool parse_real(const std::string& s, double& out) {
  std::istringstream is(s);
  is.imbue(std::locale::classic());
  is >> out;
  return !is.fail() && is.eof() && std::isfinite(out);
}

inline bool parse_integer(const std::string& s, long long& out) {
  if (s.empty()) return false;
  std::size_t pos = 0;
  try {
    out = std::stoll(s, &pos);
  } catch (...) {
    return false;
  }
  return pos == s.size();
}

inline bool parse_list(const std::string& s, std::vector<double>& out) {
  out.clear();
  if (trim(s).empty()) return true;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v;
    if (!parse_real(trim(item), v)) return false;
    out.push_back(v);
  }
  return true;
}

}  // namespace detail

class ExperimentConfig {
 public:
  /// Parses config text; `origin` names the source in diagnostics.
  static ExperimentConfig parse(const std::string& text, const std::string& origin = "config") {
    ExperimentConfig c;
    c.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string::npos) c.fail(lineno, "expected 'key = value', got '" + line + "'");
      std::string key = detail::trim(line.substr(0, eq));
      std::string value = detail::trim(line.substr(eq + 1));
      c.set(key, value, lineno);
    }
    if (!c.values_.count("experiment")) c.fail(0, "missing required key 'experiment'");
    return c;
  }

  static ExperimentConfig load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), path);
  }

  /// Sets or overrides a key with full validation.
  void set(const std::string& key, const std::string& value, int lineno = 0) {
    const KeySpec* spec = find_key(key);
    if (!spec) {
      std::string best;
      std::size_t dist = 3;
      for (const auto& k : config_schema()) {
        auto d = detail::edit_distance(key, k.name);
        if (d < dist) dist = d, best = k.name;
      }
      fail(lineno, "unknown key '" + key + "'" + (best.empty() ? "" : " (did you mean '" + best + "'?)"));
    }
    if (lines_.count(key) && lineno > 0) fail(lineno, "duplicate key '" + key + "'");
    validate(*spec, value, lineno);
    values_[key] = value;
    lines_[key] = lineno;
  }

  std::string kind() const { return text("experiment"); }
  const std::string& origin() const { return origin_; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string text(const std::string& key) const { return raw(key); }
  double real(const std::string& key) const {
    double v = 0.0;
    detail::parse_real(raw(key), v);
    return v;
  }
  long long integer(const std::string& key) const {
    long long v = 0;
    detail::parse_integer(raw(key), v);
    return v;
  }
  bool boolean(const std::string& key) const { return raw(key) == "true"; }
  std::vector<double> list(const std::string& key) const {
    std::vector<double> v;
    detail::parse_list(raw(key), v);
    return v;
  }

  /// Sorted explicit `key=value` lines; the basis of the provenance hash.
  std::string canonical() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
    return out;
  }

  const std::map<std::string, std::string>& explicit_values() const { return values_; }

 private:
  std::string raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it != values_.end()) return it->second;
    const KeySpec* spec = find_key(key);
    if (!spec) throw ConfigError("internal: undeclared key '" + key + "'");
    return spec->fallback;
  }

  [[noreturn]] void fail(int lineno, const std::string& msg) const {
    throw ConfigError(origin_ + (lineno > 0 ? ":" + std::to_string(lineno) : std::string()) + ": " + msg);
  }

  void validate(const KeySpec& spec, const std::string& value, int lineno) const {
    auto bad = [&](const std::string& what) { fail(lineno, "key '" + spec.name + "': " + what); };
    switch (spec.type) {
      case ValueType::text: break;
      case ValueType::choice:
        if (std::find(spec.choices.begin(), spec.choices.end(), value) == spec.choices.end()) {
          std::string all;
          for (const auto& c : spec.choices) all += (all.empty() ? "" : ", ") + c;
          bad("'" + value + "' is not one of " + all);
        }
        break;
      case ValueType::real: {
        double v;
        if (!detail::parse_real(value, v)) bad("'" + value + "' is not a finite number");
        break;
      }
      case ValueType::integer: {
        long long v;
        if (!detail::parse_integer(value, v)) bad("'" + value + "' is not an integer");
        break;
      }
      case ValueType::boolean:
        if (value != "true" && value != "false") bad("expected true or false");
        break;
      case ValueType::list: {
        std::vector<double> v;
        if (!detail::parse_list(value, v)) bad("'" + value + "' is not a comma-separated list of numbers");
        break;
      }
      case ValueType::expression:
        try {
          Expression::parse(value, {{"T", 1.0}});
        } catch (const ConfigError& e) {
          bad(e.what());
        }
        break;
    }
  }

  std::string origin_;
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
};

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

}  // namespace nlkpp
