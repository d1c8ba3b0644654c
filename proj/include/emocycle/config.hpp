#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <openssl/evp.h>

#include "emocycle/date.hpp"
#include "emocycle/error.hpp"

namespace emocycle {

namespace detail {

struct KeySpec {
  const char* key;
  const char* fallback;
  bool path;  // resolved against the config file's directory
};

// Every recognised key with its default. Anything else in a config file is
// rejected so typos surface immediately.
inline const std::vector<KeySpec>& config_keys() {
  static const std::vector<KeySpec> keys = {
      {"run.seed", "1", false},
      {"run.threads", "0", false},
      {"run.strict", "false", false},
      {"run.match", "substring", false},
      {"input.corpus", "", true},
      {"input.dictionary", "", true},
      {"input.series", "", true},
      {"input.column", "auto", false},
      {"input.emotion", "", false},
      {"output.dir", "", true},
      {"filter.enabled", "false", false},
      {"filter.low", "1e-7", false},
      {"filter.high", "1e-2", false},
      {"dominance.threshold", "0.3", false},
      {"exclusions.weekly", "2011-03-09..2011-03-15", false},
      {"exclusions.yearly", "2010-11-01..2011-10-31", false},
      {"cycles.order", "weekly-first", false},
      {"cycles.min_yearly_cycles", "3", false},
      {"spikes.window", "7", false},
      {"spikes.threshold", "150", false},
      {"spikes.return_threshold", "110", false},
      {"calendar.high", "110", false},
      {"calendar.low", "90", false},
      {"calendar.std_max", "15", false},
      {"calendar.min_years", "3", false},
      {"stationarity.mean_tolerance", "0.5", false},
      {"stationarity.ratio_low", "0.5", false},
      {"stationarity.ratio_high", "2.0", false},
      {"acf.max_lag", "365", false},
      {"acf.estimator", "biased", false},
      {"acf.fit_lo", "2", false},
      {"acf.fit_hi", "10", false},
      {"acf.mean_bias_correction", "true", false},
      {"psd.segment", "365", false},
      {"psd.overlap", "0.5", false},
      {"psd.window", "hann", false},
      {"psd.fit_lo", "1/365", false},
      {"psd.fit_hi", "1/14", false},
      {"shuffle.scheme", "weekly", false},
      {"shuffle.repetitions", "10", false},
      {"pca.scheme", "weekly", false},
      {"pca.repetitions", "10", false},
      {"synth.start", "2006-11-01", false},
      {"synth.length", "3653", false},
      {"synth.hurst", "0.75", false},
      {"synth.base_level", "1", false},
      {"synth.noise_scale", "0.1", false},
      {"synth.weekly", "none", false},
      {"synth.spikes", "none", false},
      {"synth_corpus.start", "2006-11-01", false},
      {"synth_corpus.days", "730", false},
      {"synth_corpus.docs_per_day", "100", false},
      {"synth_corpus.hurst", "0.75", false},
      {"synth_corpus.intensity", "0.3", false},
      {"synth_corpus.noise_scale", "0.2", false},
      {"synth_corpus.weekly", "0.8,0.9,1.0,1.0,1.0,1.1,1.2", false},
      {"synth_corpus.filler_tokens", "3", false},
      {"synth_corpus.filler_vocabulary", "1000", false},
  };
  return keys;
}

inline const KeySpec* find_key(std::string_view key) {
  for (const auto& k : config_keys())
    if (key == k.key) return &k;
  return nullptr;
}

inline std::string trim_copy(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace detail

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

inline std::string sha256_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ValidationError(fmt::format("cannot read '{}'", p.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

// Flat `section.key -> value` settings. Unset keys fall back to defaults;
// path-valued keys are stored absolute.
class Config {
 public:
  Config() = default;

  static Config parse(const std::string& text, const std::filesystem::path& base_dir) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
      boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ValidationError(fmt::format("config: {} (line {})", e.message(), e.line()));
    }
    Config c;
    for (const auto& [section, body] : tree) {
      if (!body.data().empty())
        throw ValidationError(fmt::format("config: key '{}' must sit inside a [section]", section));
      for (const auto& [key, value] : body) c.set(section + "." + key, value.data(), base_dir);
    }
    return c;
  }

  static Config load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(fmt::format("cannot open config '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    auto dir = std::filesystem::absolute(path).parent_path();
    return parse(ss.str(), dir);
  }

  // `base_dir` anchors relative paths; empty means the working directory.
  void set(const std::string& key, const std::string& value, const std::filesystem::path& base_dir = {}) {
    const auto* spec = detail::find_key(key);
    if (!spec) throw ValidationError(fmt::format("config: unknown key '{}'", key));
    std::string v = detail::trim_copy(value);
    if (spec->path && !v.empty()) {
      std::vector<std::string> parts;
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ',')) {
        std::filesystem::path p(detail::trim_copy(item));
        if (p.is_relative()) p = (base_dir.empty() ? std::filesystem::current_path() : base_dir) / p;
        parts.push_back(p.lexically_normal().string());
      }
      v.clear();
      for (std::size_t i = 0; i < parts.size(); ++i) v += (i ? "," : "") + parts[i];
    }
    values_[key] = v;
  }

  // `key=value` form used on the command line.
  void set_assignment(const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ValidationError(fmt::format("--set expects key=value, got '{}'", assignment));
    set(detail::trim_copy(assignment.substr(0, eq)), assignment.substr(eq + 1));
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get(const std::string& key) const {
    auto it = values_.find(key);
    if (it != values_.end()) return it->second;
    const auto* spec = detail::find_key(key);
    if (!spec) throw std::logic_error("unregistered config key " + key);
    return spec->fallback;
  }

  double number(const std::string& key) const {
    std::string s = get(key);
    auto slash = s.find('/');
    try {
      if (slash != std::string::npos)
        return parse_double(s.substr(0, slash)) / parse_double(s.substr(slash + 1));
      return parse_double(s);
    } catch (const std::exception&) {
      throw ValidationError(fmt::format("config: {} = '{}' is not a number", key, s));
    }
  }

  std::uint64_t unsigned_integer(const std::string& key) const {
    std::string s = get(key);
    try {
      if (s.empty() || s.front() == '-') throw std::invalid_argument(s);
      std::size_t used = 0;
      auto v = std::stoull(s, &used, 10);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ValidationError(fmt::format("config: {} = '{}' is not a non-negative integer", key, s));
    }
  }

  bool flag(const std::string& key) const {
    std::string s = get(key);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ValidationError(fmt::format("config: {} = '{}' is not a boolean", key, s));
  }

  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    std::stringstream ss(get(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = detail::trim_copy(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    if (get(key) == "none") return out;
    for (const auto& s : list(key)) {
      try {
        out.push_back(parse_double(s));
      } catch (const std::exception&) {
        throw ValidationError(fmt::format("config: {} has non-numeric entry '{}'", key, s));
      }
    }
    return out;
  }

  std::vector<DateWindow> windows(const std::string& key) const {
    std::vector<DateWindow> out;
    if (get(key) == "none") return out;
    for (const auto& s : list(key)) out.push_back(parse_window(s));
    return out;
  }

  Date date(const std::string& key) const {
    auto d = try_parse_date(get(key));
    if (!d) throw ValidationError(fmt::format("config: {} = '{}' is not a YYYY-MM-DD date", key, get(key)));
    return *d;
  }

  // Every key, defaults included, in sorted INI form. Equal configs give
  // equal text, which is what the manifest hash covers.
  std::string serialize(bool with_output = true) const {
    std::map<std::string, std::map<std::string, std::string>> sections;
    for (const auto& k : detail::config_keys()) {
      std::string key = k.key;
      if (!with_output && key.starts_with("output.")) continue;
      auto dot = key.find('.');
      sections[key.substr(0, dot)][key.substr(dot + 1)] = get(key);
    }
    std::string out;
    for (const auto& [section, kv] : sections) {
      out += "[" + section + "]\n";
      for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
      out += "\n";
    }
    return out;
  }

  // Where results are written does not change them, so it is left out.
  std::string hash() const { return sha256_hex(serialize(false)); }

 private:
  static double parse_double(const std::string& s) {
    std::size_t used = 0;
    double v = std::stod(detail::trim_copy(s), &used);
    if (used != detail::trim_copy(s).size()) throw std::invalid_argument(s);
    return v;
  }

  std::map<std::string, std::string> values_;
};

}  // namespace emocycle
