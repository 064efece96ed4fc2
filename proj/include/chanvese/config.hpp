#pragma once

// Run configuration for the command-line tool.
//
// Precedence: command-line flags override config-file values, which override
// the defaults below. The config file is a flat JSON object whose keys are
// the RunConfig field names; unknown keys are rejected.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "chanvese/cvloss.hpp"
#include "chanvese/levelset.hpp"
#include "chanvese/netpbm.hpp"
#include "chanvese/preprocess.hpp"
#include "chanvese/rgb_pipeline.hpp"

namespace chanvese {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::filesystem::path input;
  std::filesystem::path outdir = ".";
  CvParams cv;
  double radius = 0.0;  // initial circle radius; 0 means min(rows, cols) / 4

  std::optional<NoiseSpec::Kind> noise;    // segment: optional corruption
  std::optional<FilterSpec::Kind> filter;  // segment: optional denoising
  NoiseSpec noise_spec;
  FilterSpec filter_spec;

  AggregationRule rule = AggregationRule::Majority;

  LossParams loss;
  double lr = 1000.0;
  int steps = 200;
  int probes = 100;

  std::uint64_t seed = 42;
  bool emit_trace = false;

  void validate() const {
    try {
      cv.validate();
      noise_spec.validate();
      FilterSpec g = filter_spec, m = filter_spec;
      g.kind = FilterSpec::Kind::Gaussian;
      m.kind = FilterSpec::Kind::Median;
      g.validate();
      m.validate();
      loss.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (radius < 0.0) throw ConfigError("radius: must be >= 0");
    if (!(lr > 0.0)) throw ConfigError("lr: must be > 0");
    if (steps < 0) throw ConfigError("steps: must be >= 0");
    if (probes < 0) throw ConfigError("probes: must be >= 0");
  }
};

namespace detail {

using ConfigValue = std::variant<double, long long, std::string, bool>;

enum class FieldType { Real, Integer, Text, Flag };

struct FieldSpec {
  const char* key;
  FieldType type;
  std::function<void(RunConfig&, const ConfigValue&)> apply;
};

template <typename T>
T as(const ConfigValue& v) {
  return std::get<T>(v);
}

inline int as_int(const char* key, const ConfigValue& v) {
  const long long x = std::get<long long>(v);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw ConfigError(std::string(key) + ": out of range");
  }
  return static_cast<int>(x);
}

inline std::optional<NoiseSpec::Kind> parse_noise_kind(const std::string& s) {
  if (s == "none") return std::nullopt;
  if (s == "gaussian") return NoiseSpec::Kind::Gaussian;
  if (s == "salt_pepper" || s == "sp") return NoiseSpec::Kind::SaltPepper;
  throw ConfigError("noise: expected none, gaussian or salt_pepper, got '" + s + "'");
}

inline std::optional<FilterSpec::Kind> parse_filter_kind(const std::string& s) {
  if (s == "none") return std::nullopt;
  if (s == "gaussian") return FilterSpec::Kind::Gaussian;
  if (s == "median") return FilterSpec::Kind::Median;
  throw ConfigError("filter: expected none, gaussian or median, got '" + s + "'");
}

inline const std::vector<FieldSpec>& field_table() {
  using T = FieldType;
  static const std::vector<FieldSpec> table = {
      {"input", T::Text, [](RunConfig& c, const ConfigValue& v) { c.input = as<std::string>(v); }},
      {"outdir", T::Text, [](RunConfig& c, const ConfigValue& v) { c.outdir = as<std::string>(v); }},
      {"mu", T::Real, [](RunConfig& c, const ConfigValue& v) { c.cv.mu = as<double>(v); }},
      {"nu", T::Real, [](RunConfig& c, const ConfigValue& v) { c.cv.nu = as<double>(v); }},
      {"lambda1", T::Real, [](RunConfig& c, const ConfigValue& v) { c.cv.lambda1 = c.loss.lambda1 = as<double>(v); }},
      {"lambda2", T::Real, [](RunConfig& c, const ConfigValue& v) { c.cv.lambda2 = c.loss.lambda2 = as<double>(v); }},
      {"dt", T::Real, [](RunConfig& c, const ConfigValue& v) { c.cv.dt = as<double>(v); }},
      {"eps", T::Real, [](RunConfig& c, const ConfigValue& v) { c.cv.eps = as<double>(v); }},
      {"h", T::Real, [](RunConfig& c, const ConfigValue& v) { c.cv.h = as<double>(v); }},
      {"stationary_fraction", T::Real,
       [](RunConfig& c, const ConfigValue& v) { c.cv.stationary_fraction = as<double>(v); }},
      {"max_iters", T::Integer, [](RunConfig& c, const ConfigValue& v) { c.cv.max_iters = as_int("max_iters", v); }},
      {"reinit_every", T::Integer,
       [](RunConfig& c, const ConfigValue& v) { c.cv.reinit_every = as_int("reinit_every", v); }},
      {"reinit_steps", T::Integer,
       [](RunConfig& c, const ConfigValue& v) { c.cv.reinit_steps = as_int("reinit_steps", v); }},
      {"radius", T::Real, [](RunConfig& c, const ConfigValue& v) { c.radius = as<double>(v); }},
      {"noise", T::Text, [](RunConfig& c, const ConfigValue& v) { c.noise = parse_noise_kind(as<std::string>(v)); }},
      {"noise_mean", T::Real, [](RunConfig& c, const ConfigValue& v) { c.noise_spec.mean = as<double>(v); }},
      {"sigma", T::Real, [](RunConfig& c, const ConfigValue& v) { c.noise_spec.sigma = as<double>(v); }},
      {"amount", T::Real, [](RunConfig& c, const ConfigValue& v) { c.noise_spec.amount = as<double>(v); }},
      {"salt_ratio", T::Real, [](RunConfig& c, const ConfigValue& v) { c.noise_spec.salt_ratio = as<double>(v); }},
      {"filter", T::Text,
       [](RunConfig& c, const ConfigValue& v) { c.filter = parse_filter_kind(as<std::string>(v)); }},
      {"filter_sigma", T::Real, [](RunConfig& c, const ConfigValue& v) { c.filter_spec.sigma = as<double>(v); }},
      {"kernel_size", T::Integer,
       [](RunConfig& c, const ConfigValue& v) { c.filter_spec.kernel_size = as_int("kernel_size", v); }},
      {"window", T::Integer, [](RunConfig& c, const ConfigValue& v) { c.filter_spec.window = as_int("window", v); }},
      {"rule", T::Text,
       [](RunConfig& c, const ConfigValue& v) {
         try {
           c.rule = parse_rule(as<std::string>(v));
         } catch (const std::invalid_argument& e) {
           throw ConfigError(e.what());
         }
       }},
      {"mu_smooth", T::Real, [](RunConfig& c, const ConfigValue& v) { c.loss.mu_smooth = as<double>(v); }},
      {"eps_tanh", T::Real, [](RunConfig& c, const ConfigValue& v) { c.loss.eps_tanh = as<double>(v); }},
      {"lr", T::Real, [](RunConfig& c, const ConfigValue& v) { c.lr = as<double>(v); }},
      {"steps", T::Integer, [](RunConfig& c, const ConfigValue& v) { c.steps = as_int("steps", v); }},
      {"probes", T::Integer, [](RunConfig& c, const ConfigValue& v) { c.probes = as_int("probes", v); }},
      {"seed", T::Integer,
       [](RunConfig& c, const ConfigValue& v) {
         const long long s = std::get<long long>(v);
         if (s < 0) throw ConfigError("seed: must be >= 0");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"trace", T::Flag, [](RunConfig& c, const ConfigValue& v) { c.emit_trace = as<bool>(v); }},
  };
  return table;
}

inline std::string flag_name(const char* key) {
  std::string flag = "--";
  for (const char* p = key; *p; ++p) flag += *p == '_' ? '-' : *p;
  return flag;
}

inline ConfigValue from_json(const FieldSpec& f, const nlohmann::json& j) {
  const std::string key = f.key;
  switch (f.type) {
    case FieldType::Real:
      if (!j.is_number()) throw ConfigError(key + ": expected a number");
      return j.get<double>();
    case FieldType::Integer:
      if (!j.is_number_integer()) throw ConfigError(key + ": expected an integer");
      return j.get<long long>();
    case FieldType::Text:
      if (!j.is_string()) throw ConfigError(key + ": expected a string");
      return j.get<std::string>();
    case FieldType::Flag:
      if (!j.is_boolean()) throw ConfigError(key + ": expected true or false");
      return j.get<bool>();
  }
  throw ConfigError(key + ": unsupported type");
}

inline ConfigValue from_text(const FieldSpec& f, const std::string& text) {
  const std::string key = f.key;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  switch (f.type) {
    case FieldType::Real: {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc{} || ptr != last) throw ConfigError(key + ": expected a number, got '" + text + "'");
      return v;
    }
    case FieldType::Integer: {
      long long v = 0;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc{} || ptr != last) throw ConfigError(key + ": expected an integer, got '" + text + "'");
      return v;
    }
    case FieldType::Text:
      return text;
    case FieldType::Flag:
      return true;
  }
  throw ConfigError(key + ": unsupported type");
}

}  // namespace detail

/// Builds a RunConfig from command-line arguments (without the program name
/// or subcommand). "--config FILE" names an optional JSON file.
inline RunConfig parse_config(const std::vector<std::string>& args) {
  const auto& table = detail::field_table();

  CLI::App app{"chanvese options"};
  app.allow_extras(false);
  app.set_help_flag();
  std::string config_file;
  app.add_option("--config", config_file, "flat JSON config file");
  std::vector<std::string> text_values(table.size());
  std::vector<CLI::Option*> options(table.size(), nullptr);
  for (std::size_t i = 0; i < table.size(); ++i) {
    const std::string flag = detail::flag_name(table[i].key);
    options[i] = table[i].type == detail::FieldType::Flag ? app.add_flag(flag)
                                                          : app.add_option(flag, text_values[i]);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  RunConfig cfg;
  if (!config_file.empty()) {
    nlohmann::json doc;
    try {
      const auto bytes = read_file(config_file);
      doc = nlohmann::json::parse(bytes.begin(), bytes.end());
    } catch (const IoError& e) {
      throw ConfigError(std::string("config: ") + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config: top level must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
      const auto it = std::find_if(table.begin(), table.end(), [&](const auto& f) { return key == f.key; });
      if (it == table.end()) throw ConfigError("config: unknown key '" + key + "'");
      it->apply(cfg, detail::from_json(*it, value));
    }
  }

  for (std::size_t i = 0; i < table.size(); ++i) {
    if (options[i]->count() > 0) table[i].apply(cfg, detail::from_text(table[i], text_values[i]));
  }

  cfg.noise_spec.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

}  // namespace chanvese
