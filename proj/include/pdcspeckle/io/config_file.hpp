#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "../config.hpp"
#include "../error.hpp"
#include "text.hpp"

namespace pdcspeckle {

// Line-oriented `key = value` configuration. `#` starts a comment. Lengths use the unit
// in the key name (mm, nm, um), pulse power is in MW, and sigma is in (mm^2/W)^(1/2).
// Unknown keys are errors; absent keys keep their defaults.

namespace detail {

struct ConfigKey {
  const char* name;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

[[noreturn]] inline void bad_value(const char* key, std::string_view v, const char* expect) {
  throw ConfigError("cannot parse '" + std::string(v) + "' as " + expect, key);
}

template <class F>
ConfigKey scaled(const char* name, int shift, F field) {
  return {name,
          [=](ExperimentConfig& c, std::string_view v) {
            double d = 0.0;
            if (!text::parse_shifted(v, shift, d)) bad_value(name, v, "a number");
            field(c) = d;
          },
          [=](const ExperimentConfig& c) {
            return text::format_shifted(field(c), shift);
          }};
}

template <class Int, class F>
ConfigKey integer(const char* name, F field) {
  return {name,
          [=](ExperimentConfig& c, std::string_view v) {
            Int i{};
            if (!text::parse_integer(v, i)) bad_value(name, v, "an integer");
            field(c) = i;
          },
          [=](const ExperimentConfig& c) {
            return std::to_string(field(c));
          }};
}

template <class F>
ConfigKey boolean(const char* name, F field) {
  return {name,
          [=](ExperimentConfig& c, std::string_view v) {
            v = text::trim(v);
            if (v == "true" || v == "1" || v == "yes" || v == "on") {
              field(c) = true;
            } else if (v == "false" || v == "0" || v == "no" || v == "off") {
              field(c) = false;
            } else {
              bad_value(name, v, "a boolean");
            }
          },
          [=](const ExperimentConfig& c) {
            return std::string(field(c) ? "true" : "false");
          }};
}

template <class Enum, class F>
ConfigKey choice(const char* name, std::vector<std::pair<const char*, Enum>> names, F field) {
  return {name,
          [=](ExperimentConfig& c, std::string_view v) {
            v = text::trim(v);
            for (const auto& [n, e] : names) {
              if (v == n) {
                field(c) = e;
                return;
              }
            }
            bad_value(name, v, "a known option");
          },
          [=](const ExperimentConfig& c) {
            const Enum e = field(c);
            for (const auto& [n, x] : names) {
              if (x == e) return std::string(n);
            }
            return std::string("?");
          }};
}

#define PDC_FIELD(expr) [](auto& c) -> auto& { return c.expr; }

inline const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    auto num = [&](const char* name, int shift, auto f) { k.push_back(scaled(name, shift, f)); };
    num("pump.wavelength_nm", 9, PDC_FIELD(pump.wavelength));
    num("pump.waist_mm", 3, PDC_FIELD(pump.waist));
    num("pump.power_MW", -6, PDC_FIELD(pump.mean_pulse_power));
    num("pump.pulse_duration_ns", 9, PDC_FIELD(pump.pulse_duration));
    num("pump.power_fluct_frac", 0, PDC_FIELD(pump.power_fluct_frac));
    k.push_back({"pump.laser_modes",
                 [](ExperimentConfig& c, std::string_view v) {
                   if (text::trim(v) == "inf") {
                     c.pump.laser_mode_count = kUnboundedLaserModes;
                     return;
                   }
                   std::uint64_t n = 0;
                   if (!text::parse_integer(v, n)) bad_value("pump.laser_modes", v, "an integer or inf");
                   c.pump.laser_mode_count = n;
                 },
                 [](const ExperimentConfig& c) {
                   return c.pump.laser_mode_count == kUnboundedLaserModes
                              ? std::string("inf")
                              : std::to_string(c.pump.laser_mode_count);
                 }});

    num("crystal.length_mm", 3, PDC_FIELD(crystal.length));
    num("crystal.wavelength_nm", 9, PDC_FIELD(crystal.degenerate_wavelength));
    num("crystal.theta0_rad", 0, PDC_FIELD(crystal.emission_angle));
    num("crystal.sigma", 3, PDC_FIELD(crystal.gain_coefficient));
    k.push_back(choice<Regime>("crystal.regime",
                               {{"noncollinear", Regime::NoncollinearLinear},
                                {"collinear", Regime::CollinearQuadratic}},
                               PDC_FIELD(crystal.regime)));
    num("crystal.sinc_prefactor", 0, PDC_FIELD(crystal.sinc_prefactor));
    num("crystal.c_omega", 0, PDC_FIELD(crystal.detuning_coefficient));

    num("detector.pixel_um", 6, PDC_FIELD(detector.pixel_pitch));
    k.push_back(integer<std::size_t>("detector.width", PDC_FIELD(detector.width)));
    k.push_back(integer<std::size_t>("detector.height", PDC_FIELD(detector.height)));
    num("detector.eta", 0, PDC_FIELD(detector.quantum_efficiency));
    num("detector.delta_eta", 0, PDC_FIELD(detector.efficiency_fluct));
    num("detector.read_noise", 0, PDC_FIELD(detector.read_noise));
    num("detector.focal_mm", 3, PDC_FIELD(detector.focal_length));
    k.push_back(integer<std::uint32_t>("detector.saturation", PDC_FIELD(detector.saturation)));
    k.push_back(boolean("detector.shot_noise", PDC_FIELD(detector.shot_noise)));
    k.push_back(integer<std::uint64_t>("detector.pattern_seed", PDC_FIELD(detector.pattern_seed)));

    k.push_back(integer<std::size_t>("synthesis.grid", PDC_FIELD(synthesis.grid)));
    k.push_back(choice<SamplingModel>("synthesis.sampling",
                                      {{"glauber", SamplingModel::Glauber},
                                       {"wigner", SamplingModel::Wigner}},
                                      PDC_FIELD(synthesis.sampling)));
    k.push_back(boolean("synthesis.apodize", PDC_FIELD(synthesis.apodize)));
    k.push_back(boolean("synthesis.twin", PDC_FIELD(synthesis.twin)));
    k.push_back(integer<std::uint32_t>("synthesis.modes_min", PDC_FIELD(synthesis.modes_min)));
    k.push_back(integer<std::uint32_t>("synthesis.modes_max", PDC_FIELD(synthesis.modes_max)));
    k.push_back({"synthesis.target_gain",
                 [](ExperimentConfig& c, std::string_view v) {
                   if (text::trim(v) == "none") {
                     c.synthesis.target_gain.reset();
                     return;
                   }
                   double g = 0.0;
                   if (!text::parse_double(v, g)) bad_value("synthesis.target_gain", v, "a number or none");
                   c.synthesis.target_gain = g;
                 },
                 [](const ExperimentConfig& c) {
                   return c.synthesis.target_gain ? text::format_exact(*c.synthesis.target_gain)
                                                  : std::string("none");
                 }});

    k.push_back({"analysis.region",
                 [](ExperimentConfig& c, std::string_view v) {
                   v = text::trim(v);
                   if (v == "auto") {
                     c.analysis.region.reset();
                     return;
                   }
                   std::size_t f[4];
                   for (int i = 0; i < 4; ++i) {
                     const auto comma = v.find(',');
                     if ((i < 3) == (comma == std::string_view::npos) ||
                         !text::parse_integer(v.substr(0, comma), f[i])) {
                       bad_value("analysis.region", v, "auto or x,y,width,height");
                     }
                     if (i < 3) v.remove_prefix(comma + 1);
                   }
                   c.analysis.region = Region{f[0], f[1], f[2], f[3]};
                 },
                 [](const ExperimentConfig& c) {
                   if (!c.analysis.region) return std::string("auto");
                   const Region& r = *c.analysis.region;
                   return std::to_string(r.x) + "," + std::to_string(r.y) + "," +
                          std::to_string(r.width) + "," + std::to_string(r.height);
                 }});
    k.push_back(integer<int>("analysis.max_disp", PDC_FIELD(analysis.max_disp)));
    k.push_back(integer<std::size_t>("analysis.stride", PDC_FIELD(analysis.stride)));
    k.push_back(choice<RadiusConvention>("analysis.radius",
                                         {{"hwhm", RadiusConvention::Hwhm},
                                          {"efold", RadiusConvention::EFold}},
                                         PDC_FIELD(analysis.radius)));
    k.push_back(choice<AnalysisSource>("analysis.source",
                                       {{"counts", AnalysisSource::Counts},
                                        {"intensity", AnalysisSource::Intensity}},
                                       PDC_FIELD(analysis.source)));
    return k;
  }();
  return keys;
}

#undef PDC_FIELD

}  // namespace detail

/// Applies one `key = value` assignment without validating the whole config.
inline void set_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  for (const auto& k : detail::config_keys()) {
    if (key == k.name) {
      k.set(cfg, value);
      return;
    }
  }
  throw ConfigError("unknown configuration key", std::string(key));
}

inline std::string get_config_value(const ExperimentConfig& cfg, std::string_view key) {
  for (const auto& k : detail::config_keys()) {
    if (key == k.name) return k.get(cfg);
  }
  throw ConfigError("unknown configuration key", std::string(key));
}

/// Parses config text; `source` names the input in error messages.
inline ExperimentConfig parse_config(std::string_view content, const std::string& source = "<config>") {
  ExperimentConfig cfg;
  std::size_t line_no = 0;
  while (!content.empty()) {
    const auto nl = content.find('\n');
    std::string_view line = content.substr(0, nl);
    content = nl == std::string_view::npos ? std::string_view{} : content.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(line_no);
    if (eq == std::string_view::npos) {
      throw ConfigError(where + ": expected 'key = value'");
    }
    const std::string_view key = text::trim(line.substr(0, eq));
    const std::string_view value = text::trim(line.substr(eq + 1));
    try {
      set_config_value(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what(), e.key());
    }
  }
  validate(cfg);
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

/// Every key, one per line, in a form parse_config() reads back to an identical config.
inline std::string format_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& k : detail::config_keys()) {
    out += k.name;
    out += " = ";
    out += k.get(cfg);
    out += '\n';
  }
  return out;
}

inline void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write config file " + path.string());
  out << format_config(cfg);
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace pdcspeckle
