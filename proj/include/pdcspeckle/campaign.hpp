#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "analysis/estimators.hpp"
#include "analysis/fit.hpp"
#include "config.hpp"
#include "detector.hpp"
#include "fft.hpp"
#include "io/config_file.hpp"
#include "io/csv.hpp"
#include "io/text.hpp"
#include "synthesis.hpp"

namespace pdcspeckle {

// ---------------------------------------------------------------------------------------
// Single-frame pipeline shared by the campaign runner and the CLI.

/// Stream of the detector noise draws for a frame seed.
inline std::uint64_t detection_seed(std::uint64_t frame_seed) { return derive_seed(frame_seed, 0xde7ec7); }

/// Seed of frame k at sweep point j.
inline std::uint64_t campaign_seed(std::uint64_t seed_base, std::size_t point, std::size_t frame) {
  return seed_base + static_cast<std::uint64_t>(point) * 1'000'000u + frame;
}

inline Detector make_detector(const ExperimentConfig& cfg) {
  return Detector(cfg.detector, 2 * cfg.synthesis.grid, cfg.synthesis.grid);
}

struct SimulatedFrame {
  FrameIntensity field;
  Frame frame;
};

inline SimulatedFrame simulate_frame(const ExperimentConfig& cfg, std::uint64_t seed, const UnitaryFft2d& fft,
                                     const Detector& detector) {
  SimulatedFrame s;
  s.field = synthesize_frame_intensity(cfg, seed, fft);
  FrameMetadata meta;
  meta.seed = seed;
  meta.pulse_power = s.field.pulse.power;
  meta.gain_peak = s.field.pulse.gain_peak;
  meta.modes = s.field.pulse.modes;
  meta.waist = cfg.pump.waist;
  s.frame = detector.apply_detection(s.field.intensity, detection_seed(seed), meta);
  return s;
}

/// Configured region, or the signal half-plane shrunk by max_disp on every side.
inline Region analysis_region(const AnalysisConfig& a, std::size_t width, std::size_t height) {
  if (a.region) return *a.region;
  return default_signal_region(width, height, static_cast<std::size_t>(a.max_disp));
}

inline EstimateReport analyze_counts(const Image<std::uint16_t>& counts, const ExperimentConfig& cfg) {
  const Region r = analysis_region(cfg.analysis, counts.width(), counts.height());
  return analyze_frame(ImageView<std::uint16_t>(counts), r, NoiseModel::from(cfg.detector), cfg.analysis);
}

inline EstimateReport analyze_intensity(const Image<double>& intensity, const ExperimentConfig& cfg) {
  const Region r = analysis_region(cfg.analysis, intensity.width(), intensity.height());
  return analyze_frame(ImageView<double>(intensity), r, NoiseModel::ideal(), cfg.analysis);
}

/// Analysis of a simulated frame according to `analysis.source`.
inline EstimateReport analyze_simulated(const SimulatedFrame& s, const ExperimentConfig& cfg) {
  return cfg.analysis.source == AnalysisSource::Intensity ? analyze_intensity(s.field.intensity, cfg)
                                                          : analyze_counts(s.frame.counts, cfg);
}

// ---------------------------------------------------------------------------------------
// Robust summaries.

inline double median(std::vector<double> v) {
  std::erase_if(v, [](double x) { return !std::isfinite(x); });
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Median absolute deviation (unscaled).
inline double median_abs_deviation(const std::vector<double>& v) {
  const double m = median(v);
  std::vector<double> d;
  for (const double x : v) {
    if (std::isfinite(x)) d.push_back(std::abs(x - m));
  }
  return median(std::move(d));
}

// ---------------------------------------------------------------------------------------
// Campaigns.

struct CampaignSpec {
  ExperimentConfig base;
  /// Config key being swept, e.g. "pump.waist_mm". Empty: a single point at `base`.
  std::string parameter;
  std::vector<std::string> values;
  std::size_t frames_per_point = 1;
  std::uint64_t seed_base = 0;
  bool fit_linear = true;
  bool fit_sinh2 = true;
};

struct FrameRow {
  std::string sweep_value;
  std::size_t point = 0;
  std::uint64_t seed = 0;
  std::optional<EstimateReport> report;
  /// Empty on success, otherwise the failure code.
  std::string error;
  double gain_peak = 0.0;
  std::uint32_t modes = 0;
};

struct AggregateRow {
  std::string sweep_value;
  std::size_t frames = 0;
  std::size_t ok_frames = 0;
  double median_mean_counts = 0.0;
  double mad_mean_counts = 0.0;
  double median_modes = 0.0;
  double mad_modes = 0.0;
  double median_gain = 0.0;
  double mad_gain = 0.0;
  double median_radius = 0.0;
  double mad_radius = 0.0;
  double mean_radius = 0.0;
  double sem_radius = 0.0;
  /// Pump amplitude at the mean pulse power (sqrt(W)/m), the sinh^2 fit abscissa.
  double pump_amplitude = 0.0;
  double median_sinh2_gain = 0.0;
};

struct CampaignResult {
  CampaignSpec spec;
  std::vector<FrameRow> frames;
  std::vector<AggregateRow> aggregates;
  std::optional<FitResult> linear_fit;
  std::optional<FitResult> sinh2_fit;
  std::vector<std::string> fit_notes;

  bool all_failed() const {
    return std::none_of(frames.begin(), frames.end(), [](const FrameRow& r) { return r.error.empty(); });
  }
};

namespace detail {

inline bool sweep_less(const std::string& a, const std::string& b) {
  double x = 0.0;
  double y = 0.0;
  if (text::parse_double(a, x) && text::parse_double(b, y) && x != y) return x < y;
  return a < b;
}

inline std::string num(double v) { return text::format_table(v, 10); }

inline std::string error_code(const std::exception& e) {
  if (const auto* a = dynamic_cast<const AnalysisError*>(&e)) return to_string(a->failure());
  if (dynamic_cast<const ConfigError*>(&e)) return "config_error";
  return "internal_error";
}

}  // namespace detail

/// Configs of every sweep point, validated before anything runs.
inline std::vector<ExperimentConfig> campaign_points(const CampaignSpec& spec) {
  validate(spec.base);
  if (spec.frames_per_point < 1) throw ConfigError("frames per point must be at least 1", "frames");
  std::vector<ExperimentConfig> pts;
  if (spec.parameter.empty()) {
    if (spec.values.size() > 1) throw ConfigError("sweep values given without a parameter", "sweep");
    pts.push_back(spec.base);
    return pts;
  }
  if (spec.values.empty()) throw ConfigError("sweep value list is empty", spec.parameter);
  for (const auto& v : spec.values) {
    ExperimentConfig c = spec.base;
    set_config_value(c, spec.parameter, v);
    validate(c);
    pts.push_back(c);
  }
  return pts;
}

/// Runs every frame of every sweep point sequentially. Per-frame analysis failures are
/// recorded in the row and do not stop the campaign; configuration errors do.
inline CampaignResult run_campaign(const CampaignSpec& spec) {
  const std::vector<ExperimentConfig> points = campaign_points(spec);
  CampaignResult res;
  res.spec = spec;

  for (std::size_t j = 0; j < points.size(); ++j) {
    const ExperimentConfig& cfg = points[j];
    const std::string value = spec.parameter.empty() ? std::string() : spec.values[j];
    const UnitaryFft2d fft(cfg.synthesis.grid);
    const Detector detector = make_detector(cfg);
    for (std::size_t k = 0; k < spec.frames_per_point; ++k) {
      FrameRow row;
      row.sweep_value = value;
      row.point = j;
      row.seed = campaign_seed(spec.seed_base, j, k);
      try {
        const SimulatedFrame s = simulate_frame(cfg, row.seed, fft, detector);
        row.gain_peak = s.field.pulse.gain_peak;
        row.modes = s.field.pulse.modes;
        row.report = analyze_simulated(s, cfg);
      } catch (const AnalysisError& e) {
        row.error = detail::error_code(e);
      }
      res.frames.push_back(std::move(row));
    }
  }
  std::stable_sort(res.frames.begin(), res.frames.end(), [](const FrameRow& a, const FrameRow& b) {
    if (a.sweep_value != b.sweep_value) return detail::sweep_less(a.sweep_value, b.sweep_value);
    return a.seed < b.seed;
  });

  for (std::size_t j = 0; j < points.size(); ++j) {
    AggregateRow ag;
    ag.sweep_value = spec.parameter.empty() ? std::string() : spec.values[j];
    std::vector<double> n, m, g, r, s2;
    for (const auto& row : res.frames) {
      if (row.point != j) continue;
      ++ag.frames;
      if (!row.report) continue;
      ++ag.ok_frames;
      n.push_back(row.report->mean_counts);
      m.push_back(row.report->modes);
      g.push_back(row.report->gain);
      r.push_back(row.report->radius_pixels);
      s2.push_back(std::sinh(row.report->gain) * std::sinh(row.report->gain));
    }
    ag.median_mean_counts = median(n);
    ag.mad_mean_counts = median_abs_deviation(n);
    ag.median_modes = median(m);
    ag.mad_modes = median_abs_deviation(m);
    ag.median_gain = median(g);
    ag.mad_gain = median_abs_deviation(g);
    ag.median_radius = median(r);
    ag.mad_radius = median_abs_deviation(r);
    ag.median_sinh2_gain = median(s2);
    if (r.empty()) {
      ag.mean_radius = ag.sem_radius = std::numeric_limits<double>::quiet_NaN();
    } else {
      double sum = 0.0;
      for (const double x : r) sum += x;
      ag.mean_radius = sum / static_cast<double>(r.size());
      double ss = 0.0;
      for (const double x : r) ss += (x - ag.mean_radius) * (x - ag.mean_radius);
      ag.sem_radius = r.size() > 1 ? std::sqrt(ss / static_cast<double>(r.size() - 1) / static_cast<double>(r.size()))
                                   : std::numeric_limits<double>::quiet_NaN();
    }
    const PumpConfig pump = effective_pump(points[j]);
    ag.pump_amplitude = pump_amplitude(pump.mean_pulse_power, pump.waist);
    res.aggregates.push_back(ag);
  }
  std::stable_sort(res.aggregates.begin(), res.aggregates.end(),
                   [](const AggregateRow& a, const AggregateRow& b) { return detail::sweep_less(a.sweep_value, b.sweep_value); });

  if (spec.fit_linear) {
    std::vector<FitPoint> pts;
    for (const auto& a : res.aggregates) {
      if (std::isfinite(a.median_gain) && std::isfinite(a.median_radius)) pts.push_back({a.median_gain, a.median_radius});
    }
    try {
      res.linear_fit = fit_linear(pts);
    } catch (const AnalysisError& e) {
      res.fit_notes.push_back(std::string("linear fit skipped: ") + e.what());
    }
  }
  if (spec.fit_sinh2) {
    if (spec.parameter != "pump.power_MW" || spec.base.synthesis.target_gain) {
      res.fit_notes.push_back("sinh2 fit skipped: needs a pump.power_MW sweep without synthesis.target_gain");
    } else {
      std::vector<FitPoint> pts;
      for (const auto& a : res.aggregates) {
        if (std::isfinite(a.median_sinh2_gain)) pts.push_back({a.pump_amplitude, a.median_sinh2_gain});
      }
      try {
        res.sinh2_fit = fit_sinh2(pts, 1.0);
      } catch (const AnalysisError& e) {
        res.fit_notes.push_back(std::string("sinh2 fit skipped: ") + e.what());
      }
    }
  }
  return res;
}

struct CsvOptions {
  /// Adds a `# generated ...` UTC line; off for byte-reproducible output.
  bool timestamp = true;
};

namespace detail {

inline std::vector<std::string> campaign_comments(const CampaignResult& r, const CsvOptions& opt,
                                                  const char* title) {
  std::vector<std::string> c;
  c.push_back(std::string("pdcspeckle ") + title + " (" + kGeneratorVersion + ")");
  if (opt.timestamp) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    c.push_back(std::string("generated ") + buf);
  }
  c.push_back("sweep = " + (r.spec.parameter.empty() ? std::string("none") : r.spec.parameter));
  c.push_back("frames_per_point = " + std::to_string(r.spec.frames_per_point));
  c.push_back("seed_base = " + std::to_string(r.spec.seed_base) + " (frame k of point j: seed_base + j*1000000 + k)");
  const std::string cfg = format_config(r.spec.base);
  std::size_t pos = 0;
  while (pos < cfg.size()) {
    const auto nl = cfg.find('\n', pos);
    c.push_back("config " + cfg.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return c;
}

}  // namespace detail

/// Per-frame table: one row per frame, failures included.
inline CsvTable frames_table(const CampaignResult& r, const CsvOptions& opt = {}) {
  CsvTable t;
  t.comments = detail::campaign_comments(r, opt, "campaign frames");
  t.header = {"sweep_value", "seed",   "mean_N_per_pixel", "M_hat", "g_hat",
              "radius_pixels", "radius_err", "error", "gain_peak", "M_true"};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& f : r.frames) {
    const auto& rep = f.report;
    t.rows.push_back({f.sweep_value, std::to_string(f.seed), detail::num(rep ? rep->mean_counts : nan),
                      detail::num(rep ? rep->modes : nan), detail::num(rep ? rep->gain : nan),
                      detail::num(rep ? rep->radius_pixels : nan), detail::num(rep ? rep->radius_error : nan),
                      f.error, detail::num(f.gain_peak), std::to_string(f.modes)});
  }
  return t;
}

/// Per-point medians, MADs and fit inputs, followed by the fit summary as comments.
inline std::string aggregate_csv(const CampaignResult& r, const CsvOptions& opt = {}) {
  CsvTable t;
  t.comments = detail::campaign_comments(r, opt, "campaign aggregate");
  t.header = {"sweep_value",   "frames",     "ok_frames",     "median_mean_N", "mad_mean_N",
              "median_M_hat",  "mad_M_hat",  "median_g_hat",  "mad_g_hat",     "median_radius",
              "mad_radius",    "mean_radius", "sem_radius",   "A_pump",        "median_sinh2_g_hat"};
  using detail::num;
  for (const auto& a : r.aggregates) {
    t.rows.push_back({a.sweep_value, std::to_string(a.frames), std::to_string(a.ok_frames),
                      num(a.median_mean_counts), num(a.mad_mean_counts), num(a.median_modes),
                      num(a.mad_modes), num(a.median_gain), num(a.mad_gain), num(a.median_radius),
                      num(a.mad_radius), num(a.mean_radius), num(a.sem_radius), num(a.pump_amplitude),
                      num(a.median_sinh2_gain)});
  }
  std::string out = format_csv(t);
  out += "# fit summary\r\n";
  if (r.linear_fit) {
    const auto& f = *r.linear_fit;
    out += "# linear radius_pixels = alpha * g_hat + R0: alpha = " + num(f.parameters[0]) + " +- " +
           num(f.errors[0]) + ", R0 = " + num(f.parameters[1]) + " +- " + num(f.errors[1]) +
           ", points = " + std::to_string(f.points) + "\r\n";
  }
  if (r.sinh2_fit) {
    const auto& f = *r.sinh2_fit;
    out += "# sinh2 sinh^2(g_hat) = sinh^2(sigma * A_pump): sigma = " + num(f.parameters[0] * 1e3) + " +- " +
           num(f.errors[0] * 1e3) + " (mm^2/W)^(1/2), points = " + std::to_string(f.points) + "\r\n";
  }
  for (const auto& n : r.fit_notes) out += "# " + n + "\r\n";
  return out;
}

inline void write_campaign(const CampaignResult& r, const std::filesystem::path& dir, const CsvOptions& opt = {}) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  write_text_file(dir / "frames.csv", format_csv(frames_table(r, opt)));
  write_text_file(dir / "aggregate.csv", aggregate_csv(r, opt));
}

}  // namespace pdcspeckle
