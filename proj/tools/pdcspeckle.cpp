// Command-line front end: predict, simulate, analyze, campaign, fit.
//
// Exit codes: 0 success, 2 configuration or usage error, 3 I/O error,
// 4 analysis error (every frame failed, or the fit failed).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pdcspeckle/pdcspeckle.hpp"

namespace fs = std::filesystem;
using namespace pdcspeckle;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitAnalysis = 4;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 1;
  std::string out;
  std::size_t frames = 1;
  std::string sweep;
  bool no_timestamp = false;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--config", o.config_path, "key = value configuration file");
  app->add_option("--set", o.overrides, "extra key=value assignment applied after --config");
  app->add_option("--seed", o.seed, "seed (base seed for campaigns)");
  app->add_option("--out", o.out, "output directory");
  app->add_option("--frames", o.frames, "frames (per sweep point for campaigns)")->check(CLI::PositiveNumber);
  app->add_option("--sweep", o.sweep, "key=v1,v2,... parameter sweep");
  app->add_flag("--no-timestamp", o.no_timestamp, "omit the generation time from CSV output");
}

ExperimentConfig load(const CommonOptions& o) {
  ExperimentConfig cfg = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set needs key=value", kv);
    set_config_value(cfg, text::trim(std::string_view(kv).substr(0, eq)),
                     text::trim(std::string_view(kv).substr(eq + 1)));
  }
  validate(cfg);
  return cfg;
}

fs::path output_dir(const CommonOptions& o, const char* fallback) {
  fs::path dir = o.out.empty() ? fs::path(fallback) : fs::path(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

std::string num(double v) { return text::format_table(v, 10); }

std::vector<std::string> split_values(std::string_view list) {
  std::vector<std::string> out;
  while (true) {
    const auto comma = list.find(',');
    out.emplace_back(text::trim(list.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    list.remove_prefix(comma + 1);
  }
  return out;
}

int cmd_predict(const CommonOptions& o) {
  const ExperimentConfig cfg = load(o);
  const CoherencePrediction p = predict_coherence(cfg.pump, cfg.crystal, cfg.detector);
  const double dq_nc = sinc_hwhm(cfg.crystal, Regime::NoncollinearLinear);
  const double dq_col = sinc_hwhm(cfg.crystal, Regime::CollinearQuadratic);
  CsvTable t;
  t.comments = {std::string("pdcspeckle predict (") + kGeneratorVersion + ")",
                std::string("regime = ") +
                    (cfg.crystal.regime == Regime::NoncollinearLinear ? "noncollinear" : "collinear")};
  t.header = {"quantity", "value", "unit"};
  t.rows = {
      {"delta_q", num(p.delta_q_gauss), "rad/m"},
      {"Delta_q_noncollinear", num(dq_nc), "rad/m"},
      {"Delta_q_collinear", num(dq_col), "rad/m"},
      {"delta_q_over_Delta_q", num(p.width_ratio), ""},
      {"pump_limited", p.width_ratio < 1.0 ? "true" : "false", ""},
      {"radius_q", num(p.coherence_radius_q), "rad/m"},
      {"radius_um", num(p.coherence_radius_m * 1e6), "um"},
      {"radius_pixels", num(p.coherence_radius_pixels), "pixels"},
      {"pixel_q", num(pixel_q_spacing(cfg.detector, cfg.crystal.degenerate_wavelength)), "rad/m"},
  };
  if (cfg.synthesis.target_gain) {
    const double g = *cfg.synthesis.target_gain;
    t.rows.push_back({"gain_peak", num(g), ""});
    t.rows.push_back({"effective_waist_ratio", num(effective_waist_ratio(g)), ""});
  }
  const std::string csv = format_csv(t);
  std::cout << csv;
  if (!o.out.empty()) write_text_file(output_dir(o, ".") / "predict.csv", csv);
  return 0;
}

int cmd_simulate(const CommonOptions& o) {
  const ExperimentConfig cfg = load(o);
  const fs::path dir = output_dir(o, ".");
  const UnitaryFft2d fft(cfg.synthesis.grid);
  const Detector detector = make_detector(cfg);
  for (std::size_t k = 0; k < o.frames; ++k) {
    const std::uint64_t seed = campaign_seed(o.seed, 0, k);
    const SimulatedFrame s = simulate_frame(cfg, seed, fft, detector);
    const fs::path path = dir / ("frame_" + std::to_string(seed) + ".pgm");
    save_frame(s.frame, path);
    std::cout << path.string() << "  g_peak=" << num(s.field.pulse.gain_peak) << " M=" << s.field.pulse.modes
              << (s.frame.meta.saturated ? "  (saturated)" : "") << '\n';
  }
  return 0;
}

int cmd_analyze(const CommonOptions& o, const std::vector<std::string>& inputs) {
  const ExperimentConfig cfg = load(o);
  CsvTable t;
  t.comments = {std::string("pdcspeckle analyze (") + kGeneratorVersion + ")"};
  t.header = {"file", "seed", "mean_N_per_pixel", "M_hat", "g_hat", "radius_pixels", "radius_err", "error"};
  std::size_t ok = 0;
  for (const auto& in : inputs) {
    const Frame f = load_frame(in);
    if (!f.meta.known) std::cerr << "warning: no sidecar for " << in << "; metadata unknown\n";
    std::vector<std::string> row{in, f.meta.known ? std::to_string(f.meta.seed) : ""};
    try {
      const EstimateReport r = analyze_counts(f.counts, cfg);
      for (const double v : {r.mean_counts, r.modes, r.gain, r.radius_pixels, r.radius_error}) row.push_back(num(v));
      row.emplace_back();
      ++ok;
    } catch (const AnalysisError& e) {
      for (int i = 0; i < 5; ++i) row.emplace_back("nan");
      row.emplace_back(to_string(e.failure()));
      std::cerr << in << ": " << e.what() << '\n';
    }
    t.rows.push_back(std::move(row));
  }
  const std::string csv = format_csv(t);
  std::cout << csv;
  if (!o.out.empty()) write_text_file(output_dir(o, ".") / "analysis.csv", csv);
  return ok == 0 ? kExitAnalysis : 0;
}

int cmd_campaign(const CommonOptions& o) {
  CampaignSpec spec;
  spec.base = load(o);
  spec.frames_per_point = o.frames;
  spec.seed_base = o.seed;
  if (!o.sweep.empty()) {
    const auto eq = o.sweep.find('=');
    if (eq == std::string::npos) throw ConfigError("--sweep needs key=v1,v2,...", "sweep");
    spec.parameter = std::string(text::trim(std::string_view(o.sweep).substr(0, eq)));
    spec.values = split_values(std::string_view(o.sweep).substr(eq + 1));
  }
  const CampaignResult r = run_campaign(spec);
  const fs::path dir = output_dir(o, "campaign");
  write_campaign(r, dir, CsvOptions{!o.no_timestamp});
  std::size_t failed = 0;
  for (const auto& f : r.frames) failed += f.error.empty() ? 0 : 1;
  std::cout << "wrote " << (dir / "frames.csv").string() << " and " << (dir / "aggregate.csv").string() << " ("
            << r.frames.size() << " frames, " << failed << " failed)\n";
  for (const auto& a : r.aggregates) {
    std::cout << "  " << (a.sweep_value.empty() ? "-" : a.sweep_value) << ": median radius "
              << num(a.median_radius) << " px, median g_hat " << num(a.median_gain) << ", median M_hat "
              << num(a.median_modes) << '\n';
  }
  return r.all_failed() ? kExitAnalysis : 0;
}

int cmd_fit(const std::string& input, const std::string& model, std::string xcol, std::string ycol, double k) {
  const CsvTable t = parse_csv(read_text_file(input), input);
  if (t.header.size() < 2) throw IoError(input + ": need at least two columns");
  if (xcol.empty()) xcol = t.header[0];
  if (ycol.empty()) ycol = t.header[1];
  const std::size_t xi = t.column(xcol);
  const std::size_t yi = t.column(ycol);
  if (xi == std::string::npos || yi == std::string::npos) throw IoError(input + ": missing column");
  std::vector<FitPoint> pts;
  for (const auto& row : t.rows) {
    FitPoint p;
    if (text::parse_double(row[xi], p.x) && text::parse_double(row[yi], p.y) && std::isfinite(p.x) &&
        std::isfinite(p.y)) {
      pts.push_back(p);
    }
  }
  if (model == "linear") {
    const FitResult f = fit_linear(pts);
    std::cout << "slope = " << num(f.parameters[0]) << " +- " << num(f.errors[0]) << "\nintercept = "
              << num(f.parameters[1]) << " +- " << num(f.errors[1]) << "\npoints = " << f.points << '\n';
  } else {
    const FitResult f = fit_sinh2(pts, k);
    std::cout << "sigma = " << num(f.parameters[0]) << " +- " << num(f.errors[0]) << "\npoints = " << f.points
              << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Twin-beam PDC speckle simulator and analyzer"};
  app.require_subcommand(1);
  CommonOptions opts;

  auto* predict = app.add_subcommand("predict", "coherence-radius prediction for a configuration");
  auto* simulate = app.add_subcommand("simulate", "synthesize and save detected frames");
  auto* analyze = app.add_subcommand("analyze", "estimate radius, modes and gain from saved frames");
  auto* campaign = app.add_subcommand("campaign", "seeded parameter sweep with CSV output");
  auto* fit = app.add_subcommand("fit", "fit a line or sinh^2 law to two CSV columns");
  for (auto* s : {predict, simulate, analyze, campaign, fit}) add_common(s, opts);

  std::vector<std::string> inputs;
  analyze->add_option("frames_in", inputs, "PGM frames")->required();
  std::string fit_input;
  std::string model = "linear";
  std::string xcol;
  std::string ycol;
  double k = 1.0;
  fit->add_option("input", fit_input, "CSV table")->required();
  fit->add_option("--model", model, "linear or sinh2")->check(CLI::IsMember({"linear", "sinh2"}));
  fit->add_option("--x", xcol, "abscissa column (default: first)");
  fit->add_option("--y", ycol, "ordinate column (default: second)");
  fit->add_option("--k", k, "fixed prefactor of the sinh^2 law");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*predict) return cmd_predict(opts);
    if (*simulate) return cmd_simulate(opts);
    if (*analyze) return cmd_analyze(opts, inputs);
    if (*campaign) return cmd_campaign(opts);
    if (*fit) return cmd_fit(fit_input, model, xcol, ycol, k);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const AnalysisError& e) {
    std::cerr << "analysis error: " << e.what() << '\n';
    return kExitAnalysis;
  }
  return 0;
}
