#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "pdcspeckle/synthesis.hpp"

using namespace pdcspeckle;

namespace {

ExperimentConfig small_config(std::size_t n) {
  ExperimentConfig cfg;
  cfg.synthesis.grid = n;
  cfg.detector.width = 2 * n;
  cfg.detector.height = n;
  return cfg;
}

}  // namespace

TEST(EffectiveWaist, NarrowingRatioMatchesRootFindingOracle) {
  for (const double g : {0.5, 1.0, 2.0, 3.0, 5.0}) {
    EXPECT_NEAR(effective_waist_ratio(g), oracle::gain_narrowing_ratio(g).convert_to<double>(), 1e-9) << g;
  }
  EXPECT_NEAR(effective_waist_ratio(3.0), 0.5929, 5e-4);
}

TEST(EffectiveWaist, LowGainLimitIsThePumpWaist) {
  EXPECT_EQ(effective_waist_ratio(0.0), 1.0);
  EXPECT_NEAR(effective_waist_ratio(1e-3), 1.0, 1e-6);
  double prev = 1.0;
  for (double g = 0.1; g < 8.0; g += 0.1) {
    const double r = effective_waist_ratio(g);
    EXPECT_LT(r, prev);
    prev = r;
  }
}

TEST(GainProfile, ZeroPowerIsVacuumWithThePumpWaist) {
  PumpConfig pump;
  CrystalConfig crystal;
  const auto grid = near_field_grid(DetectorConfig{}, crystal, 32);
  const GainProfile p = build_gain_profile(pump, crystal, 0.0, grid);
  EXPECT_EQ(p.peak, 0.0);
  EXPECT_EQ(p.effective_waist, pump.waist);
  for (double g : p.gain.pixels()) EXPECT_EQ(g, 0.0);
}

TEST(GainProfile, GaussianFallsToOneOverEAtTheWaist) {
  PumpConfig pump;
  CrystalConfig crystal;
  NearFieldGrid grid{64, pump.waist / 8.0};
  const GainProfile p = build_gain_profile(pump, crystal, 2.0, grid);
  EXPECT_DOUBLE_EQ(p.gain(32, 32), p.peak);
  EXPECT_NEAR(p.gain(40, 32) / p.peak, std::exp(-1.0), 1e-12);
  EXPECT_NEAR(p.peak, crystal.gain_coefficient * std::sqrt(2.0 / (std::numbers::pi * pump.waist * pump.waist)) *
                          std::sqrt(2.0),
              1e-9);
  EXPECT_THROW(build_gain_profile(pump, crystal, -1.0, grid), ConfigError);
}

TEST(Grid, OneFarFieldSamplePerPixel) {
  DetectorConfig det;
  CrystalConfig crystal;
  const auto grid = near_field_grid(det, crystal, 256);
  EXPECT_NEAR(grid.q_spacing() / pixel_q_spacing(det, crystal.degenerate_wavelength), 1.0, 1e-12);
}

TEST(TwinIndex, IsAnInvolution) {
  for (std::size_t n : {4u, 8u, 64u}) {
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(twin_index(twin_index(i, n), n), i);
  }
  EXPECT_EQ(twin_index(0, 8), 0u);
  EXPECT_EQ(twin_index(4, 8), 4u);
}

TEST(ModePair, RejectsBadGrids) {
  const NearFieldGrid grid{12, 1e-5};
  GainProfile p = uniform_gain_profile(grid, 1.0);
  const UnitaryFft2d fft(12);
  EXPECT_THROW(synthesize_mode_pair(p, CrystalConfig{}, SynthesisConfig{}, 1, fft), ConfigError);
  const NearFieldGrid g8{8, 1e-5};
  GainProfile bad = uniform_gain_profile(g8, 1.0);
  bad.gain(1, 1) = std::nan("");
  const UnitaryFft2d fft8(8);
  EXPECT_THROW(synthesize_mode_pair(bad, CrystalConfig{}, SynthesisConfig{}, 1, fft8), ConfigError);
}

TEST(ModePair, FixedSeedIsBitIdentical) {
  const NearFieldGrid grid{16, 1e-5};
  const GainProfile p = uniform_gain_profile(grid, 1.0);
  const UnitaryFft2d fft(16);
  for (const auto s : {SamplingModel::Glauber, SamplingModel::Wigner}) {
    SynthesisConfig synth;
    synth.sampling = s;
    const auto a = synthesize_mode_pair(p, CrystalConfig{}, synth, 42, fft);
    const auto b = synthesize_mode_pair(p, CrystalConfig{}, synth, 42, fft);
    EXPECT_EQ(a.signal, b.signal);
    EXPECT_EQ(a.idler, b.idler);
    const auto c = synthesize_mode_pair(p, CrystalConfig{}, synth, 43, fft);
    EXPECT_NE(a.signal, c.signal);
  }
}

TEST(ModePair, GlauberTwinIntensitiesArePointReflections) {
  const std::size_t n = 32;
  PumpConfig pump;
  const GainProfile p = build_gain_profile(pump, CrystalConfig{}, 1.0, NearFieldGrid{n, pump.waist / 6.0});
  const UnitaryFft2d fft(n);
  const auto f = synthesize_mode_pair(p, CrystalConfig{}, SynthesisConfig{}, 9, fft);
  double peak = 0.0;
  for (const auto& v : f.signal.pixels()) peak = std::max(peak, std::norm(v));
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      EXPECT_NEAR(std::norm(f.signal(x, y)), std::norm(f.idler(twin_index(x, n), twin_index(y, n))), 1e-12 * peak);
    }
  }
}

TEST(ModePair, UnitaryTransformConservesPhotonNumber) {
  const std::size_t n = 32;
  PumpConfig pump;
  const GainProfile p = build_gain_profile(pump, CrystalConfig{}, 3.0, NearFieldGrid{n, pump.waist / 6.0});
  const UnitaryFft2d fft(n);
  const auto f = synthesize_mode_pair(p, CrystalConfig{}, SynthesisConfig{}, 17, fft);
  // Rebuild the near field from the same stream and compare total |E|^2.
  Engine rng(17);
  double near = 0.0;
  for (double g : p.gain.pixels()) {
    const auto z = complex_gaussian(rng, 1.0);
    near += std::norm(std::sinh(g) * z);
  }
  double far = 0.0;
  for (const auto& v : f.signal.pixels()) far += std::norm(v);
  EXPECT_NEAR(far / near, 1.0, 1e-12);
}

TEST(ModePair, WignerVacuumHasZeroMeanPhotonNumber) {
  const std::size_t n = 16;
  const GainProfile p = uniform_gain_profile(NearFieldGrid{n, 1e-5}, 0.0);
  const UnitaryFft2d fft(n);
  SynthesisConfig synth;
  synth.sampling = SamplingModel::Wigner;
  double sum = 0.0;
  double sum2 = 0.0;
  std::size_t count = 0;
  for (std::uint64_t s = 0; s < 400; ++s) {
    const auto f = synthesize_mode_pair(p, CrystalConfig{}, synth, s, fft);
    for (const auto& v : f.signal.pixels()) {
      const double x = std::norm(v) - f.vacuum_offset();
      sum += x;
      sum2 += x * x;
      ++count;
    }
  }
  const double mean = sum / count;
  const double se = std::sqrt((sum2 / count - mean * mean) / count);
  EXPECT_LT(std::abs(mean), 5.0 * se);
}

TEST(ModePair, PerModeMeanIsSinhSquaredForBothSamplings) {
  const std::size_t n = 32;
  const UnitaryFft2d fft(n);
  for (const auto s : {SamplingModel::Glauber, SamplingModel::Wigner}) {
    SynthesisConfig synth;
    synth.sampling = s;
    const GainProfile p = uniform_gain_profile(NearFieldGrid{n, 1e-5}, 1.0);
    double sum = 0.0;
    double sum2 = 0.0;
    std::size_t count = 0;
    for (std::uint64_t seed = 0; seed < 120; ++seed) {
      const auto f = synthesize_mode_pair(p, CrystalConfig{}, synth, seed, fft);
      for (const auto& v : f.signal.pixels()) {
        const double x = std::norm(v) - f.vacuum_offset();
        sum += x;
        sum2 += x * x;
        ++count;
      }
    }
    const double mean = sum / count;
    const double se = std::sqrt((sum2 / count - mean * mean) / count);
    const double want = std::sinh(1.0) * std::sinh(1.0);
    EXPECT_NEAR(want, 1.3811, 1e-4);
    EXPECT_LT(std::abs(mean - want), 5.0 * se) << static_cast<int>(s);
  }
}

TEST(ModePair, ApodizationLeavesTheRingCenterUntouched) {
  const std::size_t n = 16;
  const GainProfile p = uniform_gain_profile(NearFieldGrid{n, 1e-5}, 1.0);
  const UnitaryFft2d fft(n);
  SynthesisConfig plain;
  SynthesisConfig apo;
  apo.apodize = true;
  CrystalConfig crystal;
  crystal.length = 0.2;  // narrow envelope so the edges are visibly suppressed
  const auto a = synthesize_mode_pair(p, crystal, plain, 5, fft);
  const auto b = synthesize_mode_pair(p, crystal, apo, 5, fft);
  EXPECT_EQ(a.signal(n / 2, n / 2), b.signal(n / 2, n / 2));
  EXPECT_EQ(a.idler(n / 2, n / 2), b.idler(n / 2, n / 2));
  EXPECT_LT(std::abs(b.signal(0, n / 2)), std::abs(a.signal(0, n / 2)) + 1e-300);
}

TEST(PulseDraw, UnboundedModesAndNoDriftGiveTheMeanPower) {
  PumpConfig pump;
  pump.laser_mode_count = kUnboundedLaserModes;
  pump.power_fluct_frac = 0.0;
  pump.mean_pulse_power = 0.78;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto d = draw_pulse(pump, 2.53e-3, 90, 300, s);
    EXPECT_EQ(d.power, 0.78);
    EXPECT_GE(d.modes, 90u);
    EXPECT_LE(d.modes, 300u);
  }
}

TEST(PulseDraw, ZeroMeanPowerGivesZeroGain) {
  PumpConfig pump;
  pump.mean_pulse_power = 0.0;
  const auto d = draw_pulse(pump, 2.53e-3, 5, 5, 3);
  EXPECT_EQ(d.power, 0.0);
  EXPECT_EQ(d.gain_peak, 0.0);
  EXPECT_EQ(d.modes, 5u);
}

TEST(PulseDraw, TwoModeLaserFluctuationConvention) {
  PumpConfig pump;
  pump.laser_mode_count = 2;
  pump.power_fluct_frac = 0.0;
  const auto first = draw_pulse(pump, 2.53e-3, 1, 1, 0);
  EXPECT_NEAR(first.nominal_laser_fluct, 0.7071, 1e-4);
  double sum = 0.0;
  double sum2 = 0.0;
  const int n = 200000;
  for (int s = 0; s < n; ++s) {
    const double t = draw_pulse(pump, 2.53e-3, 1, 1, static_cast<std::uint64_t>(s)).thermal_factor;
    sum += t;
    sum2 += t * t;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sum2 / n - mean * mean);
  EXPECT_NEAR(mean, 1.0, 0.01);
  // Gamma(n, 1) / n has relative std sqrt(1 / n).
  EXPECT_NEAR(sd, std::sqrt(0.5), 0.01);
}

TEST(PulseDraw, ModeCountsSpanTheConfiguredRange) {
  PumpConfig pump;
  std::uint32_t lo = 1000;
  std::uint32_t hi = 0;
  for (std::uint64_t s = 0; s < 2000; ++s) {
    const auto d = draw_pulse(pump, 2.53e-3, 60, 170, s);
    lo = std::min(lo, d.modes);
    hi = std::max(hi, d.modes);
  }
  EXPECT_LE(lo, 62u);
  EXPECT_GE(hi, 168u);
  EXPECT_GE(lo, 60u);
  EXPECT_LE(hi, 170u);
}

TEST(EffectivePump, TargetGainOverridesPower) {
  ExperimentConfig cfg;
  cfg.synthesis.target_gain = 2.5;
  const PumpConfig p = effective_pump(cfg);
  EXPECT_NEAR(peak_gain(p.mean_pulse_power, p, cfg.crystal), 2.5, 1e-12);
}

TEST(FrameIntensity, LayoutPairsEachPixelWithItsPointReflection) {
  ExperimentConfig cfg = small_config(32);
  cfg.synthesis.modes_min = cfg.synthesis.modes_max = 3;
  cfg.synthesis.target_gain = 1.5;
  const auto f = synthesize_frame_intensity(cfg, 77);
  ASSERT_EQ(f.intensity.width(), 64u);
  ASSERT_EQ(f.intensity.height(), 32u);
  double peak = 0.0;
  for (double v : f.intensity.pixels()) peak = std::max(peak, v);
  ASSERT_GT(peak, 0.0);
  for (std::size_t y = 0; y < 32; ++y) {
    for (std::size_t x = 0; x < 32; ++x) {
      EXPECT_NEAR(f.intensity(x, y), f.intensity(63 - x, 31 - y), 1e-10 * peak);
    }
  }
}

TEST(FrameIntensity, SameSeedSameFrame) {
  ExperimentConfig cfg = small_config(16);
  cfg.synthesis.modes_min = 2;
  cfg.synthesis.modes_max = 6;
  const auto a = synthesize_frame_intensity(cfg, 5);
  const auto b = synthesize_frame_intensity(cfg, 5);
  EXPECT_EQ(a.intensity, b.intensity);
  EXPECT_EQ(a.pulse.modes, b.pulse.modes);
  EXPECT_NE(a.intensity, synthesize_frame_intensity(cfg, 6).intensity);
}

TEST(FrameIntensity, VacuumGainGivesADarkFrame) {
  ExperimentConfig cfg = small_config(16);
  cfg.synthesis.target_gain = 0.0;
  cfg.synthesis.modes_min = cfg.synthesis.modes_max = 1;
  for (const auto s : {SamplingModel::Glauber, SamplingModel::Wigner}) {
    cfg.synthesis.sampling = s;
    double sum = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto f = synthesize_frame_intensity(cfg, seed);
      sum += std::accumulate(f.intensity.pixels().begin(), f.intensity.pixels().end(), 0.0);
    }
    // Clamping at zero keeps the Wigner vacuum residual small but non-negative.
    EXPECT_LT(sum / (50.0 * 512.0), s == SamplingModel::Glauber ? 1e-300 : 0.35);
  }
}

TEST(FrameIntensity, UniformGainMeanScalesWithModes) {
  // Flat gain g = 1 over the whole near field and M = 100: spatial mean 100 sinh^2(1).
  const std::size_t n = 32;
  const UnitaryFft2d fft(n);
  const GainProfile p = uniform_gain_profile(NearFieldGrid{n, 1e-5}, 1.0);
  double sum = 0.0;
  double sum2 = 0.0;
  const int frames = 100;
  for (int fr = 0; fr < frames; ++fr) {
    double total = 0.0;
    for (std::uint32_t m = 0; m < 100; ++m) {
      const auto f = synthesize_mode_pair(p, CrystalConfig{}, SynthesisConfig{},
                                          derive_seed(static_cast<std::uint64_t>(fr), 1 + m), fft, m);
      for (const auto& v : f.signal.pixels()) total += std::norm(v);
    }
    const double mean = total / static_cast<double>(n * n);
    sum += mean;
    sum2 += mean * mean;
  }
  const double mean = sum / frames;
  const double sd = std::sqrt(sum2 / frames - mean * mean);
  const double want = 100.0 * std::sinh(1.0) * std::sinh(1.0);
  EXPECT_NEAR(want, 138.1, 0.05);
  EXPECT_LT(std::abs(mean - want), 3.0 * sd);
}
