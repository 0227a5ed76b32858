#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pdcspeckle/analysis/estimators.hpp"

using namespace pdcspeckle;

namespace {

NoiseModel apparatus() { return NoiseModel::from(DetectorConfig{}); }

}  // namespace

TEST(ModeEstimator, ApparatusForwardValueAndInversion) {
  const NoiseModel nm = apparatus();
  const double var = thermal_variance(100.0, 170.0, nm);
  EXPECT_NEAR(var, 183.82, 5e-3);
  EXPECT_NEAR(temporal_modes_from_moments(100.0, var, nm).value, 170.0, 170.0 * 1e-12);
}

TEST(ModeEstimator, RoundTripOverTheGrid) {
  const NoiseModel nm = apparatus();
  for (int i = 0; i < 10; ++i) {
    const double m = std::pow(10.0, 3.0 * i / 9.0);
    for (int j = 0; j < 10; ++j) {
      const double n = std::pow(10.0, 4.0 * j / 9.0);
      const double back = temporal_modes_from_moments(n, thermal_variance(n, m, nm), nm).value;
      EXPECT_LT(std::abs(back - m) / m, 1e-9) << n << " " << m;
    }
  }
}

TEST(ModeEstimator, PoissonLimitedWhenThereIsNoExcessNoise) {
  NoiseModel nm{1.0, 0.0, 0.0, 1.0};
  const auto e = temporal_modes_from_moments(50.0, 50.0, nm);
  EXPECT_TRUE(e.poisson_limited);
  EXPECT_TRUE(std::isinf(e.value));
}

TEST(ModeEstimator, SubThermalVarianceIsATypedError) {
  try {
    temporal_modes_from_moments(100.0, 50.0, apparatus());
    FAIL();
  } catch (const AnalysisError& e) {
    EXPECT_EQ(e.failure(), AnalysisFailure::SubThermalVariance);
  }
  EXPECT_THROW(temporal_modes_from_moments(0.0, 1.0, apparatus()), AnalysisError);
}

TEST(ModeEstimator, DeltaMethodErrorMatchesFiniteDifferences) {
  const NoiseModel nm = apparatus();
  const double n = 300.0;
  const double v = thermal_variance(n, 80.0, nm);
  const auto e0 = temporal_modes_from_moments(n, v, nm, 0.0, 1.0);
  const double h = 1e-4;
  const double dv = (temporal_modes_from_moments(n, v + h, nm).value - temporal_modes_from_moments(n, v - h, nm).value) / (2 * h);
  EXPECT_NEAR(e0.error, std::abs(dv), 1e-6 * std::abs(dv));
  const auto e1 = temporal_modes_from_moments(n, v, nm, 1.0, 0.0);
  const double dn = (temporal_modes_from_moments(n + h, v, nm).value - temporal_modes_from_moments(n - h, v, nm).value) / (2 * h);
  EXPECT_NEAR(e1.error, std::abs(dn), 1e-5 * std::abs(dn));
}

TEST(GainEstimator, ApparatusForwardValueAndInversion) {
  const double n = mean_counts_from_gain(2.0, 0.8, 0.25, 60.0);
  EXPECT_NEAR(n, 157.85, 5e-3);
  EXPECT_NEAR(estimate_gain(n, 0.8, 0.25, 60.0).value, 2.0, 1e-12);
  EXPECT_EQ(estimate_gain(0.0, 0.8, 0.25, 60.0).value, 0.0);
}

TEST(GainEstimator, RoundTripOverTheGrid) {
  for (int i = 0; i < 100; ++i) {
    const double g = 0.01 + (5.0 - 0.01) * i / 99.0;
    const double m = std::pow(10.0, 3.0 * (i % 10) / 9.0);
    const double n = mean_counts_from_gain(g, 0.8, 0.3, m);
    EXPECT_LT(std::abs(estimate_gain(n, 0.8, 0.3, m).value - g) / g, 1e-12);
  }
}

TEST(GainEstimator, RejectsInvalidInputs) {
  EXPECT_THROW(estimate_gain(-1.0, 0.8, 0.25, 10.0), AnalysisError);
  EXPECT_THROW(estimate_gain(1.0, 0.8, 0.25, 0.5), AnalysisError);
  EXPECT_THROW(estimate_gain(1.0, 0.0, 0.25, 10.0), AnalysisError);
}

TEST(RegionMoments, KnownImage) {
  Image<double> img(4, 4);
  for (std::size_t k = 0; k < 16; ++k) img.pixels()[k] = static_cast<double>(k);
  const auto m = region_moments(ImageView<double>(img), Region{0, 0, 4, 4});
  EXPECT_DOUBLE_EQ(m.mean, 7.5);
  EXPECT_DOUBLE_EQ(m.variance, 340.0 / 15.0);
  EXPECT_EQ(m.samples, 16u);
  const auto d = region_moments(ImageView<double>(img), Region{0, 0, 4, 4}, 2);
  EXPECT_EQ(d.samples, 4u);
  EXPECT_DOUBLE_EQ(d.mean, (0.0 + 2.0 + 8.0 + 10.0) / 4.0);
}

TEST(ModeEstimator, RecoversModesFromSimulatedThermalPixels) {
  // Each pixel: sum of M unit exponentials scaled to mean N, then Poisson + read noise.
  const double m_true = 60.0;
  const double mean = 400.0;
  const NoiseModel nm{1.0, 0.0, 4.0, 1.0};
  std::mt19937_64 rng(1);
  std::gamma_distribution<double> thermal(m_true, mean / m_true);
  std::normal_distribution<double> read(0.0, 4.0);
  Image<double> img(200, 200);
  for (auto& v : img.pixels()) {
    std::poisson_distribution<long> p(thermal(rng));
    v = static_cast<double>(p(rng)) + read(rng);
  }
  const auto e = estimate_temporal_modes(ImageView<double>(img), Region{0, 0, 200, 200}, nm);
  EXPECT_NEAR(e.value / m_true, 1.0, 0.1);
  EXPECT_LT(std::abs(e.value - m_true), 4.0 * e.error);
}
