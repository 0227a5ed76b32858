#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "pdcspeckle/campaign.hpp"
#include "pdcspeckle/io/pgm.hpp"

using namespace pdcspeckle;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "pdcspeckle_test_frames";
  fs::create_directories(dir);
  return dir / name;
}

Frame random_frame(std::size_t w, std::size_t h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> c(0, 65535);
  Frame f;
  f.counts = Image<std::uint16_t>(w, h);
  for (auto& v : f.counts.pixels()) v = static_cast<std::uint16_t>(c(rng));
  f.meta.seed = seed;
  f.meta.pulse_power = 1.0 / 3.0 * static_cast<double>(seed + 1);
  f.meta.gain_peak = 0.1 * std::sqrt(static_cast<double>(seed + 2));
  f.meta.modes = static_cast<std::uint32_t>(seed % 300 + 1);
  f.meta.waist = 0.7e-3;
  return f;
}

}  // namespace

TEST(FrameFile, RoundTripIsBitIdentical) {
  const fs::path p = scratch("rt.pgm");
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Frame f = random_frame(17 + s, 9 + s % 5, s);
    save_frame(f, p);
    EXPECT_EQ(load_frame(p), f);
  }
}

TEST(FrameFile, PayloadIsBigEndianP5) {
  const fs::path p = scratch("be.pgm");
  Frame f;
  f.counts = Image<std::uint16_t>(2, 1);
  f.counts(0, 0) = 0x1234;
  f.counts(1, 0) = 0xfffe;
  save_frame(f, p);
  std::ifstream in(p, std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(bytes, std::string("P5\n2 1\n65535\n\x12\x34\xff\xfe", 17));
  const FrameFileHeader h = [&] {
    std::ifstream again(p, std::ios::binary);
    return read_frame_header(again, p.string());
  }();
  EXPECT_EQ(h, (FrameFileHeader{"P5", 1, 2, 1, 16}));
}

TEST(FrameFile, SaturationFlagSurvives) {
  const fs::path p = scratch("sat.pgm");
  Frame f;
  f.counts = Image<std::uint16_t>(3, 3, 10);
  f.counts(1, 1) = 65535;
  f.meta.saturated = true;
  save_frame(f, p);
  EXPECT_TRUE(load_frame(p).meta.saturated);
  fs::remove(sidecar_path(p));
  const Frame bare = load_frame(p);
  EXPECT_FALSE(bare.meta.known);
  EXPECT_TRUE(bare.meta.saturated);
  EXPECT_EQ(bare.counts, f.counts);
}

TEST(FrameFile, TruncatedPayloadIsACorruptFileError) {
  const fs::path p = scratch("trunc.pgm");
  save_frame(random_frame(10, 10, 1), p);
  fs::resize_file(p, fs::file_size(p) - 3);
  try {
    load_frame(p);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("truncated"), std::string::npos);
  }
}

TEST(FrameFile, HeaderMismatches) {
  const fs::path p = scratch("bad.pgm");
  {
    std::ofstream out(p, std::ios::binary);
    out << "P2\n2 2\n65535\n";
  }
  EXPECT_THROW(load_frame(p), IoError);
  {
    std::ofstream out(p, std::ios::binary);
    out << "P5\n2 2\n255\n" << std::string(4, 'x');
  }
  EXPECT_THROW(load_frame(p), IoError);
  {
    std::ofstream out(p, std::ios::binary);
    out << "P5\n# comment\n1 1\n65535\n" << std::string("\x01\x02", 2);
  }
  EXPECT_EQ(load_frame(p).counts(0, 0), 0x0102);
  EXPECT_THROW(load_frame(scratch("missing.pgm")), IoError);
}

TEST(FrameFile, ReloadedFrameAnalyzesIdentically) {
  ExperimentConfig cfg;
  cfg.synthesis.grid = 64;
  cfg.synthesis.target_gain = 2.0;
  cfg.synthesis.modes_min = cfg.synthesis.modes_max = 20;
  cfg.analysis.max_disp = 5;
  const UnitaryFft2d fft(64);
  const Detector det = make_detector(cfg);
  const SimulatedFrame s = simulate_frame(cfg, 12, fft, det);
  const fs::path p = scratch("sim.pgm");
  save_frame(s.frame, p);
  const Frame back = load_frame(p);
  ASSERT_EQ(back, s.frame);
  const EstimateReport a = analyze_counts(s.frame.counts, cfg);
  const EstimateReport b = analyze_counts(back.counts, cfg);
  EXPECT_EQ(a.radius_pixels, b.radius_pixels);
  EXPECT_EQ(a.modes, b.modes);
  EXPECT_EQ(a.gain, b.gain);
}
