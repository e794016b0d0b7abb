#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "ebos/error.hpp"
#include "ebos/io.hpp"
#include "ebos/visualize.hpp"
#include "temp_dir.hpp"

namespace ebos {
namespace {

using testing::TempDir;

std::string bytes_of(const std::filesystem::path& p) { return io::read_text(p); }

VectorField random_flow(Resolution res, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> d(-5.0f, 5.0f);  // float-representable values survive .flo exactly
  VectorField f(res);
  for (int y = 0; y < res.height; ++y)
    for (int x = 0; x < res.width; ++x) f.set(x, y, {d(rng), d(rng)});
  return f;
}

EventStream random_events(Resolution res, int n, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::vector<Event> ev;
  TimeUs t = 0;
  for (int i = 0; i < n; ++i) {
    t += static_cast<TimeUs>(rng() % 50);
    ev.push_back({static_cast<int>(rng() % res.width), static_cast<int>(rng() % res.height), t, rng() % 2 ? 1 : -1});
  }
  return EventStream(std::move(ev), res);
}

TEST(Flo, RoundTripIsExactAndRewriteIsByteIdentical) {
  TempDir dir;
  const VectorField f = random_flow({13, 7}, 1);
  io::write_flo(dir / "a.flo", f);
  const VectorField g = io::read_flo(dir / "a.flo");
  EXPECT_EQ(f, g);
  io::write_flo(dir / "b.flo", g);
  EXPECT_EQ(bytes_of(dir / "a.flo"), bytes_of(dir / "b.flo"));
  EXPECT_EQ(bytes_of(dir / "a.flo").size(), 12u + 13u * 7u * 8u);
}

TEST(Flo, HeaderLayout) {
  TempDir dir;
  io::write_flo(dir / "a.flo", VectorField({3, 2}, {1.0, -1.0}));
  const std::string b = bytes_of(dir / "a.flo");
  EXPECT_EQ(b.substr(0, 4), "PIEH");  // 202021.25f little-endian
  EXPECT_EQ(static_cast<unsigned char>(b[4]), 3);
  EXPECT_EQ(static_cast<unsigned char>(b[8]), 2);
}

TEST(Flo, RejectsWrongMagicAndTruncation) {
  TempDir dir;
  io::write_text(dir / "bad.flo", "not a flow file at all");
  EXPECT_THROW(io::read_flo(dir / "bad.flo"), IoError);
  io::write_flo(dir / "a.flo", VectorField({4, 4}));
  std::string b = bytes_of(dir / "a.flo");
  b.resize(b.size() - 3);
  io::write_text(dir / "t.flo", b);
  EXPECT_THROW(io::read_flo(dir / "t.flo"), IoError);
  EXPECT_THROW(io::read_flo(dir / "missing.flo"), IoError);
}

TEST(Events, TextRoundTrip) {
  TempDir dir;
  const EventStream s = random_events({40, 30}, 500, 2);
  io::write_events(dir / "e.csv", s);
  EXPECT_EQ(io::read_events(dir / "e.csv", s.resolution()), s);
  io::write_events(dir / "f.csv", io::read_events(dir / "e.csv", s.resolution()));
  EXPECT_EQ(bytes_of(dir / "e.csv"), bytes_of(dir / "f.csv"));
}

TEST(Events, TextInfersResolutionFromLargestCoordinate) {
  TempDir dir;
  io::write_text(dir / "e.csv", "t_us,x,y,p\n0,4,1,1\n5,2,9,-1\n");
  const EventStream s = io::read_events(dir / "e.csv");
  EXPECT_EQ(s.resolution(), (Resolution{5, 10}));
  EXPECT_EQ(s.size(), 2u);
}

TEST(Events, TextRejectsMalformedAndSortsByTime) {
  TempDir dir;
  io::write_text(dir / "a.csv", "t_us,x,y,p\n0,1,1,1\nzz,1,1,1\n");
  EXPECT_THROW(io::read_events(dir / "a.csv"), IoError);
  io::write_text(dir / "b.csv", "t_us,x,y,p\n10,1,1,1\n5,1,1,1\n");
  const EventStream sorted = io::read_events(dir / "b.csv");
  ASSERT_EQ(sorted.size(), 2u);
  EXPECT_EQ(sorted[0].t, 5);
  io::write_text(dir / "c.csv", "t_us,x,y,p\n0,8,1,1\n");
  EXPECT_THROW(io::read_events(dir / "c.csv", Resolution{4, 4}), ValidationError);
}

TEST(Events, BinaryRoundTripKeepsResolution) {
  TempDir dir;
  const EventStream s = random_events({64, 48}, 1000, 3);
  io::write_events(dir / "e.evb", s);
  const EventStream r = io::read_events(dir / "e.evb");
  EXPECT_EQ(r, s);
  EXPECT_EQ(r.resolution(), (Resolution{64, 48}));
  io::write_events(dir / "f.evb", r);
  EXPECT_EQ(bytes_of(dir / "e.evb"), bytes_of(dir / "f.evb"));
  EXPECT_EQ(bytes_of(dir / "e.evb").size(), 16u + 1000u * 16u);
}

TEST(Events, BinaryResolutionMismatchIsRejected) {
  TempDir dir;
  io::write_events(dir / "e.evb", random_events({8, 8}, 10, 4));
  EXPECT_THROW(io::read_events(dir / "e.evb", Resolution{9, 8}), ValidationError);
}

TEST(Events, EmptyStreamRoundTrips) {
  TempDir dir;
  const EventStream s({}, {5, 5});
  io::write_events(dir / "e.evb", s);
  EXPECT_EQ(io::read_events(dir / "e.evb"), s);
}

TEST(Pgm, QuantizesToSixteenBits) {
  TempDir dir;
  ScalarField img({5, 3});
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = static_cast<double>(i) / 14.0;
  img[0] = -0.5;  // clamped
  img[1] = 2.0;
  io::write_pgm16(dir / "a.pgm", img);
  const ScalarField r = io::read_pgm16(dir / "a.pgm");
  ASSERT_EQ(r.resolution(), img.resolution());
  EXPECT_EQ(r[0], 0.0);
  EXPECT_EQ(r[1], 1.0);
  for (std::size_t i = 2; i < img.size(); ++i) EXPECT_NEAR(r[i], img[i], 0.5 / 65535.0 + 1e-15);
  io::write_pgm16(dir / "b.pgm", r);
  EXPECT_EQ(bytes_of(dir / "a.pgm"), bytes_of(dir / "b.pgm"));
  EXPECT_EQ(bytes_of(dir / "a.pgm").substr(0, 2), "P5");
}

TEST(Pgm, ReadsEightBitFiles) {
  TempDir dir;
  std::string b = "P5\n# comment\n2 1\n255\n";
  b += static_cast<char>(0);
  b += static_cast<char>(255);
  io::write_text(dir / "a.pgm", b);
  const ScalarField r = io::read_pgm16(dir / "a.pgm");
  EXPECT_EQ(r(0, 0), 0.0);
  EXPECT_EQ(r(1, 0), 1.0);
}

TEST(Scalar, RoundTripIsBitExact) {
  TempDir dir;
  std::mt19937 rng(5);
  std::normal_distribution<double> d;
  ScalarField f({9, 11});
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = d(rng);
  f[3] = -0.0;
  io::write_scalar(dir / "a.f64", f);
  const ScalarField r = io::read_scalar(dir / "a.f64");
  EXPECT_EQ(r, f);
  EXPECT_TRUE(std::signbit(r[3]));
  io::write_scalar(dir / "b.f64", r);
  EXPECT_EQ(bytes_of(dir / "a.f64"), bytes_of(dir / "b.f64"));
}

TEST(Ppm, RoundTrip) {
  TempDir dir;
  io::RgbImage img({4, 3});
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(i * 7);
  io::write_ppm(dir / "a.ppm", img);
  const io::RgbImage r = io::read_ppm(dir / "a.ppm");
  EXPECT_EQ(r.resolution, img.resolution);
  EXPECT_EQ(r.pixels, img.pixels);
}

TEST(Visualize, ZeroFlowIsWhite) {
  const io::RgbImage img = visualize_flow(VectorField({2, 2}));
  for (std::uint8_t c : img.pixels) EXPECT_EQ(c, 255);
}

TEST(Visualize, UnitXFlowIsRed) {
  const io::RgbImage img = visualize_flow(VectorField({1, 1}, {1.0, 0.0}));
  EXPECT_EQ(img.at(0, 0)[0], 255);
  EXPECT_EQ(img.at(0, 0)[1], 0);
  EXPECT_EQ(img.at(0, 0)[2], 0);
}

TEST(Visualize, NegatedFlowIsComplementaryHue) {
  // Full saturation at value 1: a hue shift of 180 degrees maps (r, g, b) to (255 - r, ...)
  // exactly when one channel is 255 and one is 0.
  std::mt19937 rng(6);
  std::uniform_real_distribution<double> d(-M_PI, M_PI);
  for (int k = 0; k < 50; ++k) {
    const double a = d(rng);
    const io::RgbImage p = visualize_flow(VectorField({1, 1}, {std::cos(a), std::sin(a)}), 1.0);
    const io::RgbImage n = visualize_flow(VectorField({1, 1}, {-std::cos(a), -std::sin(a)}), 1.0);
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(p.at(0, 0)[c] + n.at(0, 0)[c], 255, 1) << a;
  }
}

TEST(Visualize, SaturationGrowsWithMagnitude) {
  VectorField f({3, 1});
  f.set(0, 0, {0.25, 0});
  f.set(1, 0, {0.5, 0});
  f.set(2, 0, {1.0, 0});
  const io::RgbImage img = visualize_flow(f);
  EXPECT_GT(img.at(0, 0)[1], img.at(1, 0)[1]);
  EXPECT_GT(img.at(1, 0)[1], img.at(2, 0)[1]);
}

TEST(Visualize, SignedAndGray) {
  ScalarField f({3, 1});
  f[0] = -1.0;
  f[2] = 1.0;
  const io::RgbImage s = visualize_signed(f);
  EXPECT_GT(s.at(2, 0)[0], s.at(2, 0)[2]);
  EXPECT_GT(s.at(0, 0)[2], s.at(0, 0)[0]);
  EXPECT_EQ(s.at(1, 0)[0], 255);
  const io::RgbImage g = visualize_gray(f);
  EXPECT_EQ(g.at(0, 0)[0], 0);
  EXPECT_EQ(g.at(2, 0)[1], 255);
}

}  // namespace
}  // namespace ebos
