#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ebos/analysis.hpp"
#include "ebos/error.hpp"
#include "streaks.hpp"

namespace ebos {
namespace {

using testing::render_streaks;

TEST(EventMask, Examples) {
  const Resolution res{10, 8};
  const EventStream none({}, res);
  EXPECT_EQ(event_mask(none, Roi::full(res)).count(), 0u);
  const EventStream one({{3, 4, 10, 1}, {3, 4, 20, -1}}, res);
  const Mask m = event_mask(one, Roi::full(res));
  EXPECT_EQ(m.count(), 1u);
  EXPECT_TRUE(m(3, 4));
  const EventStream outside({{0, 0, 5, 1}, {9, 7, 6, 1}, {5, 5, 7, 1}}, res);
  const Mask r = event_mask(outside, {2, 2, 5, 5});
  EXPECT_EQ(r.count(), 1u);
  EXPECT_TRUE(r(5, 5));
  EXPECT_THROW(event_mask(outside, {5, 5, 6, 2}), ValidationError);
}

TEST(Metrics, Examples) {
  const Resolution res{6, 5};
  const Mask all(res, true);
  const VectorField zero(res);
  const Metrics same = compute_metrics(zero, zero, all);
  EXPECT_EQ(same.aee, 0.0);
  EXPECT_EQ(same.pct_out, 0.0);
  EXPECT_EQ(same.ae, 0.0);
  EXPECT_EQ(same.n_pixels, 30u);

  const Metrics unit = compute_metrics(VectorField(res, {1.0, 0.0}), zero, all);
  EXPECT_DOUBLE_EQ(unit.aee, 1.0);
  EXPECT_EQ(unit.pct_out, 0.0);
  EXPECT_NEAR(unit.ae, std::numbers::pi / 4, 1e-15);

  const Metrics two = compute_metrics(VectorField(res, {2.0, 0.0}), zero, all);
  EXPECT_DOUBLE_EQ(two.aee, 2.0);
  EXPECT_EQ(two.pct_out, 100.0);

  Mask partial(res);
  partial.set(1, 1, true);
  partial.set(2, 3, true);
  VectorField est(res);
  est.set(1, 1, {3.0, 4.0});
  const Metrics p = compute_metrics(est, zero, partial);
  EXPECT_EQ(p.n_pixels, 2u);
  EXPECT_DOUBLE_EQ(p.aee, 2.5);
  EXPECT_EQ(p.pct_out, 50.0);

  EXPECT_THROW(compute_metrics(zero, zero, Mask(res)), ValidationError);
  EXPECT_THROW(compute_metrics(zero, VectorField({2, 2}), all), ValidationError);
}

// Independent per-pixel reference using the dot product of explicit 3-vectors.
Metrics brute_force(const VectorField& a, const VectorField& b, const Mask& m) {
  Metrics r;
  double ee = 0, ae = 0, out = 0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      if (!m(x, y)) continue;
      const double p[3] = {a.u()(x, y), a.v()(x, y), 1.0};
      const double q[3] = {b.u()(x, y), b.v()(x, y), 1.0};
      const double d = std::sqrt((p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]));
      double dot = 0, np = 0, nq = 0;
      for (int k = 0; k < 3; ++k) dot += p[k] * q[k], np += p[k] * p[k], nq += q[k] * q[k];
      ee += d;
      ae += std::acos(std::min(1.0, std::max(-1.0, dot / std::sqrt(np * nq))));
      out += d > 1.0 ? 1 : 0;
      ++r.n_pixels;
    }
  }
  r.aee = ee / r.n_pixels;
  r.ae = ae / r.n_pixels;
  r.pct_out = 100.0 * out / r.n_pixels;
  return r;
}

TEST(Metrics, MatchesBruteForceAndIsSymmetric) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> d(-3, 3);
  const Resolution res{16, 16};
  for (int trial = 0; trial < 100; ++trial) {
    VectorField a(res), b(res);
    Mask m(res);
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) {
        a.set(x, y, {d(rng), d(rng)});
        b.set(x, y, {d(rng), d(rng)});
        m.set(x, y, rng() % 3 != 0);
      }
    m.set(0, 0, true);
    const Metrics got = compute_metrics(a, b, m);
    const Metrics ref = brute_force(a, b, m);
    EXPECT_NEAR(got.aee, ref.aee, 1e-12);
    EXPECT_NEAR(got.ae, ref.ae, 1e-12);
    EXPECT_NEAR(got.pct_out, ref.pct_out, 1e-12);
    EXPECT_EQ(got.n_pixels, ref.n_pixels);
    const Metrics swapped = compute_metrics(b, a, m);
    EXPECT_NEAR(swapped.aee, got.aee, 1e-12);
    EXPECT_NEAR(swapped.ae, got.ae, 1e-12);
    EXPECT_EQ(swapped.pct_out, got.pct_out);
    EXPECT_GE(got.ae, 0.0);
    EXPECT_LE(got.ae, std::numbers::pi);
  }
}

TEST(Kymogram, ConstantAndShape) {
  std::vector<ScalarField> src(7, ScalarField({12, 10}, 0.25));
  const Kymogram k = build_kymogram(src, 4, 2, 9, 1200.0);
  EXPECT_EQ(k.values.width(), 7);
  EXPECT_EQ(k.values.height(), 7);
  for (double v : k.values.values()) EXPECT_EQ(v, 0.25);
  EXPECT_EQ(k.column, 4);
  EXPECT_EQ(k.row_begin, 2);
  EXPECT_THROW(build_kymogram(src, 12, 0, 5, 1.0), ValidationError);
  EXPECT_THROW(build_kymogram(src, 0, 5, 11, 1.0), ValidationError);
  EXPECT_THROW(build_kymogram({}, 0, 0, 1, 1.0), ValidationError);
}

TEST(Kymogram, MovingPixelIsDiagonal) {
  std::vector<ScalarField> src;
  for (int i = 0; i < 8; ++i) {
    ScalarField f({5, 10});
    f(2, i + 1) = 1.0;
    src.push_back(f);
  }
  const Kymogram k = build_kymogram(src, 2, 1, 9, 100.0);
  EXPECT_EQ(k.values.height(), 8);
  for (int t = 0; t < 8; ++t)
    for (int x = 0; x < 8; ++x) EXPECT_EQ(k.values(x, t), x == t ? 1.0 : 0.0);
}

TEST(Kymogram, EventHistogramBins) {
  const Resolution res{4, 6};
  // rate 1000 rows/s -> 1 ms bins
  const EventStream ev({{1, 2, 100, 1}, {1, 2, 900, -1}, {1, 3, 1500, 1}, {2, 3, 1500, 1}, {1, 5, 2999, 1},
                        {1, 1, 3000, 1}},
                       res);
  const Kymogram k = build_event_kymogram(ev, 1, 1, 6, 1000.0, 0, 3000);
  EXPECT_EQ(k.values.height(), 3);
  EXPECT_EQ(k.values.width(), 5);
  EXPECT_EQ(k.values(1, 0), 2.0);
  EXPECT_EQ(k.values(2, 1), 1.0);
  EXPECT_EQ(k.values(4, 2), 1.0);
  EXPECT_EQ(k.values.sum(), 4.0);
  EXPECT_THROW(build_event_kymogram(ev, 1, 1, 6, 1000.0, 10, 10), ValidationError);
}

TEST(DetectSlope, KnownAngles) {
  for (double deg : {-60.0, -45.0, -30.0, -15.0, 15.0, 30.0, 45.0, 60.0}) {
    const Kymogram k = render_streaks(64, 64, deg, 1200.0);
    const auto s = detect_slope(k, 64, 1.0);
    ASSERT_EQ(s.size(), 1u);
    const double truth = std::tan(deg * std::numbers::pi / 180.0) * 1200.0;
    EXPECT_NEAR(s[0].px_per_s / truth, 1.0, 0.05) << deg;
    EXPECT_GT(s[0].confidence, 1.0);
  }
}

TEST(DetectSlope, JetSpeed) {
  const double rate = 1200.0, slope = 2413.0;
  const Kymogram k = render_streaks(64, 64, std::atan(slope / rate) * 180.0 / std::numbers::pi, rate);
  const auto s = detect_slope(k, 64, 1.0);
  EXPECT_NEAR(s[0].px_per_s / slope, 1.0, 0.05);
}

TEST(DetectSlope, StationaryPattern) {
  const Kymogram k = render_streaks(48, 48, 0.0, 500.0);
  const auto s = detect_slope(k, 48, 1.0);
  EXPECT_NEAR(s[0].angle_deg, 0.0, 0.5);
}

TEST(DetectSlope, RotationEquivariance) {
  for (double base : {-20.0, 5.0, 33.0}) {
    const double extra = 7.3;
    const auto a = detect_slope(render_streaks(64, 64, base, 1.0), 64, 1.0);
    const auto b = detect_slope(render_streaks(64, 64, base + extra, 1.0), 64, 1.0);
    EXPECT_NEAR(b[0].angle_deg - a[0].angle_deg, extra, 0.25) << base;
  }
}

TEST(DetectSlope, AffineIntensityInvariance) {
  Kymogram k = render_streaks(64, 64, 22.0, 800.0);
  const auto a = detect_slope(k, 32, 1.0);
  for (double& v : k.values.values()) v = 3.5 * v - 0.7;
  const auto b = detect_slope(k, 32, 1.0);
  ASSERT_EQ(a.size(), 4u);
  ASSERT_EQ(b.size(), 4u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i].angle_deg, b[i].angle_deg, 1e-9);
}

TEST(DetectSlope, TilesAndErrors) {
  const Kymogram k = render_streaks(70, 40, 10.0, 1.0);
  const auto s = detect_slope(k, 20, 1.0);
  ASSERT_EQ(s.size(), 6u);  // 3 full tiles across, 2 down
  EXPECT_EQ(s[5].col0, 40);
  EXPECT_EQ(s[5].row0, 20);
  EXPECT_THROW(detect_slope(k, 41, 1.0), ValidationError);
}

TEST(VelocityFromSlope, JetAnchorAndLinearity) {
  BosGeometry g;
  const double v = velocity_from_slope(166.0 / 0.0688, g);
  EXPECT_NEAR(v, 166.0 / 0.0688 * 4.86e-6 * 1.7 / 0.025, 1e-12);
  EXPECT_NEAR(v, 0.797, 0.001);
  EXPECT_NEAR(v / 0.8052193, 1.0, 0.02);
  EXPECT_EQ(velocity_from_slope(0.0, g), 0.0);
  EXPECT_NEAR(velocity_from_slope(2 * 1234.5, g), 2 * velocity_from_slope(1234.5, g), 1e-15);
}

TEST(VelocityFromSlope, RoundTripThroughDetection) {
  BosGeometry g;
  const double speed = 0.6;  // m/s in the object plane
  const double rate = 1000.0;
  const double px_per_s = speed * g.focal_length / (g.lens_to_object * g.pixel_pitch);
  const Kymogram k = render_streaks(64, 64, std::atan(px_per_s / rate) * 180.0 / std::numbers::pi, rate);
  const auto s = detect_slope(k, 64, 1.0);
  EXPECT_NEAR(velocity_from_slope(s[0].px_per_s, g) / speed, 1.0, 0.05);
}

}  // namespace
}  // namespace ebos
