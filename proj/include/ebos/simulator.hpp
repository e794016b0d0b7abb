#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ebos/core.hpp"

namespace ebos {

struct SimConfig {
  double contrast_pos = 0.05;
  double contrast_neg = 0.05;
  TimeUs refractory = 0;
  double fps = 120.0;
  std::uint64_t seed = 0;
  double dot_density = 0.05;  // dot centers per pixel
  double dot_radius = 1.5;    // px
  double log_offset = 1e-3;   // log(I + offset)

  void validate() const;
};

/// Linear intensity of the dots rendered by render_background (background is 1).
inline constexpr double kDotIntensity = 0.1;

/// White field with round, anti-aliased dark dots at seeded uniform-random centers.
/// The number of dots is round(dot_density * width * height).
ScalarField render_background(Resolution resolution, double dot_density, double dot_radius, std::uint64_t seed);

/// Backward warp: out(x) = frame(x - d(x)), bilinear with reflect padding.
ScalarField warp_frame(const ScalarField& frame, const VectorField& displacement);

struct Frame {
  TimeUs t = 0;
  ScalarField image;  // linear intensity
};
using FrameSequence = std::vector<Frame>;

/// Density proxy as a function of time in seconds.
using ScalarSource = std::function<ScalarField(double)>;

struct SyntheticScene {
  FrameSequence frames;
  std::vector<VectorField> displacements;  // per frame, px, against the background
  std::vector<VectorField> gt_flows;       // per interval [t_i, t_i+1), px per interval
  std::vector<ScalarField> gt_q;           // per interval, scaled change of the density proxy
  double scale = 0.0;                      // px of displacement per unit gradient of the source
};

/// Number of frames for a duration at a frame rate: floor(duration * fps), at least 2 when duration > 0.
int frame_count(double duration, double fps);

/// Frame timestamp round(i * 1e6 / fps) in microseconds.
TimeUs frame_time(int index, double fps);

/// Displacements are the Sobel gradient of the source, scaled so the largest
/// magnitude over the whole sequence equals peak_displacement.
SyntheticScene synth_scene(const ScalarField& background, const ScalarSource& source, double duration, double fps,
                           double peak_displacement);

/// Gaussian density blobs drifting at a constant velocity with a sinusoidal amplitude modulation.
struct PlumeConfig {
  int blobs = 6;
  double blob_sigma = 20.0;      // px
  double velocity_x = 0.0;       // px/s
  double velocity_y = -240.0;    // px/s, negative rises
  double modulation = 0.3;       // relative amplitude of the pulsation
  double modulation_hz = 6.0;
  std::uint64_t seed = 0;
};

ScalarSource plume_source(Resolution resolution, const PlumeConfig& config);

/// Threshold-crossing event generation on piecewise-linear log intensity.
/// Crossing times are solved exactly on each segment and rounded to whole microseconds.
/// Throws ValidationError with fewer than two frames or non-increasing timestamps.
EventStream simulate_events(const FrameSequence& frames, const SimConfig& config);

}  // namespace ebos
