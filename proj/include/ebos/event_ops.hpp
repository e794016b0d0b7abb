#pragma once

#include <cstddef>

#include "ebos/core.hpp"

namespace ebos {

/// Brightness increment image: C times the per-pixel polarity sum.
struct IncrementImage {
  ScalarField field;
  TimeUs t0 = 0;
  TimeUs t1 = 0;
  double contrast = 0.0;
};

/// Sums polarities pixelwise and scales by the contrast sensitivity.
/// The window is taken from the stream's first and last timestamps (t1 is exclusive).
IncrementImage accumulate_increment(const EventStream& events, double contrast, Resolution resolution);

/// Convolution with a normalized Gaussian truncated at ceil(3 sigma), reflect padding.
ScalarField gaussian_smooth(const ScalarField& field, double sigma);

/// Gaussian-smoothed event-count histogram normalized by its maximum into [0, 1].
/// An empty stream yields the zero field.
ScalarField event_density(const EventStream& events, double sigma, Resolution resolution);

/// Regularizer weight w = 1 - alpha * h. Small where events are dense, 1 where there are none.
/// (The reciprocal form 1 - alpha / h would diverge as h -> 0.)
ScalarField weight_map(const ScalarField& density, double alpha);

struct WarpedEvents {
  EventStream stream;
  std::size_t dropped = 0;
};

/// Transports every event to x - v(x) (t - t_ref), rounding to the nearest pixel.
/// Flow is in px/s. Events leaving the sensor are dropped and counted.
WarpedEvents warp_events(const EventStream& events, const VectorField& flow_px_per_s, TimeUs t_ref);

}  // namespace ebos
