#pragma once

#include <ostream>
#include <vector>

#include "ebos/analysis.hpp"
#include "ebos/config.hpp"

namespace ebos {

// Each command validates the config, echoes it (defaults marked) to `log`, writes the
// effective config to <out>/config.txt and its outputs under <out>. Errors are
// ValidationError (bad input or config) or IoError (files).

/// Writes background.pgm, frames/frame_NNNN.pgm + frames/frames.txt, events.evb (or events.csv),
/// gt/flow_NNNN.flo (px per interval), gt/dq_NNNN.f64 and gt/intervals.txt.
void cmd_simulate(const RunConfig& config, std::ostream& log);

/// Per window NNNN: flow_NNNN.flo (px per window), q_NNNN.f64, p_NNNN.flo, loss_NNNN.txt,
/// flow_NNNN.ppm and q_NNNN.ppm; plus windows.txt. With a frame directory the windows
/// start at frame timestamps, otherwise every `window` seconds from t0.
void cmd_estimate(const RunConfig& config, std::ostream& log);

struct WindowMetrics {
  int index = 0;
  TimeUs t0 = 0;
  TimeUs t1 = 0;
  Metrics metrics;
};

struct EvaluationReport {
  std::vector<WindowMetrics> windows;
  Metrics aggregate;  // pooled over every evaluated pixel of every window
};

/// Compares estimates/flow_NNNN.flo with the ground-truth flow covering the same interval,
/// over pixels with at least one event in the window (and inside the ROI). Writes metrics.csv.
EvaluationReport cmd_evaluate(const RunConfig& config, std::ostream& log);

struct KymoReport {
  Kymogram kymogram;
  std::vector<SlopeEstimate> slopes;
  std::vector<double> velocities;  // m/s, one per slope
};

/// Event-histogram (kymo_source = events) or Poisson-field (kymo_source = fields) kymogram of one
/// column, with slope detection and velocities. Writes kymo.f64, kymo.ppm and slopes.csv.
KymoReport cmd_kymo(const RunConfig& config, std::ostream& log);

/// Color image of a .flo (flow wheel), .f64 (diverging) or .pgm (gray) file into <out>/<stem>.ppm.
void cmd_visualize(const RunConfig& config, std::ostream& log);

/// Events inside the ROI, shifted so the ROI origin becomes (0, 0).
EventStream crop_events(const EventStream& events, const Roi& roi);

}  // namespace ebos
