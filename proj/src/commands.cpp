#include "ebos/commands.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "ebos/bos_physics.hpp"
#include "ebos/error.hpp"
#include "ebos/io.hpp"
#include "ebos/visualize.hpp"

namespace ebos {

namespace fs = std::filesystem;

namespace {

std::string indexed(const char* stem, int i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04d%s", stem, i, ext);
  return buf;
}

std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

fs::path start(const RunConfig& config, std::ostream& log, const char* command) {
  config.validate();
  const fs::path out(config.out);
  io::ensure_directory(out);
  log << "[" << command << "] effective configuration:\n" << render_config(config, true);
  io::write_text(out / "config.txt", render_config(config, false));
  return out;
}

fs::path require_path(const std::string& value, const char* key) {
  if (value.empty()) throw ValidationError("missing required setting '" + std::string(key) + "'");
  return fs::path(value);
}

// Integer CSV with one header line.
std::vector<std::vector<long long>> read_table(const fs::path& path) {
  const std::string text = io::read_text(path);
  std::vector<std::vector<long long>> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<long long> row;
    const char* p = line.data();
    const char* e = p + line.size();
    while (p < e) {
      long long v = 0;
      auto [next, ec] = std::from_chars(p, e, v);
      if (ec != std::errc() || (next != e && *next != ',')) {
        throw IoError("malformed line " + std::to_string(line_no) + " in '" + path.string() + "'");
      }
      row.push_back(v);
      p = next + 1;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

struct FrameRef {
  TimeUs t = 0;
  fs::path path;
};

// A frame directory (frames.txt + frame_NNNN.pgm) or a single image.
std::vector<FrameRef> list_frames(const fs::path& frames) {
  if (fs::is_directory(frames)) {
    std::vector<FrameRef> refs;
    for (const auto& row : read_table(frames / "frames.txt")) {
      if (row.size() < 2) throw IoError("frames.txt needs index,t_us columns");
      refs.push_back({row[1], frames / indexed("frame", static_cast<int>(row[0]), ".pgm")});
    }
    if (refs.empty()) throw ValidationError("no frames listed in '" + (frames / "frames.txt").string() + "'");
    return refs;
  }
  if (!fs::exists(frames)) throw IoError("frame file '" + frames.string() + "' does not exist");
  return {{0, frames}};
}

std::string loss_table(const EstimationResult& r) {
  std::string s = "level,iteration,objective\n";
  for (std::size_t l = 0; l < r.loss_trace.size(); ++l)
    for (std::size_t k = 0; k < r.loss_trace[l].size(); ++k)
      s += std::to_string(l) + "," + std::to_string(k) + "," + fmt(r.loss_trace[l][k]) + "\n";
  return s;
}

struct Window {
  int index = 0;
  TimeUs t0 = 0;
  TimeUs t1 = 0;
};

}  // namespace

EventStream crop_events(const EventStream& events, const Roi& roi) {
  if (!roi.fits(events.resolution())) {
    throw ValidationError("ROI " + to_string(roi) + " exceeds sensor " + to_string(events.resolution()));
  }
  std::vector<Event> kept;
  for (const Event& e : events)
    if (roi.contains(e.x, e.y)) kept.push_back({e.x - roi.x0, e.y - roi.y0, e.t, e.polarity});
  return EventStream(std::move(kept), {roi.width, roi.height});
}

void cmd_simulate(const RunConfig& config, std::ostream& log) {
  const fs::path out = start(config, log, "simulate");
  const Resolution res{config.scene.width, config.scene.height};
  const ScalarField background = render_background(res, config.sim.dot_density, config.sim.dot_radius, config.sim.seed);
  PlumeConfig plume = config.scene.plume;
  plume.seed = config.sim.seed + 1;
  const SyntheticScene scene =
      synth_scene(background, plume_source(res, plume), config.scene.duration, config.sim.fps, config.scene.peak_displacement);
  const EventStream events = simulate_events(scene.frames, config.sim);

  io::write_pgm16(out / "background.pgm", background);
  io::ensure_directory(out / "frames");
  std::string frame_index = "index,t_us\n";
  for (std::size_t i = 0; i < scene.frames.size(); ++i) {
    io::write_pgm16(out / "frames" / indexed("frame", static_cast<int>(i), ".pgm"), scene.frames[i].image);
    frame_index += std::to_string(i) + "," + std::to_string(scene.frames[i].t) + "\n";
  }
  io::write_text(out / "frames" / "frames.txt", frame_index);

  const fs::path event_path = out / (config.event_format == "text" ? "events.csv" : "events.evb");
  io::write_events(event_path, events);

  io::ensure_directory(out / "gt");
  std::string intervals = "index,t0_us,t1_us\n";
  for (std::size_t i = 0; i < scene.gt_flows.size(); ++i) {
    io::write_flo(out / "gt" / indexed("flow", static_cast<int>(i), ".flo"), scene.gt_flows[i]);
    io::write_scalar(out / "gt" / indexed("dq", static_cast<int>(i), ".f64"), scene.gt_q[i]);
    intervals += std::to_string(i) + "," + std::to_string(scene.frames[i].t) + "," +
                 std::to_string(scene.frames[i + 1].t) + "\n";
  }
  io::write_text(out / "gt" / "intervals.txt", intervals);
  log << "[simulate] " << scene.frames.size() << " frames, " << scene.gt_flows.size() << " ground-truth flows, "
      << events.size() << " events -> " << event_path.string() << "\n";
}

void cmd_estimate(const RunConfig& config, std::ostream& log) {
  const fs::path out = start(config, log, "estimate");
  const fs::path frames_path = require_path(config.frames, "frames");
  const fs::path events_path = require_path(config.events, "events");
  const std::vector<FrameRef> frames = list_frames(frames_path);
  if (!fs::exists(events_path)) throw IoError("event file '" + events_path.string() + "' does not exist");

  ScalarField first = io::read_pgm16(frames.front().path);
  EventStream events = io::read_events(events_path, first.resolution());
  if (events.empty()) throw ValidationError("event file '" + events_path.string() + "' holds no events");
  const Roi roi = config.roi.value_or(Roi::full(first.resolution()));
  if (config.roi) events = crop_events(events, roi);

  const TimeUs span = config.estimator.window_us();
  const TimeUs t_end = config.t1.value_or(events.events().back().t + 1);
  std::vector<std::pair<Window, std::size_t>> windows;  // window, frame index
  if (frames.size() > 1) {
    const TimeUs t_begin = config.t0.value_or(frames.front().t);
    for (std::size_t f = 0; f < frames.size(); ++f) {
      if (frames[f].t < t_begin || frames[f].t + span > t_end) continue;
      windows.push_back({{static_cast<int>(windows.size()), frames[f].t, frames[f].t + span}, f});
    }
  } else {
    const TimeUs t_begin = config.t0.value_or(events.events().front().t);
    for (TimeUs t = t_begin; t + span <= t_end; t += span) windows.push_back({{static_cast<int>(windows.size()), t, t + span}, 0});
  }
  if (windows.empty()) throw ValidationError("no complete estimation window fits in the requested time range");

  std::string index = "index,t0_us,t1_us\n";
  for (const auto& [w, f] : windows) {
    ScalarField frame = f == 0 ? first : io::read_pgm16(frames[f].path);
    if (config.roi) frame = crop(frame, roi);
    EstimationResult r;
    try {
      r = estimate(events, frame, w.t0, config.estimator);
    } catch (const ValidationError& e) {
      throw ValidationError("window " + std::to_string(w.index) + " [" + std::to_string(w.t0) + ", " +
                            std::to_string(w.t1) + ") us: " + e.what());
    }
    io::write_flo(out / indexed("flow", w.index, ".flo"), r.v);
    io::write_scalar(out / indexed("q", w.index, ".f64"), r.q);
    io::write_flo(out / indexed("p", w.index, ".flo"), r.p);
    io::write_text(out / indexed("loss", w.index, ".txt"), loss_table(r));
    io::write_ppm(out / indexed("flow", w.index, ".ppm"), visualize_flow(r.v, config.max_magnitude));
    io::write_ppm(out / indexed("q", w.index, ".ppm"), visualize_signed(r.q));
    index += std::to_string(w.index) + "," + std::to_string(w.t0) + "," + std::to_string(w.t1) + "\n";
    log << "[estimate] window " << w.index << " [" << w.t0 << ", " << w.t1 << ") objective "
        << fixed(r.level_objective.back(), 4) << " scale " << fixed(r.scale_factor, 3) << "\n";
  }
  io::write_text(out / "windows.txt", index);
}

EvaluationReport cmd_evaluate(const RunConfig& config, std::ostream& log) {
  const fs::path out = start(config, log, "evaluate");
  const fs::path est_dir = require_path(config.estimates, "estimates");
  const fs::path gt_dir = require_path(config.gt, "gt");
  const fs::path events_path = require_path(config.events, "events");

  std::vector<Window> windows;
  for (const auto& row : read_table(est_dir / "windows.txt")) {
    if (row.size() < 3) throw IoError("windows.txt needs index,t0_us,t1_us columns");
    windows.push_back({static_cast<int>(row[0]), row[1], row[2]});
  }
  if (windows.empty()) throw ValidationError("no windows listed in '" + (est_dir / "windows.txt").string() + "'");
  std::vector<Window> intervals;
  if (fs::exists(gt_dir / "intervals.txt")) {
    for (const auto& row : read_table(gt_dir / "intervals.txt")) {
      if (row.size() < 3) throw IoError("intervals.txt needs index,t0_us,t1_us columns");
      intervals.push_back({static_cast<int>(row[0]), row[1], row[2]});
    }
  }

  EvaluationReport report;
  std::optional<EventStream> events;
  double weighted_aee = 0, weighted_ae = 0, weighted_out = 0;
  std::size_t total = 0;
  for (const Window& w : windows) {
    int gt_index = w.index;
    if (!intervals.empty()) {
      gt_index = -1;
      for (const Window& i : intervals)
        if (i.t0 == w.t0) gt_index = i.index;
      if (gt_index < 0) throw ValidationError("no ground-truth interval starts at t = " + std::to_string(w.t0) + " us");
    }
    VectorField gt = io::read_flo(gt_dir / indexed("flow", gt_index, ".flo"));
    VectorField est = io::read_flo(est_dir / indexed("flow", w.index, ".flo"));
    if (!events) events = io::read_events(events_path, gt.resolution());
    const Roi roi = config.roi.value_or(Roi::full(gt.resolution()));
    if (!roi.fits(gt.resolution())) throw ValidationError("ROI " + to_string(roi) + " exceeds the flow field");
    if (est.resolution() == gt.resolution()) {
      est = crop(est, roi);
    } else if (!(est.resolution() == Resolution{roi.width, roi.height})) {
      throw ValidationError("estimated flow " + to_string(est.resolution()) + " matches neither the ground truth " +
                            to_string(gt.resolution()) + " nor the ROI");
    }
    gt = crop(gt, roi);
    const EventStream in_window = crop_events(slice_events(*events, w.t0, w.t1), roi);
    const Mask mask = event_mask(in_window, Roi::full(in_window.resolution()));
    const Metrics m = compute_metrics(est, gt, mask);
    report.windows.push_back({w.index, w.t0, w.t1, m});
    const double n = static_cast<double>(m.n_pixels);
    weighted_aee += n * m.aee;
    weighted_ae += n * m.ae;
    weighted_out += n * m.pct_out;
    total += m.n_pixels;
  }
  report.aggregate.n_pixels = total;
  report.aggregate.aee = weighted_aee / static_cast<double>(total);
  report.aggregate.ae = weighted_ae / static_cast<double>(total);
  report.aggregate.pct_out = weighted_out / static_cast<double>(total);

  std::string csv = "window,t0_us,t1_us,n_pixels,aee_px,pct_out,ae_rad\n";
  auto csv_row = [&](const std::string& label, TimeUs t0, TimeUs t1, const Metrics& m) {
    csv += label + "," + std::to_string(t0) + "," + std::to_string(t1) + "," + std::to_string(m.n_pixels) + "," +
           fmt(m.aee) + "," + fmt(m.pct_out) + "," + fmt(m.ae) + "\n";
  };
  log << "window        t0_us        t1_us   pixels    AEE[px]   %Out   AE[rad]\n";
  char line[160];
  for (const WindowMetrics& w : report.windows) {
    csv_row(std::to_string(w.index), w.t0, w.t1, w.metrics);
    std::snprintf(line, sizeof line, "%6d %12lld %12lld %8zu %10.4f %6.2f %9.4f\n", w.index,
                  static_cast<long long>(w.t0), static_cast<long long>(w.t1), w.metrics.n_pixels, w.metrics.aee,
                  w.metrics.pct_out, w.metrics.ae);
    log << line;
  }
  csv_row("all", windows.front().t0, windows.back().t1, report.aggregate);
  std::snprintf(line, sizeof line, "   all %12s %12s %8zu %10.4f %6.2f %9.4f\n", "", "", total, report.aggregate.aee,
                report.aggregate.pct_out, report.aggregate.ae);
  log << line;
  io::write_text(out / "metrics.csv", csv);
  return report;
}

KymoReport cmd_kymo(const RunConfig& config, std::ostream& log) {
  const fs::path out = start(config, log, "kymo");
  KymoReport report;
  if (config.kymo.source == "events") {
    const fs::path events_path = require_path(config.events, "events");
    const EventStream events = io::read_events(events_path);
    if (events.empty()) throw ValidationError("event file '" + events_path.string() + "' holds no events");
    const Resolution res = events.resolution();
    const int column = config.kymo.column < 0 ? res.width / 2 : config.kymo.column;
    const int row_end = config.kymo.row_end < 0 ? res.height : config.kymo.row_end;
    const TimeUs t0 = config.t0.value_or(events.events().front().t);
    const TimeUs t1 = config.t1.value_or(events.events().back().t + 1);
    report.kymogram = build_event_kymogram(events, column, config.kymo.row_begin, row_end, config.kymo.rate, t0, t1);
  } else {
    const fs::path est_dir = require_path(config.estimates, "estimates");
    std::vector<ScalarField> fields;
    std::vector<Window> windows;
    for (const auto& row : read_table(est_dir / "windows.txt")) {
      if (row.size() < 3) throw IoError("windows.txt needs index,t0_us,t1_us columns");
      windows.push_back({static_cast<int>(row[0]), row[1], row[2]});
      fields.push_back(io::read_scalar(est_dir / indexed("q", windows.back().index, ".f64")));
    }
    if (fields.empty()) throw ValidationError("no Poisson fields listed in '" + est_dir.string() + "'");
    const Resolution res = fields.front().resolution();
    const int column = config.kymo.column < 0 ? res.width / 2 : config.kymo.column;
    const int row_end = config.kymo.row_end < 0 ? res.height : config.kymo.row_end;
    const double rate = 1e6 / static_cast<double>(windows.front().t1 - windows.front().t0);
    report.kymogram = build_kymogram(fields, column, config.kymo.row_begin, row_end, rate);
  }
  report.slopes = detect_slope(report.kymogram, config.kymo.patch, config.kymo.sigma);
  std::string csv = "row0,col0,angle_deg,px_per_s,velocity_m_s,confidence\n";
  log << "[kymo] " << report.kymogram.values.height() << " rows x " << report.kymogram.values.width()
      << " px at " << fmt(report.kymogram.rate) << " rows/s, column " << report.kymogram.column << "\n";
  for (const SlopeEstimate& s : report.slopes) {
    const double v = velocity_from_slope(s.px_per_s, config.geometry);
    report.velocities.push_back(v);
    csv += std::to_string(s.row0) + "," + std::to_string(s.col0) + "," + fmt(s.angle_deg) + "," + fmt(s.px_per_s) +
           "," + fmt(v) + "," + fmt(s.confidence) + "\n";
    log << "  tile (row " << s.row0 << ", col " << s.col0 << "): " << fixed(s.angle_deg, 2) << " deg, "
        << fixed(s.px_per_s, 1) << " px/s, " << fixed(v, 4) << " m/s (confidence " << fixed(s.confidence, 2) << ")\n";
  }
  io::write_scalar(out / "kymo.f64", report.kymogram.values);
  io::write_ppm(out / "kymo.ppm", visualize_gray(report.kymogram.values));
  io::write_text(out / "slopes.csv", csv);
  return report;
}

void cmd_visualize(const RunConfig& config, std::ostream& log) {
  const fs::path out = start(config, log, "visualize");
  const fs::path input = require_path(config.input, "input");
  const std::string ext = input.extension().string();
  io::RgbImage image;
  if (ext == ".flo") {
    image = visualize_flow(io::read_flo(input), config.max_magnitude);
  } else if (ext == ".f64") {
    image = visualize_signed(io::read_scalar(input), config.max_magnitude);
  } else if (ext == ".pgm") {
    image = visualize_gray(io::read_pgm16(input));
  } else {
    throw ValidationError("cannot visualize '" + input.string() + "': expected .flo, .f64 or .pgm");
  }
  const fs::path target = out / (input.stem().string() + ".ppm");
  io::write_ppm(target, image);
  log << "[visualize] " << input.string() << " -> " << target.string() << "\n";
}

}  // namespace ebos
