#include "ebos/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ebos/error.hpp"

namespace ebos {

std::string to_string(const Resolution& r) {
  return std::to_string(r.width) + "x" + std::to_string(r.height);
}

std::string to_string(const Roi& roi) {
  std::ostringstream os;
  os << roi.x0 << "," << roi.y0 << "," << roi.width << "," << roi.height;
  return os.str();
}

EventStream::EventStream(std::vector<Event> events, Resolution resolution)
    : events_(std::move(events)), resolution_(resolution) {}

ScalarField::ScalarField(Resolution res, double fill) : res_(res), values_(res.pixels(), fill) {
  if (res.width < 0 || res.height < 0) throw ValidationError("negative field resolution");
}

ScalarField::ScalarField(Resolution res, std::vector<double> values) : res_(res), values_(std::move(values)) {
  if (values_.size() != res.pixels()) {
    throw ValidationError("field data size " + std::to_string(values_.size()) + " does not match " +
                          to_string(res));
  }
}

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField::sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

double ScalarField::mean() const { return values_.empty() ? 0.0 : sum() / static_cast<double>(values_.size()); }

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

VectorField::VectorField(Resolution res, Vec2 fill) : u_(res, fill.x), v_(res, fill.y) {}

VectorField::VectorField(ScalarField u, ScalarField v) : u_(std::move(u)), v_(std::move(v)) {
  if (!(u_.resolution() == v_.resolution())) {
    throw ValidationError("vector field components differ in resolution: " + to_string(u_.resolution()) +
                          " vs " + to_string(v_.resolution()));
  }
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), std::uint8_t{1}));
}

bool Roi::fits(Resolution r) const {
  return x0 >= 0 && y0 >= 0 && width >= 0 && height >= 0 && x0 + width <= r.width && y0 + height <= r.height;
}

std::string StreamValidation::report() const {
  if (rejected.empty()) return "all events valid";
  std::ostringstream os;
  os << rejected.size() << " event(s) rejected at indices ";
  const std::size_t shown = std::min<std::size_t>(rejected.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) os << (i ? "," : "") << rejected[i];
  if (shown < rejected.size()) os << ",...";
  return os.str();
}

StreamValidation validate_stream(std::span<const Event> raw, Resolution resolution) {
  if (resolution.empty()) throw ValidationError("sensor resolution is zero-sized: " + to_string(resolution));
  StreamValidation out;
  std::vector<Event> kept;
  kept.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const Event& e = raw[i];
    if (!resolution.contains(e.x, e.y) || (e.polarity != 1 && e.polarity != -1) || e.t < 0) {
      out.rejected.push_back(i);
      continue;
    }
    kept.push_back(e);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
  out.stream = EventStream(std::move(kept), resolution);
  return out;
}

EventStream slice_events(const EventStream& stream, TimeUs t0, TimeUs t1) {
  if (t0 > t1) {
    throw ValidationError("slice bounds reversed: t0=" + std::to_string(t0) + " > t1=" + std::to_string(t1));
  }
  const auto& ev = stream.events();
  auto by_time = [](const Event& e, TimeUs t) { return e.t < t; };
  auto first = std::lower_bound(ev.begin(), ev.end(), t0, by_time);
  auto last = std::lower_bound(first, ev.end(), t1, by_time);
  return EventStream(std::vector<Event>(first, last), stream.resolution());
}

ScalarField crop(const ScalarField& field, const Roi& roi) {
  if (!roi.fits(field.resolution())) {
    throw ValidationError("ROI " + to_string(roi) + " exceeds field " + to_string(field.resolution()));
  }
  ScalarField out({roi.width, roi.height});
  for (int y = 0; y < roi.height; ++y)
    for (int x = 0; x < roi.width; ++x) out(x, y) = field(roi.x0 + x, roi.y0 + y);
  return out;
}

VectorField crop(const VectorField& field, const Roi& roi) {
  return VectorField(crop(field.u(), roi), crop(field.v(), roi));
}

}  // namespace ebos
