#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ebos {

/// Timestamps are integer microseconds throughout.
using TimeUs = std::int64_t;

inline double to_seconds(TimeUs t) { return static_cast<double>(t) * 1e-6; }

struct Resolution {
  int width = 0;
  int height = 0;

  std::size_t pixels() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  bool empty() const { return width <= 0 || height <= 0; }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
  friend bool operator==(const Resolution&, const Resolution&) = default;
};

std::string to_string(const Resolution& r);

struct Event {
  int x = 0;
  int y = 0;
  TimeUs t = 0;
  int polarity = 1;  // -1 or +1

  friend bool operator==(const Event&, const Event&) = default;
};

/// Time-ordered events on a sensor of known resolution.
class EventStream {
 public:
  EventStream() = default;
  /// Takes ownership of events that are already sorted and in bounds.
  /// Use validate_stream() for untrusted input.
  EventStream(std::vector<Event> events, Resolution resolution);

  const std::vector<Event>& events() const { return events_; }
  Resolution resolution() const { return resolution_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  auto begin() const { return events_.begin(); }
  auto end() const { return events_.end(); }
  const Event& operator[](std::size_t i) const { return events_[i]; }

  friend bool operator==(const EventStream&, const EventStream&) = default;

 private:
  std::vector<Event> events_;
  Resolution resolution_;
};

/// Dense row-major grid of doubles.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(Resolution res, double fill = 0.0);
  ScalarField(Resolution res, std::vector<double> values);

  Resolution resolution() const { return res_; }
  int width() const { return res_.width; }
  int height() const { return res_.height; }
  std::size_t size() const { return values_.size(); }

  double& operator()(int x, int y) { return values_[index(x, y)]; }
  double operator()(int x, int y) const { return values_[index(x, y)]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool all_finite() const;
  double sum() const;
  double mean() const;
  double max_abs() const;

  friend bool operator==(const ScalarField&, const ScalarField&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(res_.width) + static_cast<std::size_t>(x);
  }

  Resolution res_;
  std::vector<double> values_;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// Two-component field (flow, translation, displacement). Components share a resolution.
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(Resolution res, Vec2 fill = {});
  VectorField(ScalarField u, ScalarField v);

  Resolution resolution() const { return u_.resolution(); }
  int width() const { return u_.width(); }
  int height() const { return u_.height(); }

  const ScalarField& u() const { return u_; }
  const ScalarField& v() const { return v_; }
  ScalarField& u() { return u_; }
  ScalarField& v() { return v_; }

  Vec2 operator()(int x, int y) const { return {u_(x, y), v_(x, y)}; }
  void set(int x, int y, Vec2 value) {
    u_(x, y) = value.x;
    v_(x, y) = value.y;
  }

  bool all_finite() const { return u_.all_finite() && v_.all_finite(); }

  friend bool operator==(const VectorField&, const VectorField&) = default;

 private:
  ScalarField u_;
  ScalarField v_;
};

struct Roi {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;

  static Roi full(Resolution r) { return {0, 0, r.width, r.height}; }
  bool fits(Resolution r) const;
  bool contains(int x, int y) const { return x >= x0 && y >= y0 && x < x0 + width && y < y0 + height; }
  friend bool operator==(const Roi&, const Roi&) = default;
};

std::string to_string(const Roi& roi);

/// Boolean per-pixel mask.
class Mask {
 public:
  Mask() = default;
  explicit Mask(Resolution res, bool fill = false) : res_(res), values_(res.pixels(), fill ? 1 : 0) {}

  Resolution resolution() const { return res_; }
  bool operator()(int x, int y) const { return values_[index(x, y)] != 0; }
  void set(int x, int y, bool on) { values_[index(x, y)] = on ? 1 : 0; }
  bool operator[](std::size_t i) const { return values_[i] != 0; }
  std::size_t count() const;

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(res_.width) + static_cast<std::size_t>(x);
  }

  Resolution res_;
  std::vector<std::uint8_t> values_;
};

struct StreamValidation {
  EventStream stream;
  /// Indices into the raw input of every dropped event (out of bounds or zero polarity).
  std::vector<std::size_t> rejected;

  bool ok() const { return rejected.empty(); }
  std::string report() const;
};

/// Stable-sorts by timestamp and drops events outside the sensor or with invalid polarity.
/// Throws ValidationError on a zero-sized resolution.
StreamValidation validate_stream(std::span<const Event> raw, Resolution resolution);

/// Events with t0 <= t < t1, order preserved. Throws ValidationError if t0 > t1.
EventStream slice_events(const EventStream& stream, TimeUs t0, TimeUs t1);

/// Copies the ROI out of a field. Throws ValidationError if the ROI does not fit.
ScalarField crop(const ScalarField& field, const Roi& roi);
VectorField crop(const VectorField& field, const Roi& roi);

}  // namespace ebos
