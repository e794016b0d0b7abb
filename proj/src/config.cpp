#include "ebos/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>

#include "ebos/error.hpp"
#include "ebos/io.hpp"

namespace ebos {

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0;
  const char* b = text.data();
  const char* e = b + text.size();
  if (!text.empty() && *b == '+') ++b;
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || !std::isfinite(v)) throw ValidationError(key + ": '" + text + "' is not a number");
  return v;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& text) {
  Int v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size()) {
    throw ValidationError(key + ": '" + text + "' is not an integer");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ValidationError(key + ": '" + text + "' is not a boolean");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Key {
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename Access>
Key double_key(std::string name, Access access) {
  return {name, [=](RunConfig& c, const std::string& v) { access(c) = parse_double(name, v); },
          [=](const RunConfig& c) { return format_double(access(const_cast<RunConfig&>(c))); }};
}

template <typename Int, typename Access>
Key int_key(std::string name, Access access) {
  return {name, [=](RunConfig& c, const std::string& v) { access(c) = parse_int<Int>(name, v); },
          [=](const RunConfig& c) { return std::to_string(access(const_cast<RunConfig&>(c))); }};
}

template <typename Access>
Key string_key(std::string name, Access access) {
  return {name, [=](RunConfig& c, const std::string& v) { access(c) = v; },
          [=](const RunConfig& c) { return access(const_cast<RunConfig&>(c)); }};
}

template <typename Access>
Key optional_time_key(std::string name, Access access) {
  return {name,
          [=](RunConfig& c, const std::string& v) {
            if (v == "auto") {
              access(c).reset();
            } else {
              access(c) = parse_int<TimeUs>(name, v);
            }
          },
          [=](const RunConfig& c) {
            const auto& o = access(const_cast<RunConfig&>(c));
            return o ? std::to_string(*o) : std::string("auto");
          }};
}

const std::vector<Key>& registry() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> k;
    // estimator
    k.push_back(double_key("lambda1", [](RunConfig& c) -> double& { return c.estimator.lambda1; }));
    k.push_back(double_key("lambda2", [](RunConfig& c) -> double& { return c.estimator.lambda2; }));
    k.push_back(double_key("alpha", [](RunConfig& c) -> double& { return c.estimator.alpha; }));
    k.push_back(double_key("sigma_increment", [](RunConfig& c) -> double& { return c.estimator.sigma_increment; }));
    k.push_back(double_key("sigma_density", [](RunConfig& c) -> double& { return c.estimator.sigma_density; }));
    k.push_back(int_key<int>("iterations", [](RunConfig& c) -> int& { return c.estimator.iterations; }));
    k.push_back(double_key("lr", [](RunConfig& c) -> double& { return c.estimator.lr; }));
    k.push_back(double_key("lr_decay", [](RunConfig& c) -> double& { return c.estimator.lr_decay; }));
    k.push_back(int_key<int>("levels", [](RunConfig& c) -> int& { return c.estimator.levels; }));
    k.push_back(int_key<int>("coarsest_patch", [](RunConfig& c) -> int& { return c.estimator.coarsest_patch; }));
    k.push_back(double_key("window", [](RunConfig& c) -> double& { return c.estimator.window; }));
    k.push_back({"parameterization",
                 [](RunConfig& c, const std::string& v) { c.estimator.parameterization = parse_parameterization(v); },
                 [](const RunConfig& c) { return to_string(c.estimator.parameterization); }});
    k.push_back({"seed",
                 [](RunConfig& c, const std::string& v) {
                   const auto s = parse_int<std::uint64_t>("seed", v);
                   c.estimator.seed = s;
                   c.sim.seed = s;
                 },
                 [](const RunConfig& c) { return std::to_string(c.estimator.seed); }});
    k.push_back(double_key("contrast", [](RunConfig& c) -> double& { return c.estimator.contrast; }));
    k.push_back(double_key("log_offset", [](RunConfig& c) -> double& { return c.estimator.log_offset; }));
    k.push_back({"calibrate_scale",
                 [](RunConfig& c, const std::string& v) { c.estimator.calibrate_scale = parse_bool("calibrate_scale", v); },
                 [](const RunConfig& c) { return std::string(c.estimator.calibrate_scale ? "true" : "false"); }});
    // simulator
    k.push_back(double_key("contrast_pos", [](RunConfig& c) -> double& { return c.sim.contrast_pos; }));
    k.push_back(double_key("contrast_neg", [](RunConfig& c) -> double& { return c.sim.contrast_neg; }));
    k.push_back(int_key<TimeUs>("refractory_us", [](RunConfig& c) -> TimeUs& { return c.sim.refractory; }));
    k.push_back(double_key("fps", [](RunConfig& c) -> double& { return c.sim.fps; }));
    k.push_back(double_key("dot_density", [](RunConfig& c) -> double& { return c.sim.dot_density; }));
    k.push_back(double_key("dot_radius", [](RunConfig& c) -> double& { return c.sim.dot_radius; }));
    // scene
    k.push_back(int_key<int>("width", [](RunConfig& c) -> int& { return c.scene.width; }));
    k.push_back(int_key<int>("height", [](RunConfig& c) -> int& { return c.scene.height; }));
    k.push_back(double_key("duration", [](RunConfig& c) -> double& { return c.scene.duration; }));
    k.push_back(double_key("peak_displacement", [](RunConfig& c) -> double& { return c.scene.peak_displacement; }));
    k.push_back(int_key<int>("blobs", [](RunConfig& c) -> int& { return c.scene.plume.blobs; }));
    k.push_back(double_key("blob_sigma", [](RunConfig& c) -> double& { return c.scene.plume.blob_sigma; }));
    k.push_back(double_key("velocity_x", [](RunConfig& c) -> double& { return c.scene.plume.velocity_x; }));
    k.push_back(double_key("velocity_y", [](RunConfig& c) -> double& { return c.scene.plume.velocity_y; }));
    k.push_back(double_key("modulation", [](RunConfig& c) -> double& { return c.scene.plume.modulation; }));
    k.push_back(double_key("modulation_hz", [](RunConfig& c) -> double& { return c.scene.plume.modulation_hz; }));
    // geometry
    k.push_back(double_key("focal_length", [](RunConfig& c) -> double& { return c.geometry.focal_length; }));
    k.push_back(double_key("lens_to_object", [](RunConfig& c) -> double& { return c.geometry.lens_to_object; }));
    k.push_back(
        double_key("object_to_background", [](RunConfig& c) -> double& { return c.geometry.object_to_background; }));
    k.push_back(double_key("pixel_pitch", [](RunConfig& c) -> double& { return c.geometry.pixel_pitch; }));
    k.push_back(double_key("n_ambient", [](RunConfig& c) -> double& { return c.geometry.n_ambient; }));
    k.push_back(double_key("gladstone_dale", [](RunConfig& c) -> double& { return c.geometry.gladstone_dale; }));
    k.push_back(double_key("object_depth", [](RunConfig& c) -> double& { return c.geometry.object_depth; }));
    // kymogram
    k.push_back(string_key("kymo_source", [](RunConfig& c) -> std::string& { return c.kymo.source; }));
    k.push_back(int_key<int>("kymo_column", [](RunConfig& c) -> int& { return c.kymo.column; }));
    k.push_back(int_key<int>("kymo_row_begin", [](RunConfig& c) -> int& { return c.kymo.row_begin; }));
    k.push_back(int_key<int>("kymo_row_end", [](RunConfig& c) -> int& { return c.kymo.row_end; }));
    k.push_back(double_key("kymo_rate", [](RunConfig& c) -> double& { return c.kymo.rate; }));
    k.push_back(int_key<int>("kymo_patch", [](RunConfig& c) -> int& { return c.kymo.patch; }));
    k.push_back(double_key("kymo_sigma", [](RunConfig& c) -> double& { return c.kymo.sigma; }));
    // paths and ranges
    k.push_back(string_key("events", [](RunConfig& c) -> std::string& { return c.events; }));
    k.push_back(string_key("frames", [](RunConfig& c) -> std::string& { return c.frames; }));
    k.push_back(string_key("estimates", [](RunConfig& c) -> std::string& { return c.estimates; }));
    k.push_back(string_key("gt", [](RunConfig& c) -> std::string& { return c.gt; }));
    k.push_back(string_key("input", [](RunConfig& c) -> std::string& { return c.input; }));
    k.push_back(string_key("out", [](RunConfig& c) -> std::string& { return c.out; }));
    k.push_back(string_key("event_format", [](RunConfig& c) -> std::string& { return c.event_format; }));
    k.push_back(optional_time_key("t0", [](RunConfig& c) -> std::optional<TimeUs>& { return c.t0; }));
    k.push_back(optional_time_key("t1", [](RunConfig& c) -> std::optional<TimeUs>& { return c.t1; }));
    k.push_back({"roi",
                 [](RunConfig& c, const std::string& v) {
                   if (v == "full") {
                     c.roi.reset();
                   } else {
                     c.roi = parse_roi(v);
                   }
                 },
                 [](const RunConfig& c) {
                   if (!c.roi) return std::string("full");
                   return std::to_string(c.roi->x0) + "," + std::to_string(c.roi->y0) + "," +
                          std::to_string(c.roi->width) + "," + std::to_string(c.roi->height);
                 }});
    k.push_back({"max_magnitude",
                 [](RunConfig& c, const std::string& v) {
                   if (v == "auto") {
                     c.max_magnitude.reset();
                   } else {
                     c.max_magnitude = parse_double("max_magnitude", v);
                   }
                 },
                 [](const RunConfig& c) { return c.max_magnitude ? format_double(*c.max_magnitude) : "auto"; }});
    return k;
  }();
  return keys;
}

const Key& find_key(const std::string& name) {
  for (const Key& k : registry())
    if (k.name == name) return k;
  throw ValidationError("unknown config key '" + name + "'");
}

}  // namespace

void RunConfig::validate() const {
  estimator.validate();
  sim.validate();
  geometry.validate();
  if (scene.width < 1 || scene.height < 1) throw ValidationError("scene width and height must be positive");
  if (!(scene.duration > 0)) throw ValidationError("duration must be positive");
  if (!(scene.peak_displacement >= 0)) throw ValidationError("peak_displacement must be non-negative");
  if (scene.plume.blobs < 0) throw ValidationError("blobs must be non-negative");
  if (!(scene.plume.blob_sigma > 0)) throw ValidationError("blob_sigma must be positive");
  if (kymo.source != "events" && kymo.source != "fields") throw ValidationError("kymo_source must be events or fields");
  if (!(kymo.rate > 0)) throw ValidationError("kymo_rate must be positive");
  if (!(kymo.sigma > 0)) throw ValidationError("kymo_sigma must be positive");
  if (event_format != "binary" && event_format != "text") throw ValidationError("event_format must be binary or text");
  if (t0 && *t0 < 0) throw ValidationError("t0 must be non-negative");
  if (t0 && t1 && *t1 < *t0) throw ValidationError("t1 must not precede t0");
  if (max_magnitude && !(*max_magnitude > 0)) throw ValidationError("max_magnitude must be positive");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const Key& k : registry()) n.push_back(k.name);
    return n;
  }();
  return names;
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  find_key(key).set(config, value);
  config.explicit_keys.insert(key);
}

std::string get_config_value(const RunConfig& config, const std::string& key) { return find_key(key).get(config); }

void apply_config_text(RunConfig& config, const std::string& text, const std::string& origin) {
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      set_config_value(config, key, value);
    } catch (const ValidationError& e) {
      throw ValidationError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void load_config_file(RunConfig& config, const std::filesystem::path& path) {
  apply_config_text(config, io::read_text(path), path.string());
}

std::string render_config(const RunConfig& config, bool mark_defaults) {
  std::string out;
  for (const Key& k : registry()) {
    out += k.name + " = " + k.get(config);
    if (mark_defaults && !config.explicit_keys.count(k.name)) out += "  # default";
    out += '\n';
  }
  return out;
}

Roi parse_roi(const std::string& text) {
  int v[4];
  const char* p = text.data();
  const char* e = p + text.size();
  for (int i = 0; i < 4; ++i) {
    auto [next, ec] = std::from_chars(p, e, v[i]);
    if (ec != std::errc() || (i < 3 ? (next == e || *next != ',') : next != e)) {
      throw ValidationError("roi: expected x,y,w,h but got '" + text + "'");
    }
    p = next + 1;
  }
  if (v[0] < 0 || v[1] < 0 || v[2] < 1 || v[3] < 1) throw ValidationError("roi: '" + text + "' is empty or negative");
  return {v[0], v[1], v[2], v[3]};
}

}  // namespace ebos
