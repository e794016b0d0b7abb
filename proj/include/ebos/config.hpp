#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ebos/bos_physics.hpp"
#include "ebos/estimator.hpp"
#include "ebos/simulator.hpp"

namespace ebos {

struct SceneConfig {
  int width = 256;
  int height = 256;
  double duration = 0.5;          // s
  double peak_displacement = 3.0; // px; 0 gives a static scene
  PlumeConfig plume;
};

struct KymoConfig {
  std::string source = "events";  // events | fields
  int column = -1;                // -1: center column
  int row_begin = 0;
  int row_end = -1;               // -1: full height
  double rate = 1200.0;           // rows per second for event histograms
  int patch = 32;
  double sigma = 1.5;
};

/// Everything a command may read. Built from defaults, then a key = value file, then overrides.
struct RunConfig {
  EstimatorConfig estimator;
  SimConfig sim;
  BosGeometry geometry;
  SceneConfig scene;
  KymoConfig kymo;

  std::string events;     // event file (.evb binary, .csv text)
  std::string frames;     // frame directory with frames.txt, or a single .pgm
  std::string estimates;  // directory written by estimate
  std::string gt;         // directory with ground-truth flow_NNNN.flo files
  std::string input;      // file to visualize
  std::string out = "out";
  std::string event_format = "binary";  // binary | text, for files written by simulate
  std::optional<TimeUs> t0;
  std::optional<TimeUs> t1;
  std::optional<Roi> roi;
  std::optional<double> max_magnitude;  // visualization clip, px

  std::set<std::string> explicit_keys;  // keys set by a file or override

  void validate() const;
};

/// Recognized keys in their canonical order.
const std::vector<std::string>& config_keys();

/// Sets one key from its text form. Unknown keys and unparsable values throw ValidationError.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

/// Canonical text form of a key's current value.
std::string get_config_value(const RunConfig& config, const std::string& key);

/// Parses `key = value` lines; `#` starts a comment, blank lines are ignored.
/// `origin` names the source in error messages.
void apply_config_text(RunConfig& config, const std::string& text, const std::string& origin);

void load_config_file(RunConfig& config, const std::filesystem::path& path);

/// One `key = value` line per key, reloadable by apply_config_text. With mark_defaults,
/// keys never set explicitly carry a trailing `# default` comment.
std::string render_config(const RunConfig& config, bool mark_defaults);

Roi parse_roi(const std::string& text);

}  // namespace ebos
