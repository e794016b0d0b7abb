#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "ebos/commands.hpp"
#include "ebos/config.hpp"
#include "ebos/error.hpp"

namespace {

struct Overrides {
  std::string config_file;
  std::vector<std::string> sets;
  std::vector<std::pair<std::string, std::string>> flags;  // key, value; filled by callbacks in order
};

// A flag that writes config key `key`.
void key_option(CLI::App* app, Overrides& o, const std::string& flag, const std::string& key, const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&o, key](const std::string& v) { o.flags.emplace_back(key, v); }, help);
}

void common_options(CLI::App* app, Overrides& o) {
  app->add_option("-c,--config", o.config_file, "key = value configuration file");
  app->add_option("--set", o.sets, "override one setting, key=value (repeatable)");
  key_option(app, o, "-o,--out", "out", "output directory");
  key_option(app, o, "--seed", "seed", "random seed");
  key_option(app, o, "--t0", "t0", "start time in microseconds");
  key_option(app, o, "--t1", "t1", "end time in microseconds (exclusive)");
  key_option(app, o, "--roi", "roi", "region of interest x,y,w,h");
}

ebos::RunConfig build_config(const Overrides& o) {
  ebos::RunConfig config;
  if (!o.config_file.empty()) ebos::load_config_file(config, o.config_file);
  for (const auto& [key, value] : o.flags) ebos::set_config_value(config, key, value);
  for (const std::string& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ebos::ValidationError("--set expects key=value, got '" + s + "'");
    ebos::set_config_value(config, s.substr(0, eq), s.substr(eq + 1));
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-based background-oriented schlieren: simulation, flow estimation and analysis"};
  app.require_subcommand(1);
  Overrides o;

  auto* simulate = app.add_subcommand("simulate", "render a synthetic plume scene, its events and ground truth");
  common_options(simulate, o);
  key_option(simulate, o, "--format", "event_format", "event file format: binary or text");

  auto* estimate = app.add_subcommand("estimate", "estimate flow and Poisson fields from events and a reference frame");
  common_options(estimate, o);
  key_option(estimate, o, "--events", "events", "event file (.evb or .csv)");
  key_option(estimate, o, "--frames", "frames", "frame directory or a single .pgm");
  key_option(estimate, o, "--max", "max_magnitude", "flow magnitude mapped to full saturation");

  auto* evaluate = app.add_subcommand("evaluate", "compare estimated flow with ground truth");
  common_options(evaluate, o);
  key_option(evaluate, o, "--estimates", "estimates", "directory written by estimate");
  key_option(evaluate, o, "--gt", "gt", "ground-truth directory");
  key_option(evaluate, o, "--events", "events", "event file used to mask pixels");

  auto* kymo = app.add_subcommand("kymo", "kymogram of one column and streak velocities");
  common_options(kymo, o);
  key_option(kymo, o, "--source", "kymo_source", "events or fields");
  key_option(kymo, o, "--events", "events", "event file");
  key_option(kymo, o, "--estimates", "estimates", "directory written by estimate (fields source)");
  key_option(kymo, o, "--column", "kymo_column", "image column");
  key_option(kymo, o, "--rate", "kymo_rate", "kymogram rows per second");

  auto* visualize = app.add_subcommand("visualize", "color image of a .flo, .f64 or .pgm file");
  common_options(visualize, o);
  key_option(visualize, o, "--input", "input", "file to render");
  key_option(visualize, o, "--max", "max_magnitude", "value mapped to full saturation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const ebos::RunConfig config = build_config(o);
    if (simulate->parsed()) ebos::cmd_simulate(config, std::cout);
    if (estimate->parsed()) ebos::cmd_estimate(config, std::cout);
    if (evaluate->parsed()) ebos::cmd_evaluate(config, std::cout);
    if (kymo->parsed()) ebos::cmd_kymo(config, std::cout);
    if (visualize->parsed()) ebos::cmd_visualize(config, std::cout);
  } catch (const ebos::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ebos::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
