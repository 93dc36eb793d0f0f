#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ppm/config.hpp"
#include "ppm/errors.hpp"
#include "ppm/experiment.hpp"

namespace {

constexpr int kConfigExit = 2;
constexpr int kPrerequisiteExit = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prediction-profile learning pipeline"};
  app.require_subcommand(1);
  std::string config_path, out_dir = "out";
  std::int64_t seed = -1;
  std::vector<std::string> inputs;
  std::string plot_out;

  const std::vector<std::string> stages = {"gen-data", "train-flat", "estimate-profiles", "translate", "train-pp",
                                           "evaluate", "sdm-check",  "all"};
  for (const auto& s : stages) {
    auto* sub = app.add_subcommand(s, "run stage " + s);
    sub->add_option("--config", config_path, "key = value config file")->required();
    sub->add_option("--seed", seed, "master seed, overrides the config");
    sub->add_option("--out", out_dir, "artifact directory");
  }
  auto* plot = app.add_subcommand("plotdata", "merge EvalRecord CSVs into long format");
  plot->add_option("inputs", inputs, "EvalRecord CSV files");
  plot->add_option("--out", plot_out, "output file (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    if (plot->parsed()) {
      if (plot_out.empty()) {
        ppm::emit_plotdata(inputs, std::cout);
      } else {
        std::ofstream out(plot_out);
        if (!out) throw ppm::ConfigError("cannot write '" + plot_out + "'");
        ppm::emit_plotdata(inputs, out);
      }
      return 0;
    }
    ppm::ExperimentConfig cfg = ppm::load_config(config_path);
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    const std::string stage = app.get_subcommands().front()->get_name();
    ppm::run_stage(stage, cfg, out_dir);
    std::cout << stage << " done, config " << cfg.hash() << ", artifacts in " << out_dir << '\n';
  } catch (const ppm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const ppm::PrerequisiteError& e) {
    std::cerr << "prerequisite error: " << e.what() << '\n';
    return kPrerequisiteExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
