#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "tiltwalk/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"tiltwalk: area-tilted random-walk bridges, their transfer-operator spectra, "
               "and the limiting diffusion"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_root;
  if (const char* env = std::getenv("TILTWALK_OUTPUT_ROOT")) output_root = env;
  if (output_root.empty()) output_root = ".";

  bool run_list = false;
  CLI::App* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("config", config_path, "config file");
  run->add_option("--output-root", output_root,
                  "directory that experiment outputs are resolved against");
  run->add_flag("--list", run_list, "print the experiment catalogue instead of running");

  std::string tag;
  CLI::App* describe =
      app.add_subcommand("describe", "explain an experiment and its pass criteria");
  describe->add_option("tag", tag, "experiment tag")->required();

  app.add_subcommand("list", "list the experiment catalogue");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    if (run_list) return tiltwalk::list_experiments();
    if (config_path.empty()) {
      std::fprintf(stderr, "run: a config file is required (or pass --list)\n");
      return tiltwalk::kExitConfigError;
    }
    return tiltwalk::run_experiment(config_path, output_root);
  }
  if (describe->parsed()) return tiltwalk::describe_experiment(tag);
  return tiltwalk::list_experiments();
}
