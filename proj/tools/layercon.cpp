#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "layercon/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Layered porous-medium convection solver"};
  app.require_subcommand(1, 1);
  layercon::CommandOptions opt;
  const char* names[][2] = {
      {"eigen", "vertical spectrum and eigenfunctions"},
      {"steady", "conduction profile"},
      {"run", "time integration with diagnostics, snapshots and checkpoints"},
      {"verify", "acceptance suite and trajectory checks"},
  };
  for (const auto& [name, help] : names) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "configuration file");
    sub->add_option("--out", opt.out, "output directory (overrides output.directory)");
    if (std::string(name) == "run") sub->add_option("--resume", opt.resume, "checkpoint to continue from");
    sub->add_flag("--quiet", opt.quiet, "suppress progress output");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : layercon::exit_config;
  }
  return layercon::run_command(app.get_subcommands().front()->get_name(), opt, std::cout, std::cerr);
}
