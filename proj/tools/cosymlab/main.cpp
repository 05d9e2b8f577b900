#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"

int main(int argc, char** argv) {
  using namespace cosymlab::cli;

  CLI::App app{"cosymlab: numerical checks for cosymplectic hypersurfaces and return maps"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;

  const std::map<std::string, std::string> about{
      {"demo-product", "product system N x S^1 from a cosymplectic seed; global leaf section and its return map"},
      {"verify-cosym", "closedness and volume checks of a seed, collar form, field round trip"},
      {"tischler", "rational approximation of periods and the extracted fibration leaf"},
      {"obstruct", "Betti, Stokes-exactness and simply-connected obstructions"},
      {"return-map", "iterate the first-return map of a system with a section"}};
  for (const auto& name : command_names()) {
    auto* sub = app.add_subcommand(name, about.count(name) ? about.at(name) : "");
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "RNG seed (overrides the config's \"seed\")");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  json cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "cosymlab " << command << ": " << e.what() << '\n';
    return kExitUsage;
  }
  CommandOptions opts{out_dir, seed};
  return run_command(command, cfg, opts, std::cerr);
}
