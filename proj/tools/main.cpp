#include "commands.hpp"
#include "config.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

using charfem::tools::KeyValues;

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

const std::vector<FlagSpec> flags = {
    {"--benchmark", "benchmark", "benchmark name"},
    {"--p", "p", "time degree p"},
    {"--rule", "rule", "gauss | radau | theta:S"},
    {"--basis", "basis", "time basis nodes: coincident | equispaced"},
    {"--elements", "elements", "spatial elements n"},
    {"--partitions", "partitions", "time partitions m"},
    {"--levels", "levels", "refinement levels L (convergence)"},
    {"--motion", "motion", "static | characteristics | prescribed:NAME"},
    {"--reconfigure", "reconfigure", "keep | uniform | uniform:K"},
    {"--dt-ceiling", "dt_ceiling", "largest admissible partition length"},
    {"--t-final", "t_final", "final time (default: benchmark)"},
    {"--spatial-degree", "spatial_degree", "spatial degree (0: same as p)"},
    {"--out", "out", "output directory (CHARFEM_OUT overrides)"},
    {"--seed", "seed", "seed for the property-check harness"},
    {"--threads", "threads", "worker threads for convergence levels"},
};

} // namespace

int main(int argc, char** argv) {
  namespace t = charfem::tools;
  CLI::App app{"Space-time moving finite elements for 1D convection-diffusion"};
  app.require_subcommand(1);

  std::string config_path;
  std::map<std::string, std::string> given;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "INI-style configuration file");
    for (const auto& f : flags) sub->add_option(f.flag, given[f.key], f.help);
  };

  CLI::App* run = app.add_subcommand("run", "solve one configuration and write CSV tables");
  CLI::App* conv = app.add_subcommand("convergence", "refinement sweep over L levels");
  CLI::App* mesh = app.add_subcommand("inspect-mesh", "write node trajectories");
  CLI::App* check = app.add_subcommand("check", "seeded randomized property checks");
  for (CLI::App* sub : {run, conv, mesh, check}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : t::exit_config_error;
  }

  try {
    t::RunConfig config;
    if (!config_path.empty()) t::apply(config, t::read_config_file(config_path));
    KeyValues cli;
    for (const auto& [key, value] : given) {
      if (!value.empty()) cli[key] = value;
    }
    t::apply(config, cli);
    if (const char* env = std::getenv("CHARFEM_OUT"); env && *env) config.out = env;

    if (run->parsed()) return t::run_single(config, std::cout);
    if (conv->parsed()) return t::run_convergence(config, std::cout);
    if (mesh->parsed()) return t::inspect_mesh(config, std::cout);
    return t::run_checks(config, std::cout);
  } catch (const t::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return t::exit_config_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return t::exit_config_error;
  }
}
