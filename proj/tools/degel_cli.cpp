#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "degel/runner.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"degel: Dirichlet solver and estimate workbench for fully nonlinear "
               "elliptic equations on warped product slabs"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;

  const std::vector<std::string> commands = {"solve",       "sweep",      "verify-lemma",
                                             "subsolution", "diagnose",   "convergence"};
  std::string chosen;
  long seed = -1, count = -1, n_min = -1, n_max = -1;
  std::string n_range;
  for (const std::string& name : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "config file (section.key = value format)");
    sub->add_option("--set", overrides, "override section.key=value")->take_all();
    sub->add_option("--out", out_dir, "output directory for CSV artifacts");
    if (name == "verify-lemma") {
      sub->add_option("--seed", seed, "RNG seed");
      sub->add_option("--count", count, "number of random instances");
      sub->add_option("--n", n_range, "dimension range, e.g. 3..8");
      sub->add_option("--n-min", n_min, "smallest dimension");
      sub->add_option("--n-max", n_max, "largest dimension");
    }
    sub->callback([&chosen, name]() { chosen = name; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    std::string text = config_path.empty() ? std::string() : read_file(config_path);
    if (!n_range.empty()) {
      const std::size_t dots = n_range.find("..");
      if (dots == std::string::npos)
        throw degel::ConfigError(2, 0, "--n expects a range like 3..8");
      n_min = std::stol(n_range.substr(0, dots));
      n_max = std::stol(n_range.substr(dots + 2));
    }
    if (seed >= 0) overrides.push_back("lemma.seed=" + std::to_string(seed));
    if (count >= 0) overrides.push_back("lemma.count=" + std::to_string(count));
    if (n_min >= 0) overrides.push_back("lemma.n_min=" + std::to_string(n_min));
    if (n_max >= 0) overrides.push_back("lemma.n_max=" + std::to_string(n_max));
    if (!out_dir.empty()) overrides.push_back("output.dir=" + out_dir);

    degel::RunConfig cfg = degel::parse_config(text, overrides);
    return degel::run_command(chosen, cfg, std::cout);
  } catch (const degel::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return e.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
