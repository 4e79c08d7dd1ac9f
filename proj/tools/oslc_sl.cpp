#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "oslc/bench.hpp"

namespace {

int run_mode(const std::string& mode, const std::string& config_path, long long seed,
             const std::string& out_dir) {
  oslc::ExperimentConfig cfg;
  try {
    cfg = oslc::ExperimentConfig::parse_file(config_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 4;
  }
  cfg.mode = mode;
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  const oslc::ExperimentResult res = oslc::run_experiment(cfg);
  std::fputs(res.summary.c_str(), res.exit_code == 0 ? stdout : stderr);
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-Lagrangian solver for transport and conservative equations"};
  app.require_subcommand(1);
  app.footer("Config schema (key = value lines):\n" + oslc::ExperimentConfig::schema());

  std::string config_path, out_dir;
  long long seed = -1;
  std::string picked;
  for (const char* name : {"transport", "conservative", "ladder", "check"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment config file")->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out", out_dir, "override the output directory");
    sub->callback([name, &picked] { picked = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 4;
  }
  return run_mode(picked, config_path, seed, out_dir);
}
