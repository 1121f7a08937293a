#include "CLI11.hpp"

#include <cvgkp/bench.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"cvgkp: continuous-variable GKP code benchmarks"};
  app.footer("Experiments: threshold, pfail_curve, capacity, analog_vs_binary, sqec_chain,\n"
             "             hrm_sweep, cluster_verify, decomp_check, breed, cubic\n"
             "Config files are flat key=value text; '#' starts a comment.");

  std::string experiment;
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  long long trials = 1;

  app.add_option("experiment", experiment, "experiment to run")->required();
  app.add_option("--config", config_path, "path to a key=value config file")->required();
  auto* seed_opt = app.add_option("--seed", seed, "override the RNG seed");
  auto* trials_opt = app.add_option("--trials", trials, "override the trial count");
  auto* out_opt = app.add_option("--out", out_path, "write CSV here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    std::ifstream in(config_path);
    if (!in) throw cvgkp::SchemaError("cannot read config file: " + config_path);
    const auto kv = cvgkp::parse_key_values(in);
    auto cfg = cvgkp::make_config(experiment, kv);
    if (seed_opt->count() > 0) cfg.seed = seed;
    if (trials_opt->count() > 0) {
      if (trials < 1) throw cvgkp::SchemaError("trials must be at least 1");
      cfg.trials = trials;
    }
    if (out_opt->count() > 0) cfg.output_path = out_path;

    if (cfg.output_path.empty()) {
      cvgkp::run_experiment(cfg, std::cout);
    } else {
      cvgkp::run_experiment(cfg);
      std::cerr << "wrote " << cfg.output_path << "\n";
    }
    return 0;
  } catch (const cvgkp::SchemaError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
