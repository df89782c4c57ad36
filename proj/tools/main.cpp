#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "driftlab/errors.hpp"
#include "driftlab/experiments.hpp"
#include "driftlab/simulate.hpp"
#include "driftlab/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

driftlab::ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw driftlab::ConfigError("cannot open config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw driftlab::ConfigError("config parse error in " + path + ": " + e.what());
  }
  return driftlab::ExperimentConfig::from_json(j);
}

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string out;
};

driftlab::ExperimentConfig resolve_config(const GlobalOptions& options) {
  driftlab::ExperimentConfig config = load_config(options.config_path);
  if (options.seed) config.seed = *options.seed;
  if (!options.out.empty()) config.output_path = options.out;
  return config;
}

int effective_threads(const GlobalOptions& options) {
  if (options.threads > 0) return options.threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void add_common_options(CLI::App* cmd, GlobalOptions& options) {
  cmd->add_option("--config", options.config_path, "JSON experiment config")->required();
  cmd->add_option("--seed", options.seed, "override the config seed");
  cmd->add_option("--threads", options.threads, "worker threads (default: hardware)");
  cmd->add_option("--out", options.out, "override the config output path");
}

void report(const driftlab::ExperimentResult& result, const std::string& base_path) {
  driftlab::write_outputs(result, base_path);
  std::cout << "wrote " << base_path << ".csv and " << base_path << ".json\n";
  if (result.slope.fitted) {
    std::cout << "log-log slope " << result.slope.slope << " (r^2 " << result.slope.r_squared
              << ", " << result.slope.points_used << " points)\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(driftlab::kToolName) + " " + driftlab::kToolVersion +
               " - plug-in classification of diffusion paths"};
  app.require_subcommand(1);

  GlobalOptions rate_opts, est_opts, gram_opts, adv_opts, sim_opts;
  long gram_n = 0;
  std::string dump_path;

  CLI::App* rate = app.add_subcommand("rate", "excess-risk rate experiment");
  add_common_options(rate, rate_opts);
  CLI::App* estimation = app.add_subcommand("estimation", "estimation-error experiment");
  add_common_options(estimation, est_opts);
  CLI::App* gram = app.add_subcommand("gram", "Gram conditioning diagnostic");
  add_common_options(gram, gram_opts);
  gram->add_option("--N", gram_n, "sample size for the diagnostic")->required();
  CLI::App* adversarial = app.add_subcommand("adversarial", "worst-case bump-family probing");
  add_common_options(adversarial, adv_opts);
  CLI::App* simulate = app.add_subcommand("simulate", "dump a simulated dataset");
  add_common_options(simulate, sim_opts);
  simulate->add_option("--dump", dump_path, "output file for the dataset dump")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (rate->parsed()) {
      const auto config = resolve_config(rate_opts);
      report(driftlab::run_rate_experiment(config, effective_threads(rate_opts)),
             config.output_path);
    } else if (estimation->parsed()) {
      const auto config = resolve_config(est_opts);
      report(driftlab::run_estimation_experiment(config, effective_threads(est_opts)),
             config.output_path);
    } else if (gram->parsed()) {
      const auto config = resolve_config(gram_opts);
      report(driftlab::run_gram_diagnostic(config, gram_n, effective_threads(gram_opts)),
             config.output_path);
    } else if (adversarial->parsed()) {
      const auto config = resolve_config(adv_opts);
      long size_ref = config.family.size_ref;
      if (size_ref == 0) size_ref = config.sample_grid.back();
      const auto family = driftlab::build_hypothesis_family(
          config.beta, config.family.holder_radius, config.family.c0, size_ref,
          config.family.count, config.family.kappa, config.seed);
      report(driftlab::run_adversarial_experiment(family, config, effective_threads(adv_opts)),
             config.output_path);
    } else if (simulate->parsed()) {
      const auto config = resolve_config(sim_opts);
      long size = config.simulate_size > 0 ? config.simulate_size : config.sample_grid.front();
      int steps = config.simulate_steps > 0 ? config.simulate_steps
                                            : config.n_rule.resolve(size);
      const auto dataset = driftlab::generate_dataset(
          config.model, size, steps, driftlab::cell_stream(config.seed, "simulate", size, 0),
          config.substeps, effective_threads(sim_opts));
      std::ofstream out(dump_path, std::ios::binary);
      if (!out) throw driftlab::ConfigError("cannot open dump file " + dump_path);
      driftlab::dump_dataset(out, dataset);
      std::cout << "wrote " << dataset.size() << " paths (n = " << steps << ") to " << dump_path
                << "\n";
    }
  } catch (const driftlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const driftlab::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}
