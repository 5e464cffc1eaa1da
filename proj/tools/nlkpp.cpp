// nlkpp: run one experiment from a key=value config.
//
//   nlkpp --config eigen.cfg --out results/ [--threads N] [--seed K]
//   nlkpp --list-builtins
//
// NLKPP_CONFIG, NLKPP_OUT, NLKPP_THREADS and NLKPP_SEED stand in for flags
// that are not given. Exit status: 0 all assertions passed, 1 an assertion
// failed, 2 configuration error, 3 solver error.
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nlkpp/cli/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal KPP experiments"};
  std::string config_path, out_dir;
  int threads = 1;
  std::optional<long long> seed;
  bool list = false;
  app.add_option("--config", config_path, "experiment config file")->envname("NLKPP_CONFIG");
  app.add_option("--out", out_dir, "output directory (overrides the config key 'output')")->envname("NLKPP_OUT");
  app.add_option("--threads", threads, "worker threads")->envname("NLKPP_THREADS")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "random seed (overrides the config key 'seed')")->envname("NLKPP_SEED");
  app.add_flag("--list-builtins", list, "print kernels, grammar, reactions and experiment kinds");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? nlkpp::exit_ok : nlkpp::exit_config;
  }

  if (list) {
    nlkpp::list_builtins(std::cout);
    return nlkpp::exit_ok;
  }
  if (config_path.empty()) {
    std::cerr << "nlkpp: --config is required (or set NLKPP_CONFIG)\n";
    return nlkpp::exit_config;
  }
  try {
    auto cfg = nlkpp::ExperimentConfig::load(config_path);
    if (out_dir.empty()) out_dir = cfg.text("output");
    auto result = nlkpp::run(cfg, {threads, seed});
    if (out_dir.empty()) {
      std::cout << result.summary.dump(2) << '\n';
    } else {
      result.save(out_dir);
      for (const auto& a : result.summary["assertions"])
        std::cout << (a["passed"].get<bool>() ? "PASS " : "FAIL ") << a["name"].get<std::string>() << '\n';
      std::cout << "wrote " << out_dir << "/summary.json\n";
    }
    return result.exit_code;
  } catch (const nlkpp::ConfigError& e) {
    std::cerr << "nlkpp: configuration error: " << e.what() << '\n';
    return nlkpp::exit_config;
  } catch (const nlkpp::PreconditionError& e) {
    std::cerr << "nlkpp: configuration error: " << e.what() << '\n';
    return nlkpp::exit_config;
  } catch (const std::exception& e) {
    std::cerr << "nlkpp: solver error: " << e.what() << '\n';
    return nlkpp::exit_solver;
  }
}
