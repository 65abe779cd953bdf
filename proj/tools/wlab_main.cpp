#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "wlab/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"wittenlab: weighted heat flow on radial model manifolds with "
               "entropy and Harnack monitors"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  int refine = -1;
  long long seed = -1;

  auto* run_cmd = app.add_subcommand("run", "run a scenario config");
  run_cmd->add_option("config", config_path, "scenario config file")
      ->required();
  run_cmd->add_option("--out", out_dir, "artifact directory");
  run_cmd->add_option("--refine", refine, "refinement levels (overrides config)");
  run_cmd->add_option("--seed", seed, "seed for randomized self-checks");

  bool as_json = false;
  auto* list_cmd =
      app.add_subcommand("list-catalog", "list models, flows and monitors");
  list_cmd->add_flag("--json", as_json, "structured output");

  std::string calib_path;
  auto* calib_cmd = app.add_subcommand(
      "calibrate", "suggest tolerance constants from one refinement");
  calib_cmd->add_option("config", calib_path, "scenario config file")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  try {
    if (*run_cmd) {
      auto config = wlab::ScenarioConfig::parse_file(config_path);
      if (seed >= 0) config.seed = static_cast<unsigned long long>(seed);
      const auto art = wlab::run_scenario(config, out_dir, refine);
      std::printf("scenario %s: exit %d, %zu monitors, artifacts in %s\n",
                  config.label.c_str(), art.exit_code, art.monitors.size(),
                  out_dir.c_str());
      for (const auto& m : art.monitors)
        std::printf("  %-24s %-24s worst %.6g  %s%s\n", m.label.c_str(),
                    m.inequality.c_str(), m.worst_margin, m.verdict.c_str(),
                    m.negative_control ? " (negative control)" : "");
      if (!art.oracle_orders.empty()) {
        std::printf("  oracle errors:");
        for (double e : art.oracle_errors) std::printf(" %.3g", e);
        std::printf("  observed orders:");
        for (double o : art.oracle_orders) std::printf(" %.2f", o);
        std::printf("\n");
      }
      if (art.trajectory.cn_fallbacks > 0)
        std::printf("  note: %d CN step(s) fell back to backward Euler\n",
                    art.trajectory.cn_fallbacks);
      return art.exit_code;
    }
    if (*list_cmd) {
      std::fputs(wlab::list_catalog(as_json).c_str(), stdout);
      return 0;
    }
    if (*calib_cmd) {
      const auto config = wlab::ScenarioConfig::parse_file(calib_path);
      const auto res = wlab::calibrate(config);
      std::fputs(res.summary.c_str(), stdout);
      return 0;
    }
  } catch (const wlab::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 3;
  } catch (const wlab::geometry_error& e) {
    std::fprintf(stderr, "geometry error: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 3;
}
