// iadp: run, compare and inspect incremental ADP episodes.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "iadp/config.hpp"
#include "iadp/io.hpp"
#include "iadp/runner.hpp"

namespace {

enum ExitCode { kOk = 0, kConfigError = 1, kDiverged = 2, kCheckFailed = 3 };

struct CommonFlags {
  std::string scenario;
  std::string controller;
  std::string seed;
  std::string dt;
  std::string t_end;
  std::string xdot_source;
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;

  void attach(CLI::App* app, bool with_controller) {
    app->add_option("--scenario", scenario, "Scenario preset: s1, s2, s3 or custom");
    if (with_controller) {
      app->add_option("--controller", controller, "iadp, zsadp, tadp or zero");
    }
    app->add_option("--seed", seed, "Noise seed");
    app->add_option("--dt", dt, "Plant step [s]");
    app->add_option("--t-end", t_end, "Horizon [s]");
    app->add_option("--xdot-source", xdot_source, "backward_difference or ground_truth");
    app->add_option("--config", config_path, "Config file (key = value lines)");
    app->add_option("--out-dir", out_dir, "Output directory (default $IADP_OUT_DIR or ./runs)");
    app->add_option("--override", overrides, "key=value, may repeat")->take_all();
  }

  iadp::ConfigValues resolve() const {
    iadp::ConfigValues file;
    if (!config_path.empty()) file = iadp::parse_config_file(config_path);
    iadp::ConfigValues flags;
    for (const auto& o : overrides) {
      const auto [k, v] = iadp::parse_override(o);
      flags[k] = v;
    }
    auto set = [&flags](const char* key, const std::string& v) {
      if (!v.empty()) flags[key] = v;
    };
    set("scenario", scenario);
    set("controller", controller);
    set("seed", seed);
    set("sim.dt", dt);
    set("sim.t_end", t_end);
    set("sim.xdot_source", xdot_source);
    return iadp::resolve_config(file, flags);
  }

  std::string output_dir() const {
    if (!out_dir.empty()) return out_dir;
    if (const char* env = std::getenv("IADP_OUT_DIR"); env != nullptr && *env != '\0') return env;
    return "runs";
  }
};

int cmd_run(const CommonFlags& flags) {
  const auto resolved = flags.resolve();
  const auto run = iadp::run_and_write(resolved, flags.output_dir());
  const auto& res = run.result;
  std::cout << "csv:      " << run.artifacts.csv << "\n"
            << "manifest: " << run.artifacts.manifest << "\n"
            << "E_u = " << res.final_E_u() << ", E_x = " << res.final_E_x()
            << ", max |u| = " << res.max_abs_u << "\n";
  if (res.insufficient_excitation) {
    std::cout << "warning: replay buffer short of full rank at the excitation deadline\n";
  }
  if (res.diverged) {
    std::cout << "diverged at t = " << *res.diverged_time << " (" << res.divergence_reason
              << ")\n";
    return kDiverged;
  }
  return kOk;
}

int cmd_compare(const CommonFlags& flags) {
  const auto resolved = flags.resolve();
  const auto runs = iadp::run_compare(resolved, flags.output_dir());
  std::cout << "scenario " << resolved.at("scenario") << ", seed " << resolved.at("seed") << "\n"
            << iadp::summary_table(runs);
  bool any_diverged = false;
  for (const auto& r : runs) any_diverged = any_diverged || r.result.diverged;
  return any_diverged ? kDiverged : kOk;
}

int cmd_check(std::uint64_t seed) {
  const auto checks = iadp::run_property_checks(seed);
  int failed = 0;
  for (const auto& c : checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.module << ": " << c.name;
    if (!c.passed) std::cout << " (" << c.detail << ")";
    std::cout << "\n";
    if (!c.passed) ++failed;
  }
  std::cout << checks.size() - failed << "/" << checks.size() << " checks passed\n";
  return failed == 0 ? kOk : kCheckFailed;
}

int cmd_plots(const std::vector<std::string>& logs, const std::string& out_dir) {
  const auto scripts = iadp::emit_plots(logs, out_dir);
  for (const auto& s : scripts) std::cout << s << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Incremental ADP regulator simulations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", iadp::software_version());

  CommonFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "Run one episode and write CSV + manifest");
  run_flags.attach(run, true);

  CommonFlags cmp_flags;
  CLI::App* compare = app.add_subcommand("compare", "Run iadp, zsadp and tadp side by side");
  cmp_flags.attach(compare, false);

  CommonFlags cfg_flags;
  CLI::App* config = app.add_subcommand("config", "Print the resolved configuration");
  cfg_flags.attach(config, true);

  std::uint64_t check_seed = 7;
  CLI::App* check = app.add_subcommand("check", "Run the property self-checks");
  check->add_option("--seed", check_seed, "Seed for randomised checks");

  std::vector<std::string> plot_logs;
  std::string plot_dir = ".";
  CLI::App* plots = app.add_subcommand("plots", "Write gnuplot scripts for trajectory logs");
  plots->add_option("logs", plot_logs, "CSV logs");
  plots->add_option("--out-dir", plot_dir, "Directory for scripts and data files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(run_flags);
    if (*compare) return cmd_compare(cmp_flags);
    if (*config) {
      std::cout << iadp::config_echo(cfg_flags.resolve());
      return kOk;
    }
    if (*check) return cmd_check(check_seed);
    if (*plots) return cmd_plots(plot_logs, plot_dir);
  } catch (const iadp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  return kOk;
}
