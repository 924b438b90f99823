#pragma once

#include <string>
#include <vector>

#include "iadp/config.hpp"
#include "iadp/io.hpp"
#include "iadp/sim.hpp"

namespace iadp {

struct RunOutcome {
  ConfigValues resolved;
  EpisodeResult result;
  RunArtifacts artifacts;
  double wall_seconds = 0.0;
};

/// One episode plus its artifacts in out_dir.
RunOutcome run_and_write(const ConfigValues& resolved, const std::string& out_dir);

/// iadp, zsadp and tadp on one resolved config (seed, basis and gains
/// shared), run concurrently. Only `controller` differs between runs.
std::vector<RunOutcome> run_compare(const ConfigValues& resolved, const std::string& out_dir);

/// Fixed-width table of final E_u, E_x, divergence and E_u ratios against
/// the first row.
std::string summary_table(const std::vector<RunOutcome>& runs);

/// The same numbers as JSON text.
std::string summary_json(const std::vector<RunOutcome>& runs);

struct PropertyCheck {
  std::string module;
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Quick property suites for every module (a few seconds in total).
std::vector<PropertyCheck> run_property_checks(std::uint64_t seed = 7);

}  // namespace iadp
