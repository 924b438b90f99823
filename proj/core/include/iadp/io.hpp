#pragma once

#include <string>
#include <vector>

#include "iadp/config.hpp"
#include "iadp/sim.hpp"

namespace iadp {

/// Bumped whenever the column set or order changes.
inline constexpr const char* kCsvSchema = "iadp-trajectory/1";

const char* software_version();

/// Header row plus one line per log row, numbers in shortest round-trip form.
std::string to_csv(const TrajectoryLog& log);
void write_csv(const TrajectoryLog& log, const std::string& path);

/// Column names and row-major values read back from a CSV file.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  /// Throws ConfigError naming the column when it is absent.
  std::size_t index(const std::string& name) const;
};
CsvTable read_csv(const std::string& path);

struct RunArtifacts {
  std::string csv;
  std::string manifest;
  std::string config_echo;
};

/// <out_dir>/<scenario>_<controller>_seed<seed>.{csv,manifest.json,config}
RunArtifacts artifact_paths(const std::string& out_dir, const ConfigValues& resolved);

/// JSON text: resolved config, version, seed, artifact paths, wall-clock
/// time and the episode outcome.
std::string make_manifest(const ConfigValues& resolved, const EpisodeResult& result,
                          const RunArtifacts& paths, double wall_seconds);

/// Reads the "config" block of a manifest back. Throws ConfigError on
/// malformed JSON.
ConfigValues config_from_manifest(const std::string& manifest_json);

/// Writes CSV, manifest and config echo; creates out_dir if needed.
RunArtifacts write_run(const std::string& out_dir, const ConfigValues& resolved,
                       const EpisodeResult& result, double wall_seconds);

/// Gnuplot scripts plus whitespace-separated data files: weights, states,
/// control and metrics for every log, and an E_u overlay when more than one
/// log is given. Returns the script paths; no logs means no output.
std::vector<std::string> emit_plots(const std::vector<std::string>& log_paths,
                                    const std::string& out_dir);

}  // namespace iadp
