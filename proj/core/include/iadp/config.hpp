#pragma once

#include <map>
#include <string>
#include <vector>

#include "iadp/sim.hpp"

namespace iadp {

/// Resolved configuration as canonical `key -> value text`, one entry for
/// every known key.
using ConfigValues = std::map<std::string, std::string>;

/// Every known key with its built-in default (scenario s1, controller iadp).
const ConfigValues& default_values();

/// Values a scenario preset sets on top of the defaults. Throws ConfigError
/// for an unknown id.
ConfigValues scenario_preset(const std::string& id);

/// Parses flat `key = value` text. `#` starts a comment; arrays are written
/// as bracketed comma lists and may nest. Throws ConfigError with the line
/// number on syntax errors, duplicate keys or unknown keys.
ConfigValues parse_config_text(const std::string& text, const std::string& origin = "config");
ConfigValues parse_config_file(const std::string& path);

/// `key=value` as given to --override.
std::pair<std::string, std::string> parse_override(const std::string& arg);

/// defaults < preset(scenario) < file < flags. The scenario id is taken from
/// flags, then the file, then the default. Returns canonical text for every
/// key; throws ConfigError naming the key for malformed values.
ConfigValues resolve_config(const ConfigValues& file, const ConfigValues& flags);

/// Rewrites each value in canonical form (shortest round-trip numbers,
/// normalised lists). Throws ConfigError naming the key.
ConfigValues canonicalize(const ConfigValues& values);

/// Builds and validates the simulation config.
SimConfig build_sim_config(const ConfigValues& resolved);

/// `key = value` lines in key order; parse_config_text of the result gives
/// back `values`.
std::string config_echo(const ConfigValues& values);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace iadp
