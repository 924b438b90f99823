#include "iadp/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"

#ifndef IADP_VERSION_STRING
#define IADP_VERSION_STRING "0.0.0"
#endif

namespace iadp {

namespace fs = std::filesystem;
using nlohmann::json;

const char* software_version() { return IADP_VERSION_STRING; }

std::string to_csv(const TrajectoryLog& log) {
  std::string out;
  out.reserve(log.data().size() * 12 + 256);
  const auto& cols = log.columns();
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (c > 0) out += ',';
    out += cols[c];
  }
  out += '\n';
  for (std::size_t r = 0; r < log.rows(); ++r) {
    for (std::size_t c = 0; c < log.width(); ++c) {
      if (c > 0) out += ',';
      out += format_double(log.at(r, c));
    }
    out += '\n';
  }
  return out;
}

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

}  // namespace

void write_csv(const TrajectoryLog& log, const std::string& path) {
  write_text(path, to_csv(log));
}

std::size_t CsvTable::index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw ConfigError("log is missing column '" + name + "'");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read log '" + path + "'");
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("log '" + path + "' is empty");
  table.columns = split(line, ',');
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != table.columns.size()) {
      throw ConfigError("log '" + path + "': ragged row");
    }
    std::vector<double> row(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) row[i] = std::stod(cells[i]);
    table.rows.push_back(std::move(row));
  }
  return table;
}

// ---------------------------------------------------------------------------

RunArtifacts artifact_paths(const std::string& out_dir, const ConfigValues& resolved) {
  const std::string stem = resolved.at("scenario") + "_" + resolved.at("controller") +
                           "_seed" + resolved.at("seed");
  const fs::path dir(out_dir);
  return {(dir / (stem + ".csv")).string(), (dir / (stem + ".manifest.json")).string(),
          (dir / (stem + ".config")).string()};
}

std::string make_manifest(const ConfigValues& resolved, const EpisodeResult& result,
                          const RunArtifacts& paths, double wall_seconds) {
  json j;
  j["software_version"] = software_version();
  j["csv_schema"] = kCsvSchema;
  j["seed"] = std::stoull(resolved.at("seed"));
  j["scenario"] = resolved.at("scenario");
  j["controller"] = resolved.at("controller");
  j["config"] = json::object();
  for (const auto& [k, v] : resolved) j["config"][k] = v;
  j["outputs"] = {{"csv", paths.csv}, {"manifest", paths.manifest},
                  {"config_echo", paths.config_echo}};
  j["wall_clock_seconds"] = wall_seconds;
  json outcome;
  outcome["diverged"] = result.diverged;
  outcome["diverged_step"] = result.diverged_step ? json(*result.diverged_step) : json(nullptr);
  outcome["diverged_time"] = result.diverged_time ? json(*result.diverged_time) : json(nullptr);
  outcome["divergence_reason"] = result.divergence_reason;
  outcome["rows"] = result.log.rows();
  outcome["final_E_u"] = result.final_E_u();
  outcome["final_E_x"] = result.final_E_x();
  outcome["max_abs_u"] = result.max_abs_u;
  outcome["saturation_guard_rows"] = result.guard_hits;
  outcome["insufficient_excitation"] = result.insufficient_excitation;
  outcome["buffer_rank"] = result.buffer.rank;
  outcome["buffer_sigma_min"] = result.buffer.sigma_min;
  outcome["events"] = result.fired_events;
  j["outcome"] = outcome;
  return j.dump(2) + "\n";
}

ConfigValues config_from_manifest(const std::string& manifest_json) {
  json j;
  try {
    j = json::parse(manifest_json);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
  if (!j.contains("config") || !j["config"].is_object()) {
    throw ConfigError("manifest: no config block");
  }
  ConfigValues out;
  for (const auto& [k, v] : j["config"].items()) {
    if (!v.is_string()) throw ConfigError("manifest: config." + k + " is not a string");
    out[k] = v.get<std::string>();
  }
  return out;
}

RunArtifacts write_run(const std::string& out_dir, const ConfigValues& resolved,
                       const EpisodeResult& result, double wall_seconds) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + out_dir + "': " + ec.message());
  const RunArtifacts paths = artifact_paths(out_dir, resolved);
  write_csv(result.log, paths.csv);
  write_text(paths.config_echo, "# resolved configuration\n" + config_echo(resolved));
  write_text(paths.manifest, make_manifest(resolved, result, paths, wall_seconds));
  return paths;
}

// ---------------------------------------------------------------------------
// Plot emission

namespace {

constexpr std::size_t kMaxPlotRows = 8000;

std::vector<std::string> group_columns(const CsvTable& t, const std::string& prefix) {
  std::vector<std::string> out;
  for (const auto& c : t.columns) {
    if (c.rfind(prefix, 0) == 0) out.push_back(c);
  }
  if (out.empty()) throw ConfigError("log is missing column '" + prefix + "1'");
  return out;
}

struct Figure {
  std::string name;
  std::string ylabel;
  std::vector<std::string> columns;
};

std::string write_figure(const CsvTable& table, const Figure& fig, const fs::path& dir,
                         const std::string& stem) {
  std::vector<std::size_t> idx{table.index("t")};
  for (const auto& c : fig.columns) idx.push_back(table.index(c));

  const std::string dat = stem + "_" + fig.name + ".dat";
  const std::string gp = stem + "_" + fig.name + ".gp";
  std::string data = "# t";
  for (const auto& c : fig.columns) data += " " + c;
  data += "\n";
  const std::size_t stride = std::max<std::size_t>(1, table.rows.size() / kMaxPlotRows);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (r % stride != 0 && r + 1 != table.rows.size()) continue;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (k > 0) data += ' ';
      data += format_double(table.rows[r][idx[k]]);
    }
    data += '\n';
  }
  write_text((dir / dat).string(), data);

  std::ostringstream s;
  s << "set terminal svg size 900,500\n"
    << "set output '" << stem << "_" << fig.name << ".svg'\n"
    << "set xlabel 't [s]'\n"
    << "set ylabel '" << fig.ylabel << "'\n"
    << "set grid\n"
    << "plot ";
  for (std::size_t k = 0; k < fig.columns.size(); ++k) {
    if (k > 0) s << ", \\\n     ";
    s << "'" << dat << "' using 1:" << k + 2 << " with lines title '" << fig.columns[k] << "'";
  }
  s << "\n";
  const fs::path script = dir / gp;
  write_text(script.string(), s.str());
  return script.string();
}

}  // namespace

std::vector<std::string> emit_plots(const std::vector<std::string>& log_paths,
                                    const std::string& out_dir) {
  std::vector<std::string> scripts;
  if (log_paths.empty()) return scripts;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + out_dir + "'");
  const fs::path dir(out_dir);

  std::vector<std::pair<std::string, CsvTable>> tables;
  for (const auto& path : log_paths) {
    CsvTable table = read_csv(path);
    const std::string stem = fs::path(path).stem().string();
    std::vector<std::string> du = group_columns(table, "du_");
    std::vector<std::string> control = group_columns(table, "u_");
    control.insert(control.end(), du.begin(), du.end());
    const std::vector<Figure> figures = {
        {"weights", "critic weights", group_columns(table, "w_")},
        {"states", "state", group_columns(table, "x_true_")},
        {"control", "control", control},
        {"metrics", "integrated cost", {"E_u", "E_x"}},
    };
    for (const auto& fig : figures) scripts.push_back(write_figure(table, fig, dir, stem));
    tables.emplace_back(stem, std::move(table));
  }

  if (tables.size() > 1) {
    std::map<long long, std::vector<double>> joined;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < tables.size(); ++k) {
      const auto& table = tables[k].second;
      const std::size_t ti = table.index("t");
      const std::size_t ei = table.index("E_u");
      for (const auto& row : table.rows) {
        auto& slot = joined[std::llround(row[ti] * 1e9)];
        slot.resize(tables.size(), nan);
        slot[k] = row[ei];
      }
    }
    std::string data = "# t";
    for (const auto& [stem, table] : tables) data += " " + stem;
    data += "\n";
    const std::size_t stride = std::max<std::size_t>(1, joined.size() / kMaxPlotRows);
    std::size_t i = 0;
    for (const auto& [key, vals] : joined) {
      const bool last = i + 1 == joined.size();
      if (i++ % stride != 0 && !last) continue;
      data += format_double(static_cast<double>(key) * 1e-9);
      for (double v : vals) data += ' ' + (std::isnan(v) ? std::string("NaN") : format_double(v));
      data += '\n';
    }
    write_text((dir / "overlay_E_u.dat").string(), data);
    std::ostringstream s;
    s << "set terminal svg size 900,500\n"
      << "set output 'overlay_E_u.svg'\n"
      << "set xlabel 't [s]'\n"
      << "set ylabel 'E_u'\n"
      << "set grid\n"
      << "plot ";
    for (std::size_t k = 0; k < tables.size(); ++k) {
      if (k > 0) s << ", \\\n     ";
      s << "'overlay_E_u.dat' using 1:" << k + 2 << " with lines title '" << tables[k].first << "'";
    }
    s << "\n";
    write_text((dir / "overlay_E_u.gp").string(), s.str());
    scripts.push_back((dir / "overlay_E_u.gp").string());
  }
  return scripts;
}

}  // namespace iadp
