#include "iadp/runner.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

#include "json.hpp"

namespace iadp {

RunOutcome run_and_write(const ConfigValues& resolved, const std::string& out_dir) {
  RunOutcome out;
  out.resolved = resolved;
  const SimConfig cfg = build_sim_config(resolved);
  const auto start = std::chrono::steady_clock::now();
  out.result = run_episode(cfg);
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.artifacts = write_run(out_dir, resolved, out.result, out.wall_seconds);
  return out;
}

std::vector<RunOutcome> run_compare(const ConfigValues& resolved, const std::string& out_dir) {
  std::vector<std::future<RunOutcome>> jobs;
  for (const char* kind : {"iadp", "zsadp", "tadp"}) {
    ConfigValues v = resolved;
    v["controller"] = kind;
    jobs.push_back(std::async(std::launch::async, [v, out_dir] { return run_and_write(v, out_dir); }));
  }
  std::vector<RunOutcome> runs;
  for (auto& job : jobs) runs.push_back(job.get());

  std::ofstream(std::filesystem::path(out_dir) / ("summary_" + resolved.at("scenario") + ".json"))
      << summary_json(runs);
  std::ofstream(std::filesystem::path(out_dir) / ("summary_" + resolved.at("scenario") + ".txt"))
      << summary_table(runs);
  return runs;
}

std::string summary_table(const std::vector<RunOutcome>& runs) {
  std::ostringstream s;
  char line[256];
  std::snprintf(line, sizeof line, "%-8s %14s %14s %10s %10s %10s\n", "ctrl", "E_u", "E_x",
                "diverged", "t_div", "E_u/ref");
  s << line;
  const double ref = runs.empty() ? 0.0 : runs.front().result.final_E_u();
  for (const auto& r : runs) {
    const auto& res = r.result;
    const std::string t_div =
        res.diverged_time ? format_double(*res.diverged_time) : std::string("-");
    std::snprintf(line, sizeof line, "%-8s %14.6g %14.6g %10s %10s %10.4g\n",
                  r.resolved.at("controller").c_str(), res.final_E_u(), res.final_E_x(),
                  res.diverged ? "yes" : "no", t_div.c_str(),
                  ref > 0.0 ? res.final_E_u() / ref : 0.0);
    s << line;
  }
  return s.str();
}

std::string summary_json(const std::vector<RunOutcome>& runs) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : runs) {
    const auto& res = r.result;
    j.push_back({{"controller", r.resolved.at("controller")},
                 {"scenario", r.resolved.at("scenario")},
                 {"seed", r.resolved.at("seed")},
                 {"E_u", res.final_E_u()},
                 {"E_x", res.final_E_x()},
                 {"diverged", res.diverged},
                 {"diverged_time", res.diverged_time ? nlohmann::json(*res.diverged_time)
                                                     : nlohmann::json(nullptr)},
                 {"csv", r.artifacts.csv}});
  }
  return j.dump(2) + "\n";
}

}  // namespace iadp
