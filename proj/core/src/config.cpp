#include "iadp/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace iadp {

std::string format_double(double v) {
  if (v == 0.0) return "0";  // also folds -0
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

// ---------------------------------------------------------------------------
// Value syntax: atom | '[' value (',' value)* ']' | '[]'

struct Node {
  bool is_list = false;
  std::string atom;
  std::vector<Node> items;
};

class ValueParser {
 public:
  explicit ValueParser(const std::string& text) : s_(text) {}

  Node parse() {
    Node n = value();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing text");
    return n;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(what + " in '" + s_ + "'");
  }
  Node value() {
    skip_ws();
    if (pos_ >= s_.size()) fail("missing value");
    Node n;
    if (s_[pos_] == '[') {
      n.is_list = true;
      ++pos_;
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == ']') {
        ++pos_;
        return n;
      }
      while (true) {
        n.items.push_back(value());
        skip_ws();
        if (pos_ >= s_.size()) fail("unterminated list");
        if (s_[pos_] == ',') {
          ++pos_;
          continue;
        }
        if (s_[pos_] == ']') {
          ++pos_;
          break;
        }
        fail("expected ',' or ']'");
      }
      return n;
    }
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != '[' &&
           !std::isspace(static_cast<unsigned char>(s_[pos_]))) {
      ++pos_;
    }
    n.atom = s_.substr(start, pos_ - start);
    if (n.atom.empty()) fail("empty value");
    return n;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const Node& n, const std::string& key) {
  if (n.is_list) throw ConfigError(key + ": expected a number, got a list");
  double v = 0.0;
  const char* first = n.atom.data();
  const char* last = first + n.atom.size();
  if (!n.atom.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
    throw ConfigError(key + ": '" + n.atom + "' is not a finite number");
  }
  return v;
}

long long to_integer(const Node& n, const std::string& key) {
  if (n.is_list) throw ConfigError(key + ": expected an integer, got a list");
  long long v = 0;
  const char* first = n.atom.data();
  const char* last = first + n.atom.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw ConfigError(key + ": '" + n.atom + "' is not an integer");
  }
  return v;
}

std::string render(const Node& n) {
  if (!n.is_list) return n.atom;
  std::string out = "[";
  for (std::size_t i = 0; i < n.items.size(); ++i) {
    if (i > 0) out += ", ";
    out += render(n.items[i]);
  }
  return out + "]";
}

// ---------------------------------------------------------------------------
// Key table

enum class Kind {
  choice, uint64, integer, number, boolean, optional_number, vector,
  vector_or_scalar, window, matrix, int_matrix
};

struct KeySpec {
  Kind kind;
  std::string default_value;
  std::vector<std::string> choices;
};

const std::map<std::string, KeySpec>& key_table() {
  static const std::map<std::string, KeySpec> table = {
      {"scenario", {Kind::choice, "s1", {"s1", "s2", "s3", "custom"}}},
      {"controller", {Kind::choice, "iadp", {"iadp", "zsadp", "tadp", "zero"}}},
      {"seed", {Kind::uint64, "1", {}}},
      {"plant", {Kind::choice, "pendulum", {"pendulum", "pendulum_softened", "pendulum_inverted"}}},
      {"sim.dt", {Kind::number, "0.001", {}}},
      {"sim.t_end", {Kind::number, "80", {}}},
      {"sim.x0", {Kind::vector, "[2, -2]", {}}},
      {"sim.xdot_source", {Kind::choice, "backward_difference", {"backward_difference", "ground_truth"}}},
      {"sim.delay_steps", {Kind::integer, "1", {}}},
      {"sim.divergence_threshold", {Kind::number, "1000000", {}}},
      {"sim.learning", {Kind::boolean, "true", {}}},
      {"cost.Q", {Kind::matrix, "[[1, 0], [0, 1]]", {}}},
      {"cost.beta", {Kind::number, "2", {}}},
      {"cost.c_bar", {Kind::number, "2", {}}},
      {"iadp.g_bar", {Kind::matrix, "[0, 0.1]", {}}},
      {"learner.P", {Kind::integer, "8", {}}},
      {"learner.Gamma", {Kind::matrix, "0.0001", {}}},
      {"learner.k_c", {Kind::number, "5", {}}},
      {"learner.k_e", {Kind::number, "3", {}}},
      {"learner.policy", {Kind::choice, "sequential_fill", {"sequential_fill", "sigma_min_enrich"}}},
      {"learner.cadence", {Kind::integer, "10", {}}},
      {"learner.collect_until", {Kind::number, "2", {}}},
      {"learner.excitation_deadline", {Kind::number, "5", {}}},
      {"critic.basis", {Kind::int_matrix, "[[2, 0], [1, 1], [0, 2], [0, 3], [1, 2], [2, 1]]", {}}},
      {"critic.w0", {Kind::vector_or_scalar, "0", {}}},
      {"zsadp.gamma", {Kind::number, "1", {}}},
      {"tadp.rho", {Kind::number, "0.1", {}}},
      {"tadp.d_M", {Kind::number, format_double(TadpController::kDefaultDm), {}}},
      {"tadp.l_M", {Kind::number, format_double(TadpController::kDefaultLm), {}}},
      {"baselines.model_update", {Kind::boolean, "false", {}}},
      {"disturbance.omega1", {Kind::number, "-0.3906", {}}},
      {"disturbance.omega2", {Kind::number, "1.0051", {}}},
      {"square.amplitude", {Kind::number, "0", {}}},
      {"square.period", {Kind::number, "5", {}}},
      {"square.window", {Kind::window, "[20, 60]", {}}},
      {"noise.enabled", {Kind::boolean, "false", {}}},
      {"noise.snr_db", {Kind::number, "50", {}}},
      {"noise.power_dbw", {Kind::optional_number, "none", {}}},
      {"noise.window", {Kind::window, "[20, 60]", {}}},
      {"swap.plant", {Kind::choice, "none", {"none", "pendulum", "pendulum_softened", "pendulum_inverted"}}},
      {"swap.time", {Kind::number, "20", {}}},
  };
  return table;
}

const KeySpec& spec_for(const std::string& key) {
  const auto& table = key_table();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown key '" + key + "'");
  return it->second;
}

bool is_number_list(const Node& n) {
  if (!n.is_list) return false;
  for (const auto& item : n.items) {
    if (item.is_list) return false;
  }
  return true;
}

Node canonical_node(const std::string& key, const KeySpec& spec, const std::string& text) {
  Node n;
  try {
    n = ValueParser(text).parse();
  } catch (const ConfigError& e) {
    throw ConfigError(key + ": " + e.what());
  }
  auto number_atom = [&](const Node& item) {
    Node out;
    out.atom = format_double(to_double(item, key));
    return out;
  };
  auto number_list = [&](const Node& list) {
    Node out;
    out.is_list = true;
    for (const auto& item : list.items) out.items.push_back(number_atom(item));
    return out;
  };

  switch (spec.kind) {
    case Kind::choice: {
      if (n.is_list) throw ConfigError(key + ": expected one word, got a list");
      for (const auto& c : spec.choices) {
        if (c == n.atom) return n;
      }
      std::string opts;
      for (const auto& c : spec.choices) opts += (opts.empty() ? "" : ", ") + c;
      throw ConfigError(key + ": '" + n.atom + "' is not one of " + opts);
    }
    case Kind::uint64: {
      const long long v = to_integer(n, key);
      if (v < 0) throw ConfigError(key + ": must be >= 0");
      Node out;
      out.atom = std::to_string(v);
      return out;
    }
    case Kind::integer: {
      Node out;
      out.atom = std::to_string(to_integer(n, key));
      return out;
    }
    case Kind::number:
      return number_atom(n);
    case Kind::boolean: {
      if (!n.is_list && (n.atom == "true" || n.atom == "false")) return n;
      throw ConfigError(key + ": expected true or false");
    }
    case Kind::optional_number:
      if (!n.is_list && n.atom == "none") return n;
      return number_atom(n);
    case Kind::vector:
      if (!is_number_list(n)) throw ConfigError(key + ": expected a list of numbers");
      return number_list(n);
    case Kind::vector_or_scalar:
      if (!n.is_list) return number_atom(n);
      if (!is_number_list(n)) throw ConfigError(key + ": expected a number or a list of numbers");
      return number_list(n);
    case Kind::window: {
      if (!is_number_list(n) || n.items.size() != 2) {
        throw ConfigError(key + ": expected [t_on, t_off]");
      }
      return number_list(n);
    }
    case Kind::matrix: {
      if (!n.is_list) return number_atom(n);
      if (is_number_list(n)) return number_list(n);
      Node out;
      out.is_list = true;
      for (const auto& row : n.items) {
        if (!is_number_list(row)) throw ConfigError(key + ": rows must be lists of numbers");
        if (row.items.size() != n.items.front().items.size()) {
          throw ConfigError(key + ": rows have different lengths");
        }
        out.items.push_back(number_list(row));
      }
      return out;
    }
    case Kind::int_matrix: {
      if (!n.is_list || n.items.empty()) throw ConfigError(key + ": expected a list of exponent lists");
      Node out;
      out.is_list = true;
      for (const auto& row : n.items) {
        if (!is_number_list(row)) throw ConfigError(key + ": each monomial must be a list of integers");
        Node r;
        r.is_list = true;
        for (const auto& item : row.items) {
          Node a;
          a.atom = std::to_string(to_integer(item, key));
          r.items.push_back(a);
        }
        out.items.push_back(r);
      }
      return out;
    }
  }
  return n;
}

Node node_of(const ConfigValues& v, const std::string& key) {
  return ValueParser(v.at(key)).parse();
}

double get_number(const ConfigValues& v, const std::string& key) {
  return to_double(node_of(v, key), key);
}

long long get_integer(const ConfigValues& v, const std::string& key) {
  return to_integer(node_of(v, key), key);
}

bool get_bool(const ConfigValues& v, const std::string& key) { return v.at(key) == "true"; }

Vector get_vector(const ConfigValues& v, const std::string& key) {
  const Node n = node_of(v, key);
  Vector out(static_cast<Eigen::Index>(n.items.size()));
  for (std::size_t i = 0; i < n.items.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = to_double(n.items[i], key);
  }
  return out;
}

/// Scalar -> s I(size); flat list -> column vector; nested list -> rows.
Matrix get_matrix(const ConfigValues& v, const std::string& key, int scalar_size) {
  const Node n = node_of(v, key);
  if (!n.is_list) return to_double(n, key) * Matrix::Identity(scalar_size, scalar_size);
  if (n.items.empty()) throw ConfigError(key + ": empty matrix");
  if (is_number_list(n)) {
    Matrix out(static_cast<Eigen::Index>(n.items.size()), 1);
    for (std::size_t i = 0; i < n.items.size(); ++i) {
      out(static_cast<Eigen::Index>(i), 0) = to_double(n.items[i], key);
    }
    return out;
  }
  const auto rows = static_cast<Eigen::Index>(n.items.size());
  const auto cols = static_cast<Eigen::Index>(n.items.front().items.size());
  Matrix out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      out(r, c) = to_double(n.items[static_cast<std::size_t>(r)].items[static_cast<std::size_t>(c)], key);
    }
  }
  return out;
}

template <typename Fn>
auto keyed(const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    if (what.rfind(key, 0) == 0) throw;
    throw ConfigError(key + ": " + what);
  }
}

}  // namespace

// ---------------------------------------------------------------------------

const ConfigValues& default_values() {
  static const ConfigValues defaults = [] {
    ConfigValues v;
    for (const auto& [key, spec] : key_table()) v[key] = spec.default_value;
    return v;
  }();
  return defaults;
}

ConfigValues scenario_preset(const std::string& id) {
  if (id == "s1" || id == "custom") return {};
  if (id == "s2") {
    return {{"square.amplitude", "0.2"}, {"square.period", "5"},
            {"noise.enabled", "true"},   {"noise.snr_db", "50"},
            {"swap.plant", "pendulum_softened"}};
  }
  if (id == "s3") {
    return {{"square.amplitude", "0.5"}, {"square.period", "1"},
            {"noise.enabled", "true"},   {"noise.snr_db", "10"},
            {"swap.plant", "pendulum_inverted"}};
  }
  throw ConfigError("scenario: unknown preset '" + id + "'");
}

ConfigValues parse_config_text(const std::string& text, const std::string& origin) {
  ConfigValues out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    // A list may continue over several lines until its brackets balance.
    auto depth = [](const std::string& s) {
      return std::count(s.begin(), s.end(), '[') - std::count(s.begin(), s.end(), ']');
    };
    while (depth(value) > 0) {
      std::string next;
      if (!std::getline(in, next)) break;
      ++lineno;
      const auto h = next.find('#');
      if (h != std::string::npos) next.erase(h);
      value += " " + trim(next);
    }
    if (depth(value) != 0) throw ConfigError(where + ": " + key + ": unbalanced brackets");
    if (key.empty()) throw ConfigError(where + ": missing key");
    if (key_table().count(key) == 0) throw ConfigError(where + ": unknown key '" + key + "'");
    if (value.empty()) throw ConfigError(where + ": " + key + ": missing value");
    if (!out.emplace(key, value).second) {
      throw ConfigError(where + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

ConfigValues parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

std::pair<std::string, std::string> parse_override(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos) throw ConfigError("--override expects key=value, got '" + arg + "'");
  std::string key = trim(arg.substr(0, eq));
  std::string value = trim(arg.substr(eq + 1));
  spec_for(key);
  if (value.empty()) throw ConfigError(key + ": missing value");
  return {key, value};
}

ConfigValues canonicalize(const ConfigValues& values) {
  ConfigValues out;
  for (const auto& [key, text] : values) {
    out[key] = render(canonical_node(key, spec_for(key), text));
  }
  return out;
}

ConfigValues resolve_config(const ConfigValues& file, const ConfigValues& flags) {
  std::string scenario = default_values().at("scenario");
  if (const auto it = file.find("scenario"); it != file.end()) scenario = trim(it->second);
  if (const auto it = flags.find("scenario"); it != flags.end()) scenario = trim(it->second);
  canonical_node("scenario", spec_for("scenario"), scenario);

  ConfigValues v = default_values();
  for (const auto& [k, val] : scenario_preset(scenario)) v[k] = val;
  for (const auto& [k, val] : file) v[k] = val;
  for (const auto& [k, val] : flags) v[k] = val;
  v["scenario"] = scenario;
  v = canonicalize(v);
  build_sim_config(v);  // semantic checks
  return v;
}

SimConfig build_sim_config(const ConfigValues& raw) {
  const ConfigValues v = canonicalize(raw);
  for (const auto& [key, spec] : key_table()) {
    if (v.count(key) == 0) throw ConfigError("missing key '" + key + "'");
  }

  SimConfig cfg;
  cfg.scenario = v.at("scenario");
  cfg.controller = controller_kind_from_string(v.at("controller"));
  cfg.seed = std::stoull(v.at("seed"));
  cfg.plant = v.at("plant");
  const ControlAffinePlant plant = plants::by_name(cfg.plant);
  const int n = plant.state_dim();

  cfg.dt = get_number(v, "sim.dt");
  if (!(cfg.dt > 0.0)) throw ConfigError("sim.dt: must be > 0");
  cfg.t_end = get_number(v, "sim.t_end");
  keyed("sim.t_end", [&] { return step_count(cfg.dt, cfg.t_end); });
  cfg.x0 = get_vector(v, "sim.x0");
  if (cfg.x0.size() != n) throw ConfigError("sim.x0: must have length " + std::to_string(n));
  cfg.xdot_source = v.at("sim.xdot_source") == "ground_truth" ? XdotSource::ground_truth
                                                              : XdotSource::backward_difference;
  const long long delay = get_integer(v, "sim.delay_steps");
  if (delay < 1 || delay > 1000000) throw ConfigError("sim.delay_steps: must be in [1, 1e6]");
  cfg.delay_steps = static_cast<int>(delay);
  cfg.divergence_threshold = get_number(v, "sim.divergence_threshold");
  if (!(cfg.divergence_threshold > 0.0)) throw ConfigError("sim.divergence_threshold: must be > 0");
  cfg.learning = get_bool(v, "sim.learning");

  cfg.cost.Q = get_matrix(v, "cost.Q", n);
  if (cfg.cost.Q.rows() != n || cfg.cost.Q.cols() != n) {
    throw ConfigError("cost.Q: must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  cfg.cost.beta = get_number(v, "cost.beta");
  cfg.cost.c_bar = get_number(v, "cost.c_bar");
  validate(cfg.cost);

  cfg.g_bar = get_matrix(v, "iadp.g_bar", n);
  if (cfg.g_bar.rows() != n || cfg.g_bar.cols() != plant.input_dim()) {
    throw ConfigError("iadp.g_bar: must be " + std::to_string(n) + "x" +
                      std::to_string(plant.input_dim()));
  }
  keyed("iadp.g_bar", [&] { return IncrementalModelConfig(cfg.g_bar); });

  {
    const Node basis = node_of(v, "critic.basis");
    std::vector<Monomial> features;
    for (const auto& row : basis.items) {
      Monomial mono;
      for (const auto& e : row.items) {
        mono.exponents.push_back(static_cast<int>(to_integer(e, "critic.basis")));
      }
      features.push_back(std::move(mono));
    }
    cfg.basis = keyed("critic.basis", [&] { return BasisSet(std::move(features)); });
    if (cfg.basis.arity() != n) {
      throw ConfigError("critic.basis: monomials must have " + std::to_string(n) + " exponents");
    }
  }
  const int N = cfg.basis.size();
  {
    const Node w0 = node_of(v, "critic.w0");
    if (!w0.is_list) {
      cfg.w0 = Vector::Constant(N, to_double(w0, "critic.w0"));
    } else {
      cfg.w0 = get_vector(v, "critic.w0");
      if (cfg.w0.size() != N) throw ConfigError("critic.w0: must have length " + std::to_string(N));
    }
  }

  const long long P = get_integer(v, "learner.P");
  if (P < 1) throw ConfigError("learner.P: must be >= 1");
  cfg.buffer_capacity = static_cast<std::size_t>(P);
  cfg.gains.Gamma = get_matrix(v, "learner.Gamma", N);
  if (cfg.gains.Gamma.rows() != N || cfg.gains.Gamma.cols() != N) {
    throw ConfigError("learner.Gamma: must be a scalar or " + std::to_string(N) + "x" +
                      std::to_string(N));
  }
  cfg.gains.k_c = get_number(v, "learner.k_c");
  cfg.gains.k_e = get_number(v, "learner.k_e");
  validate(cfg.gains);
  cfg.policy = v.at("learner.policy") == "sigma_min_enrich" ? InsertionPolicy::sigma_min_enrich
                                                            : InsertionPolicy::sequential_fill;
  const long long cadence = get_integer(v, "learner.cadence");
  if (cadence < 1) throw ConfigError("learner.cadence: must be >= 1");
  cfg.cadence = static_cast<int>(cadence);
  cfg.collect_until = get_number(v, "learner.collect_until");
  cfg.excitation_deadline = get_number(v, "learner.excitation_deadline");

  cfg.zsadp_gamma = get_number(v, "zsadp.gamma");
  if (!(cfg.zsadp_gamma > 0.0)) throw ConfigError("zsadp.gamma: must be > 0");
  cfg.tadp_rho = get_number(v, "tadp.rho");
  if (!(cfg.tadp_rho > 0.0)) throw ConfigError("tadp.rho: must be > 0");
  cfg.tadp_d_M = get_number(v, "tadp.d_M");
  cfg.tadp_l_M = get_number(v, "tadp.l_M");
  if (cfg.tadp_d_M < 0.0 || cfg.tadp_l_M < 0.0) {
    throw ConfigError("tadp.d_M: d_M and l_M must be >= 0");
  }
  cfg.baselines_model_update = get_bool(v, "baselines.model_update");

  const double w1 = get_number(v, "disturbance.omega1");
  const double w2 = get_number(v, "disturbance.omega2");
  if (w1 != 0.0) cfg.disturbances.push_back(VanishingDisturbance{w1, w2});
  const double amp = get_number(v, "square.amplitude");
  if (amp != 0.0) {
    const Vector win = get_vector(v, "square.window");
    SquareWave sq{amp, get_number(v, "square.period"), win(0), win(1)};
    keyed("square", [&] {
      validate(DisturbanceSignal(sq));
      return 0;
    });
    cfg.disturbances.push_back(sq);
  }

  cfg.noise.enabled = get_bool(v, "noise.enabled");
  cfg.noise.snr_db = get_number(v, "noise.snr_db");
  if (v.at("noise.power_dbw") != "none") cfg.noise.absolute_power_dbw = get_number(v, "noise.power_dbw");
  {
    const Vector win = get_vector(v, "noise.window");
    cfg.noise.t_on = win(0);
    cfg.noise.t_off = win(1);
    if (cfg.noise.enabled && !(win(0) < win(1))) {
      throw ConfigError("noise.window: must satisfy t_on < t_off");
    }
  }

  if (v.at("swap.plant") != "none") {
    const double t_swap = get_number(v, "swap.time");
    if (!(t_swap >= 0.0)) throw ConfigError("swap.time: must be >= 0");
    ControlAffinePlant next = plants::by_name(v.at("swap.plant"));
    if (next.state_dim() != n || next.input_dim() != plant.input_dim()) {
      throw ConfigError("swap.plant: dimensions differ from the initial plant");
    }
    cfg.events.push_back({t_swap, SwapPlant{std::move(next)}});
  }

  validate(cfg);
  return cfg;
}

std::string config_echo(const ConfigValues& values) {
  std::string out;
  for (const auto& [k, val] : values) out += k + " = " + val + "\n";
  return out;
}

}  // namespace iadp
