#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "iadp/controllers.hpp"
#include "iadp/critic.hpp"
#include "iadp/learner.hpp"
#include "iadp/plant.hpp"
#include "iadp/tde.hpp"
#include "iadp/types.hpp"

namespace iadp {

/// Everything one episode needs. Defaults are the pendulum benchmark values
/// with no disturbance, noise or events; scenario presets fill the rest.
struct SimConfig {
  std::string scenario = "custom";
  ControllerKind controller = ControllerKind::iadp;
  std::uint64_t seed = 1;

  double dt = 1e-3;
  double t_end = 80.0;
  StateVec x0 = (StateVec(2) << 2.0, -2.0).finished();
  XdotSource xdot_source = XdotSource::backward_difference;
  int delay_steps = 1;
  double divergence_threshold = 1e6;

  CostConfig cost{Matrix::Identity(2, 2), 2.0, 2.0};
  Matrix g_bar = (Matrix(2, 1) << 0.0, 0.1).finished();

  std::size_t buffer_capacity = 8;
  LearnerGains gains{1e-4 * Matrix::Identity(6, 6), 5.0, 3.0};
  InsertionPolicy policy = InsertionPolicy::sequential_fill;
  int cadence = 10;                 // plant steps between buffer candidates
  double collect_until = 2.0;       // seconds
  double excitation_deadline = 5.0; // seconds
  bool learning = true;

  BasisSet basis = BasisSet::default_pendulum();
  Vector w0 = Vector::Zero(6);

  double zsadp_gamma = 1.0;
  double tadp_rho = 0.1;
  double tadp_d_M = TadpController::kDefaultDm;
  double tadp_l_M = TadpController::kDefaultLm;
  /// Hand plant swaps to the baselines' models as well.
  bool baselines_model_update = false;

  std::string plant = "pendulum";
  std::vector<DisturbanceSignal> disturbances;
  NoiseSpec noise;
  std::vector<TimedEvent> events;
};

/// Throws ConfigError naming the offending field.
void validate(const SimConfig& cfg);

/// Number of plant steps, t_end / dt. Throws ConfigError unless t_end is a
/// whole multiple of dt.
long step_count(double dt, double t_end);

using DisturbanceFn = std::function<Vector(const StateVec& x, double t)>;

/// Classical RK4 with u held over the step and d evaluated at stage times.
StateVec rk4_step(const ControlAffinePlant& plant, const StateVec& x,
                  const InputVec& u, const DisturbanceFn& d_fn, double t,
                  double dt);

/// Row-major numeric table with a fixed column layout.
class TrajectoryLog {
 public:
  TrajectoryLog() = default;
  TrajectoryLog(int n, int m, int N, int q, int aux);

  /// Column names in order: t, x_true_*, x_meas_*, u_*, du_*, w_*,
  /// theta_tilde, xi_*, d (d_* when q > 1), E_u, E_x, rank, sigma_min, aux_*.
  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t width() const { return columns_.size(); }
  std::size_t rows() const { return width() == 0 ? 0 : data_.size() / width(); }

  /// Index of a named column; throws ConfigError naming it when absent.
  std::size_t column_index(const std::string& name) const;
  double at(std::size_t row, std::size_t col) const { return data_[row * width() + col]; }
  double at(std::size_t row, const std::string& name) const {
    return at(row, column_index(name));
  }
  std::vector<double> column(const std::string& name) const;
  const std::vector<double>& data() const { return data_; }

  int n() const { return n_; }
  int m() const { return m_; }
  int N() const { return N_; }
  int q() const { return q_; }
  int aux() const { return aux_; }

  /// Appends one row; `values` must have width() entries.
  void append(const std::vector<double>& values);

  /// Offsets of the first entry of each column group.
  struct Layout {
    std::size_t t, x_true, x_meas, u, du, w, theta_tilde, xi, d, E_u, E_x, rank,
        sigma_min, aux;
  };
  const Layout& layout() const { return layout_; }

 private:
  int n_ = 0, m_ = 0, N_ = 0, q_ = 0, aux_ = 0;
  std::vector<std::string> columns_;
  std::vector<double> data_;
  Layout layout_{};
};

struct Metrics {
  std::vector<double> t;
  std::vector<double> E_u;  // ∫‖u‖² dτ
  std::vector<double> E_x;  // ∫‖x‖² dτ
};

/// Trapezoidal running integrals of ‖u‖² and ‖x_true‖² over the log's rows.
Metrics accumulate_metrics(const TrajectoryLog& log);

/// The same trapezoid rule, one sample at a time.
class MetricsAccumulator {
 public:
  void add(double t, double u_sq, double x_sq);
  double E_u() const { return E_u_; }
  double E_x() const { return E_x_; }

 private:
  bool started_ = false;
  double t_prev_ = 0.0, u_prev_ = 0.0, x_prev_ = 0.0;
  double E_u_ = 0.0, E_x_ = 0.0;
};

struct EpisodeResult {
  TrajectoryLog log;
  bool diverged = false;
  std::optional<long> diverged_step;
  std::optional<double> diverged_time;
  std::string divergence_reason;
  long guard_hits = 0;           // rows where a control channel hit β − 1e-12
  double max_abs_u = 0.0;
  bool insufficient_excitation = false;
  RankReport buffer;             // at the end of the episode
  std::vector<std::string> fired_events;

  double final_E_u() const;
  double final_E_x() const;
};

/// Runs one closed-loop episode. Never throws for divergence: the result is
/// flagged and the log holds every row up to the fault.
EpisodeResult run_episode(const SimConfig& cfg);

}  // namespace iadp
