#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "iadp/types.hpp"

namespace iadp {

/// Ground-truth dynamics x' = f(x) + g(x) u + k(x) d.
///
/// Only the simulator evaluates this. The model-free controller never sees
/// it; the model-based baselines keep their own copy.
class ControlAffinePlant {
 public:
  using DriftFn = std::function<StateVec(const StateVec&)>;
  using MatrixFn = std::function<Matrix(const StateVec&)>;

  ControlAffinePlant(std::string name, int n, int m, int q, DriftFn drift,
                     MatrixFn input_map, MatrixFn disturbance_map);

  const std::string& name() const { return name_; }
  int state_dim() const { return n_; }
  int input_dim() const { return m_; }
  int disturbance_dim() const { return q_; }

  StateVec drift(const StateVec& x) const;
  Matrix input_map(const StateVec& x) const;
  Matrix disturbance_map(const StateVec& x) const;

  /// f(x) + g(x)u + k(x)d. Throws ConfigError on dimension mismatch and
  /// NumericFault on a non-finite result.
  StateVec eval(const StateVec& x, const InputVec& u, const Vector& d) const;

  /// Smallest singular value of g over the probe states; the full column
  /// rank assumption holds on the probes iff every value is > 0.
  double min_input_singular_value(const std::vector<StateVec>& probes) const;

 private:
  std::string name_;
  int n_;
  int m_;
  int q_;
  DriftFn drift_;
  MatrixFn input_map_;
  MatrixFn disturbance_map_;
};

StateVec eval_dynamics(const ControlAffinePlant& plant, const StateVec& x,
                       const InputVec& u, const Vector& d);

namespace plants {

/// Damped pendulum in state [angle, rate]:
///   x1' = x2 + d
///   x2' = -4.9 sin x1 - 0.2 x2 + 0.25 u - 0.2 d
ControlAffinePlant pendulum();

/// Lighter, less damped pendulum after an unmodeled load change.
ControlAffinePlant pendulum_softened();

/// Pendulum with every model parameter sign-inverted.
ControlAffinePlant pendulum_inverted();

/// x' = A x + B u + K d with constant matrices; used by tests and for
/// custom experiments.
ControlAffinePlant linear(std::string name, Matrix A, Matrix B, Matrix K);

/// Look up one of the named plants above ("pendulum", "pendulum_softened",
/// "pendulum_inverted").
ControlAffinePlant by_name(const std::string& name);

}  // namespace plants

// ---------------------------------------------------------------------------
// Disturbances

struct NoDisturbance {};

/// d(x) = omega1 * x1 * sin(omega2 * x2). Vanishes at x1 = 0.
struct VanishingDisturbance {
  double omega1 = 0.0;
  double omega2 = 0.0;
};

/// +amplitude for the first half period after t_on, -amplitude for the
/// second half, repeating; zero outside [t_on, t_off).
struct SquareWave {
  double amplitude = 0.0;
  double period = 1.0;
  double t_on = 0.0;
  double t_off = 0.0;
};

using DisturbanceSignal =
    std::variant<NoDisturbance, VanishingDisturbance, SquareWave>;

void validate(const DisturbanceSignal& signal);

/// Scalar disturbance value (q = 1 channel).
double disturbance_value(const DisturbanceSignal& signal, const StateVec& x,
                         double t);

/// Sum of several signals acting on the same channel.
double disturbance_value(const std::vector<DisturbanceSignal>& signals,
                         const StateVec& x, double t);

// ---------------------------------------------------------------------------
// Measurement noise

/// White Gaussian measurement noise gated by [t_on, t_off).
///
/// The per-channel variance is set from a signal-to-noise ratio against the
/// running mean-square power of the clean channel (all samples since t = 0),
/// or from an absolute power in dBW when `absolute_power_dbw` is set.
struct NoiseSpec {
  bool enabled = false;
  double snr_db = 0.0;
  std::optional<double> absolute_power_dbw;
  double t_on = 0.0;
  double t_off = 0.0;
};

/// Stateful noise source for one episode. Every sample feeds the power
/// estimate whether or not it lands inside the window, so two channels fed
/// the same clean stream with the same seed draw identical normals.
class MeasurementNoise {
 public:
  MeasurementNoise(NoiseSpec spec, std::uint64_t seed);

  void set_spec(const NoiseSpec& spec) { spec_ = spec; }
  const NoiseSpec& spec() const { return spec_; }

  StateVec apply(const StateVec& x_clean, double t);

 private:
  NoiseSpec spec_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  Vector power_sum_;
  long samples_ = 0;
};

StateVec add_measurement_noise(const StateVec& x, MeasurementNoise& noise,
                               double t);

// ---------------------------------------------------------------------------
// Timed events

struct SwapPlant {
  ControlAffinePlant plant;
};
struct SetDisturbances {
  std::vector<DisturbanceSignal> signals;
};
struct SetNoise {
  NoiseSpec noise;
};

using EventAction = std::variant<SwapPlant, SetDisturbances, SetNoise>;

struct TimedEvent {
  double time = 0.0;
  EventAction action;
};

/// Mutable simulation environment the events act on.
struct World {
  ControlAffinePlant plant;
  std::vector<DisturbanceSignal> disturbances;
  MeasurementNoise noise;
};

std::string describe(const EventAction& action);

class EventSchedule {
 public:
  EventSchedule() = default;
  /// Throws ConfigError unless event times strictly increase.
  explicit EventSchedule(std::vector<TimedEvent> events);

  /// Applies, in order, every unfired event with time <= t. Event times
  /// within one nanosecond of t count as due.
  std::vector<TimedEvent> apply(double t, World& world);

  std::size_t size() const { return events_.size(); }
  std::size_t fired() const { return next_; }

 private:
  std::vector<TimedEvent> events_;
  std::size_t next_ = 0;
  double last_query_ = -std::numeric_limits<double>::infinity();
};

std::vector<TimedEvent> apply_event_schedule(EventSchedule& schedule, double t,
                                             World& world);

}  // namespace iadp
