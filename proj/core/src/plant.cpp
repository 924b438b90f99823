#include "iadp/plant.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace iadp {

namespace {

std::string dims(Eigen::Index r, Eigen::Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace

ControlAffinePlant::ControlAffinePlant(std::string name, int n, int m, int q,
                                       DriftFn drift, MatrixFn input_map,
                                       MatrixFn disturbance_map)
    : name_(std::move(name)),
      n_(n),
      m_(m),
      q_(q),
      drift_(std::move(drift)),
      input_map_(std::move(input_map)),
      disturbance_map_(std::move(disturbance_map)) {
  if (n_ <= 0 || m_ <= 0 || q_ < 0) {
    throw ConfigError("plant '" + name_ + "': dimensions must be positive");
  }
}

StateVec ControlAffinePlant::drift(const StateVec& x) const { return drift_(x); }

Matrix ControlAffinePlant::input_map(const StateVec& x) const {
  return input_map_(x);
}

Matrix ControlAffinePlant::disturbance_map(const StateVec& x) const {
  if (q_ == 0) return Matrix::Zero(n_, 0);
  return disturbance_map_(x);
}

StateVec ControlAffinePlant::eval(const StateVec& x, const InputVec& u,
                                  const Vector& d) const {
  if (x.size() != n_ || u.size() != m_ || d.size() != q_) {
    std::ostringstream msg;
    msg << "plant '" << name_ << "': expected |x|=" << n_ << " |u|=" << m_
        << " |d|=" << q_ << ", got " << x.size() << ", " << u.size() << ", "
        << d.size();
    throw ConfigError(msg.str());
  }
  StateVec xdot = drift_(x) + input_map_(x) * u;
  if (q_ > 0) xdot += disturbance_map_(x) * d;
  if (!xdot.allFinite()) {
    throw NumericFault("plant '" + name_ + "': non-finite state derivative");
  }
  return xdot;
}

double ControlAffinePlant::min_input_singular_value(
    const std::vector<StateVec>& probes) const {
  double smallest = std::numeric_limits<double>::infinity();
  for (const auto& x : probes) {
    const Matrix g = input_map_(x);
    if (g.rows() != n_ || g.cols() != m_) {
      throw ConfigError("plant '" + name_ + "': g(x) is " +
                        dims(g.rows(), g.cols()) + ", expected " + dims(n_, m_));
    }
    Eigen::JacobiSVD<Matrix> svd(g);
    smallest = std::min(smallest, svd.singularValues().minCoeff());
  }
  return smallest;
}

StateVec eval_dynamics(const ControlAffinePlant& plant, const StateVec& x,
                       const InputVec& u, const Vector& d) {
  return plant.eval(x, u, d);
}

namespace plants {

namespace {

ControlAffinePlant pendulum_family(std::string name, double drift_sign,
                                   double gravity, double friction,
                                   double input_gain, double disturbance_gain) {
  auto drift = [=](const StateVec& x) {
    StateVec f(2);
    f << drift_sign * x(1), -gravity * std::sin(x(0)) - friction * x(1);
    return f;
  };
  auto g = [=](const StateVec&) {
    Matrix m(2, 1);
    m << 0.0, input_gain;
    return m;
  };
  auto k = [=](const StateVec&) {
    Matrix m(2, 1);
    m << 1.0, disturbance_gain;
    return m;
  };
  return ControlAffinePlant(std::move(name), 2, 1, 1, drift, g, k);
}

}  // namespace

ControlAffinePlant pendulum() {
  // M = 1/3 kg, l = 3/2 m, J = 4/3 M l^2 = 1 kg m^2, Mgl/J = 4.9, f_d = 0.2.
  return pendulum_family("pendulum", 1.0, 4.9, 0.2, 0.25, -0.2);
}

ControlAffinePlant pendulum_softened() {
  return pendulum_family("pendulum_softened", 1.0, 2.0, 0.1, 0.1, -0.1);
}

ControlAffinePlant pendulum_inverted() {
  return pendulum_family("pendulum_inverted", -1.0, -4.9, 0.2, -0.25, -0.2);
}

ControlAffinePlant linear(std::string name, Matrix A, Matrix B, Matrix K) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n || B.rows() != n || (K.size() > 0 && K.rows() != n)) {
    throw ConfigError("linear plant '" + name + "': inconsistent shapes");
  }
  const int m = static_cast<int>(B.cols());
  const int q = static_cast<int>(K.cols());
  return ControlAffinePlant(
      std::move(name), n, m, q, [A](const StateVec& x) -> StateVec { return A * x; },
      [B](const StateVec&) { return B; }, [K](const StateVec&) { return K; });
}

ControlAffinePlant by_name(const std::string& name) {
  if (name == "pendulum") return pendulum();
  if (name == "pendulum_softened") return pendulum_softened();
  if (name == "pendulum_inverted") return pendulum_inverted();
  throw ConfigError("unknown plant '" + name + "'");
}

}  // namespace plants

// ---------------------------------------------------------------------------

void validate(const DisturbanceSignal& signal) {
  if (const auto* sq = std::get_if<SquareWave>(&signal)) {
    if (!(sq->period > 0.0)) throw ConfigError("square wave: period must be > 0");
    if (!(sq->t_on < sq->t_off)) {
      throw ConfigError("square wave: window must satisfy t_on < t_off");
    }
  }
}

double disturbance_value(const DisturbanceSignal& signal, const StateVec& x,
                         double t) {
  struct Visitor {
    const StateVec& x;
    double t;
    double operator()(const NoDisturbance&) const { return 0.0; }
    double operator()(const VanishingDisturbance& v) const {
      return v.omega1 * x(0) * std::sin(v.omega2 * x(1));
    }
    double operator()(const SquareWave& s) const {
      if (t < s.t_on || t >= s.t_off) return 0.0;
      const double phase = std::fmod(t - s.t_on, s.period);
      return phase < 0.5 * s.period ? s.amplitude : -s.amplitude;
    }
  };
  return std::visit(Visitor{x, t}, signal);
}

double disturbance_value(const std::vector<DisturbanceSignal>& signals,
                         const StateVec& x, double t) {
  double sum = 0.0;
  for (const auto& s : signals) sum += disturbance_value(s, x, t);
  return sum;
}

// ---------------------------------------------------------------------------

MeasurementNoise::MeasurementNoise(NoiseSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)), rng_(seed) {}

StateVec MeasurementNoise::apply(const StateVec& x_clean, double t) {
  if (power_sum_.size() != x_clean.size()) {
    power_sum_ = Vector::Zero(x_clean.size());
    samples_ = 0;
  }
  power_sum_ += x_clean.cwiseAbs2();
  ++samples_;

  if (!spec_.enabled || t < spec_.t_on || t >= spec_.t_off) return x_clean;

  StateVec noisy = x_clean;
  for (Eigen::Index i = 0; i < x_clean.size(); ++i) {
    double variance = 0.0;
    if (spec_.absolute_power_dbw) {
      variance = std::pow(10.0, *spec_.absolute_power_dbw / 10.0);
    } else {
      const double signal_power = power_sum_(i) / static_cast<double>(samples_);
      variance = signal_power / std::pow(10.0, spec_.snr_db / 10.0);
    }
    noisy(i) += std::sqrt(variance) * normal_(rng_);
  }
  return noisy;
}

StateVec add_measurement_noise(const StateVec& x, MeasurementNoise& noise,
                               double t) {
  return noise.apply(x, t);
}

// ---------------------------------------------------------------------------

std::string describe(const EventAction& action) {
  struct Visitor {
    std::string operator()(const SwapPlant& s) const {
      return "swap_plant(" + s.plant.name() + ")";
    }
    std::string operator()(const SetDisturbances& s) const {
      return "set_disturbance(" + std::to_string(s.signals.size()) + " signals)";
    }
    std::string operator()(const SetNoise& s) const {
      return s.noise.enabled ? "set_noise(gaussian)" : "set_noise(none)";
    }
  };
  return std::visit(Visitor{}, action);
}

EventSchedule::EventSchedule(std::vector<TimedEvent> events)
    : events_(std::move(events)) {
  for (std::size_t i = 1; i < events_.size(); ++i) {
    if (!(events_[i].time > events_[i - 1].time)) {
      throw ConfigError("event schedule: times must strictly increase");
    }
  }
}

std::vector<TimedEvent> EventSchedule::apply(double t, World& world) {
  if (t < last_query_) {
    throw UsageError("event schedule queried with decreasing time");
  }
  last_query_ = t;
  constexpr double kDueTolerance = 1e-9;
  std::vector<TimedEvent> fired;
  while (next_ < events_.size() && events_[next_].time <= t + kDueTolerance) {
    const TimedEvent& ev = events_[next_];
    std::visit(
        [&world](const auto& a) {
          using A = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<A, SwapPlant>) {
            world.plant = a.plant;
          } else if constexpr (std::is_same_v<A, SetDisturbances>) {
            world.disturbances = a.signals;
          } else {
            world.noise.set_spec(a.noise);
          }
        },
        ev.action);
    fired.push_back(ev);
    ++next_;
  }
  return fired;
}

std::vector<TimedEvent> apply_event_schedule(EventSchedule& schedule, double t,
                                             World& world) {
  return schedule.apply(t, world);
}

}  // namespace iadp
