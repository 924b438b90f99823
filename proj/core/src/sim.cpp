#include "iadp/sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace iadp {

long step_count(double dt, double t_end) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("sim.dt must be > 0");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
    throw ConfigError("sim.t_end must be >= 0");
  }
  const double steps = std::round(t_end / dt);
  if (std::abs(steps * dt - t_end) > 1e-9 * std::max(1.0, t_end)) {
    throw ConfigError("sim.t_end must be a whole multiple of sim.dt");
  }
  return static_cast<long>(steps);
}

void validate(const SimConfig& cfg) {
  step_count(cfg.dt, cfg.t_end);
  if (cfg.delay_steps < 1) throw ConfigError("sim.delay_steps must be >= 1");
  if (!(cfg.divergence_threshold > 0.0)) {
    throw ConfigError("sim.divergence_threshold must be > 0");
  }
  validate(cfg.cost);
  validate(cfg.gains);
  const ControlAffinePlant plant = plants::by_name(cfg.plant);
  const int n = plant.state_dim();
  const int N = cfg.basis.size();
  if (cfg.x0.size() != n) throw ConfigError("sim.x0 must have length " + std::to_string(n));
  if (!cfg.x0.allFinite()) throw ConfigError("sim.x0 must be finite");
  if (cfg.cost.Q.rows() != n) throw ConfigError("cost.Q must be " + std::to_string(n) + "x" + std::to_string(n));
  if (cfg.basis.arity() != n) throw ConfigError("critic.basis arity must equal the state dimension");
  if (cfg.gains.Gamma.rows() != N) {
    throw ConfigError("learner.Gamma must be " + std::to_string(N) + "x" + std::to_string(N));
  }
  if (cfg.w0.size() != N) throw ConfigError("critic.w0 must have length " + std::to_string(N));
  if (cfg.g_bar.rows() != n || cfg.g_bar.cols() != plant.input_dim()) {
    throw ConfigError("iadp.g_bar must be " + std::to_string(n) + "x" +
                      std::to_string(plant.input_dim()));
  }
  IncrementalModelConfig check(cfg.g_bar);
  if (cfg.buffer_capacity == 0) throw ConfigError("learner.P must be >= 1");
  if (cfg.cadence < 1) throw ConfigError("learner.cadence must be >= 1");
  if (!(cfg.zsadp_gamma > 0.0)) throw ConfigError("zsadp.gamma must be > 0");
  if (!(cfg.tadp_rho > 0.0)) throw ConfigError("tadp.rho must be > 0");
  for (const auto& d : cfg.disturbances) validate(d);
  if (cfg.noise.enabled && !(cfg.noise.t_on < cfg.noise.t_off)) {
    throw ConfigError("noise.window must satisfy t_on < t_off");
  }
  EventSchedule schedule(cfg.events);
}

StateVec rk4_step(const ControlAffinePlant& plant, const StateVec& x,
                  const InputVec& u, const DisturbanceFn& d_fn, double t,
                  double dt) {
  const double h2 = 0.5 * dt;
  const StateVec k1 = plant.eval(x, u, d_fn(x, t));
  const StateVec x2 = x + h2 * k1;
  const StateVec k2 = plant.eval(x2, u, d_fn(x2, t + h2));
  const StateVec x3 = x + h2 * k2;
  const StateVec k3 = plant.eval(x3, u, d_fn(x3, t + h2));
  const StateVec x4 = x + dt * k3;
  const StateVec k4 = plant.eval(x4, u, d_fn(x4, t + dt));
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// ---------------------------------------------------------------------------

TrajectoryLog::TrajectoryLog(int n, int m, int N, int q, int aux)
    : n_(n), m_(m), N_(N), q_(q), aux_(aux) {
  auto group = [this](const std::string& stem, int count) {
    const std::size_t start = columns_.size();
    for (int i = 1; i <= count; ++i) columns_.push_back(stem + "_" + std::to_string(i));
    return start;
  };
  layout_.t = columns_.size();
  columns_.push_back("t");
  layout_.x_true = group("x_true", n);
  layout_.x_meas = group("x_meas", n);
  layout_.u = group("u", m);
  layout_.du = group("du", m);
  layout_.w = group("w", N);
  layout_.theta_tilde = columns_.size();
  columns_.push_back("theta_tilde");
  layout_.xi = group("xi", m);
  layout_.d = columns_.size();
  if (q == 1) {
    columns_.push_back("d");
  } else {
    group("d", q);
  }
  layout_.E_u = columns_.size();
  columns_.push_back("E_u");
  layout_.E_x = columns_.size();
  columns_.push_back("E_x");
  layout_.rank = columns_.size();
  columns_.push_back("rank");
  layout_.sigma_min = columns_.size();
  columns_.push_back("sigma_min");
  layout_.aux = group("aux", aux);
}

std::size_t TrajectoryLog::column_index(const std::string& name) const {
  const auto it = std::find(columns_.begin(), columns_.end(), name);
  if (it == columns_.end()) throw ConfigError("log has no column '" + name + "'");
  return static_cast<std::size_t>(it - columns_.begin());
}

std::vector<double> TrajectoryLog::column(const std::string& name) const {
  const std::size_t c = column_index(name);
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = at(r, c);
  return out;
}

void TrajectoryLog::append(const std::vector<double>& values) {
  if (values.size() != width()) {
    throw UsageError("log row has " + std::to_string(values.size()) +
                     " values, expected " + std::to_string(width()));
  }
  data_.insert(data_.end(), values.begin(), values.end());
}

// ---------------------------------------------------------------------------

void MetricsAccumulator::add(double t, double u_sq, double x_sq) {
  if (started_) {
    const double h = t - t_prev_;
    E_u_ += 0.5 * h * (u_prev_ + u_sq);
    E_x_ += 0.5 * h * (x_prev_ + x_sq);
  }
  started_ = true;
  t_prev_ = t;
  u_prev_ = u_sq;
  x_prev_ = x_sq;
}

Metrics accumulate_metrics(const TrajectoryLog& log) {
  Metrics m;
  const auto& L = log.layout();
  MetricsAccumulator acc;
  for (std::size_t r = 0; r < log.rows(); ++r) {
    double u_sq = 0.0;
    for (int j = 0; j < log.m(); ++j) u_sq += std::pow(log.at(r, L.u + j), 2);
    double x_sq = 0.0;
    for (int i = 0; i < log.n(); ++i) x_sq += std::pow(log.at(r, L.x_true + i), 2);
    const double t = log.at(r, L.t);
    acc.add(t, u_sq, x_sq);
    m.t.push_back(t);
    m.E_u.push_back(acc.E_u());
    m.E_x.push_back(acc.E_x());
  }
  return m;
}

double EpisodeResult::final_E_u() const {
  return log.rows() == 0 ? 0.0 : log.at(log.rows() - 1, log.layout().E_u);
}

double EpisodeResult::final_E_x() const {
  return log.rows() == 0 ? 0.0 : log.at(log.rows() - 1, log.layout().E_x);
}

// ---------------------------------------------------------------------------

namespace {

struct Pending {
  double t = 0.0;
  StateVec x;
  StateVec xdot_true;
  InputVec u;
};

Vector disturbance_vector(const std::vector<DisturbanceSignal>& signals, int q,
                          const StateVec& x, double t) {
  Vector d = Vector::Zero(q);
  if (q > 0) d(0) = disturbance_value(signals, x, t);
  return d;
}

}  // namespace

EpisodeResult run_episode(const SimConfig& cfg) {
  validate(cfg);
  const long K = step_count(cfg.dt, cfg.t_end);
  const double dt = cfg.dt;

  World world{plants::by_name(cfg.plant), cfg.disturbances,
              MeasurementNoise(cfg.noise, cfg.seed)};
  EventSchedule schedule(cfg.events);
  const int n = world.plant.state_dim();
  const int m = world.plant.input_dim();
  const int q = world.plant.disturbance_dim();
  const int N = cfg.basis.size();

  const IncrementalModelConfig model(cfg.g_bar);
  std::optional<IadpController> iadp;
  std::optional<ZsadpController> zsadp;
  std::optional<TadpController> tadp;
  switch (cfg.controller) {
    case ControllerKind::iadp: iadp.emplace(model, cfg.cost, cfg.basis); break;
    case ControllerKind::zsadp:
      zsadp.emplace(world.plant, cfg.zsadp_gamma, cfg.cost, cfg.basis);
      break;
    case ControllerKind::tadp:
      tadp.emplace(world.plant, cfg.tadp_rho, cfg.cost, cfg.basis, cfg.tadp_d_M,
                   cfg.tadp_l_M);
      break;
    case ControllerKind::zero: break;
  }
  const bool learning = cfg.learning && cfg.controller != ControllerKind::zero;

  EpisodeResult result;
  result.log = TrajectoryLog(n, m, N, q, q);
  const auto& L = result.log.layout();

  auto on_swap = [&](const std::vector<TimedEvent>& fired) {
    for (const auto& ev : fired) {
      result.fired_events.push_back(describe(ev.action));
      if (!cfg.baselines_model_update) continue;
      if (const auto* s = std::get_if<SwapPlant>(&ev.action)) {
        if (zsadp) zsadp->set_model(s->plant);
        if (tadp) tadp->set_model(s->plant);
      }
    }
  };
  on_swap(schedule.apply(0.0, world));

  DelayLine line(dt, cfg.delay_steps);
  ExperienceBuffer buffer(cfg.buffer_capacity, N, cfg.policy);
  RankReport report;
  bool excitation_checked = false;
  CriticWeights w{cfg.w0};
  MetricsAccumulator acc;
  std::optional<Pending> pending;
  StateVec x = cfg.x0;
  const InputVec zero_u = InputVec::Zero(m);
  std::vector<double> row(result.log.width(), 0.0);

  auto mark_diverged = [&](long step, const std::string& why) {
    result.diverged = true;
    result.diverged_step = step;
    result.diverged_time = static_cast<double>(step) * dt;
    result.divergence_reason = why;
  };

  for (long k = 0; k <= K; ++k) {
    const double t = static_cast<double>(k) * dt;

    const StateVec x_meas = world.noise.apply(x, t);
    if (pending) {
      StateVec xdot = cfg.xdot_source == XdotSource::backward_difference
                          ? StateVec((x_meas - pending->x) / dt)
                          : pending->xdot_true;
      line.push({pending->t, pending->x, std::move(xdot), pending->u});
    }
    const DelaySample* delayed = line.delayed(t);
    const InputVec u0 = delayed != nullptr ? delayed->u : zero_u;

    // Warm-up: zero control and no learning until the delay line is full.
    const bool warm_up = !line.full();
    ControlOutput out;
    try {
      if (warm_up) {
        out.u = zero_u;
        out.du = zero_u - u0;
        out.aux = Vector::Zero(q);
      } else if (iadp) {
        out = iadp_control(*iadp, w, x_meas, u0);
      } else if (zsadp) {
        out = zsadp_control(*zsadp, w, x_meas);
      } else if (tadp) {
        out = tadp_control(*tadp, w, x_meas);
      } else {
        out.u = zero_u;
        out.du = zero_u;
      }
    } catch (const NumericFault& e) {
      mark_diverged(k, e.what());
      break;
    }
    const double umax = out.u.cwiseAbs().maxCoeff();
    if (!(umax <= saturation_limit(cfg.cost.beta))) {
      throw SaturationDomainError("controller output left the saturation bound");
    }
    result.max_abs_u = std::max(result.max_abs_u, umax);
    if (out.guard_hits > 0) ++result.guard_hits;

    // TDE error between the newest completed sample and the one L before it.
    Vector xi = Vector::Zero(m);
    if (!line.empty()) {
      if (const auto inc = compute_increments(line, line.newest())) {
        xi = true_tde_error(*inc, model);
      }
    }

    std::optional<RegressionPair> pair;
    if (learning && !warm_up) {
      const Matrix gphi = cfg.basis.grad_phi(x_meas);
      try {
        if (iadp && delayed != nullptr) {
          pair = RegressionPair{regressor_Y(gphi, cfg.g_bar, out.du, delayed->xdot),
                                iadp_cost(x_meas, out.du, u0, cfg.cost)};
        } else if (zsadp && !line.empty()) {
          pair = RegressionPair{baseline_regressor_Y(gphi, line.newest().xdot),
                                zsadp_cost(x_meas, out.u, out.aux, cfg.cost,
                                           cfg.zsadp_gamma)};
        } else if (tadp && !line.empty()) {
          pair = RegressionPair{baseline_regressor_Y(gphi, line.newest().xdot),
                                tadp_cost(x_meas, out.u, out.aux, cfg.cost,
                                          cfg.tadp_rho, cfg.tadp_d_M, cfg.tadp_l_M)};
        }
      } catch (const SaturationDomainError& e) {
        mark_diverged(k, e.what());
        break;
      }
    }

    Vector wdot;
    double theta_tilde = 0.0;
    if (pair) {
      theta_tilde = residual(w, *pair);
      if (k % cfg.cadence == 0) {
        const bool collecting = t <= cfg.collect_until + 1e-9;
        if (collecting || report.rank < N) {
          report = buffer.try_insert({pair->Y, pair->Theta}, !collecting).report;
        }
      }
      wdot = weight_derivative(w, *pair, buffer, cfg.gains);
    }
    if (learning && !excitation_checked && t >= cfg.excitation_deadline - 1e-9) {
      excitation_checked = true;
      result.insufficient_excitation = report.rank < N;
    }

    acc.add(t, out.u.squaredNorm(), x.squaredNorm());
    const Vector d_now = disturbance_vector(world.disturbances, q, x, t);

    row[L.t] = t;
    for (int i = 0; i < n; ++i) {
      row[L.x_true + i] = x(i);
      row[L.x_meas + i] = x_meas(i);
    }
    for (int j = 0; j < m; ++j) {
      row[L.u + j] = out.u(j);
      row[L.du + j] = out.du(j);
      row[L.xi + j] = xi(j);
    }
    for (int i = 0; i < N; ++i) row[L.w + i] = w.w_hat(i);
    row[L.theta_tilde] = theta_tilde;
    for (int i = 0; i < q; ++i) {
      row[L.d + i] = d_now(i);
      row[L.aux + i] = out.aux.size() > i ? out.aux(i) : 0.0;
    }
    row[L.E_u] = acc.E_u();
    row[L.E_x] = acc.E_x();
    row[L.rank] = report.rank;
    row[L.sigma_min] = report.sigma_min;
    result.log.append(row);

    if (pair) {
      try {
        w = step_weights(w, wdot, dt);
      } catch (const NumericFault& e) {
        mark_diverged(k + 1, e.what());
        break;
      }
    }

    Pending next{t, x_meas, StateVec(), out.u};
    if (cfg.xdot_source == XdotSource::ground_truth) {
      next.xdot_true = world.plant.eval(x, out.u, d_now);
    }
    pending = std::move(next);

    if (k == K) break;

    const auto& signals = world.disturbances;
    const DisturbanceFn d_fn = [&signals, q](const StateVec& xs, double ts) {
      return disturbance_vector(signals, q, xs, ts);
    };
    try {
      x = rk4_step(world.plant, x, out.u, d_fn, t, dt);
    } catch (const NumericFault& e) {
      mark_diverged(k + 1, e.what());
      break;
    }
    if (!x.allFinite() || x.norm() > cfg.divergence_threshold) {
      std::ostringstream why;
      why << "state norm exceeded " << cfg.divergence_threshold;
      mark_diverged(k + 1, why.str());
      break;
    }
    on_swap(schedule.apply(static_cast<double>(k + 1) * dt, world));
  }

  result.buffer = buffer.rank_report();
  return result;
}

}  // namespace iadp
