#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "iadp/runner.hpp"

namespace iadp {

namespace {

class Suite {
 public:
  explicit Suite(std::vector<PropertyCheck>& out) : out_(out) {}

  void check(const std::string& module, const std::string& name,
             const std::function<std::string()>& body) {
    PropertyCheck c{module, name, false, ""};
    try {
      c.detail = body();
      c.passed = c.detail.empty();
    } catch (const std::exception& e) {
      c.detail = std::string("exception: ") + e.what();
    }
    out_.push_back(std::move(c));
  }

 private:
  std::vector<PropertyCheck>& out_;
};

std::string fail_if(bool bad, const std::string& msg) { return bad ? msg : std::string(); }

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

SimConfig short_config(ControllerKind kind, double t_end) {
  SimConfig cfg;
  cfg.controller = kind;
  cfg.t_end = t_end;
  cfg.disturbances = {VanishingDisturbance{-0.3906, 1.0051}};
  return cfg;
}

}  // namespace

std::vector<PropertyCheck> run_property_checks(std::uint64_t seed) {
  std::vector<PropertyCheck> out;
  Suite suite(out);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const BasisSet basis = BasisSet::default_pendulum();
  const CostConfig cost{Matrix::Identity(2, 2), 2.0, 2.0};

  // plant ------------------------------------------------------------------
  suite.check("plant", "equilibrium at the origin", [] {
    const auto p = plants::pendulum();
    const StateVec f = p.eval(StateVec::Zero(2), InputVec::Zero(1), Vector::Zero(1));
    return fail_if(f.norm() != 0.0, "pendulum origin is not an equilibrium");
  });
  suite.check("plant", "input map has full column rank", [&] {
    std::vector<StateVec> probes;
    for (int i = 0; i < 50; ++i) probes.push_back(StateVec::Random(2) * 3.0);
    for (const auto& p : {plants::pendulum(), plants::pendulum_softened(),
                          plants::pendulum_inverted()}) {
      if (!(p.min_input_singular_value(probes) > 0.0)) return p.name() + " loses rank";
    }
    return std::string();
  });
  suite.check("plant", "vanishing disturbance is zero at x1 = 0", [&] {
    const VanishingDisturbance d{-0.3906, 1.0051};
    for (int i = 0; i < 100; ++i) {
      const StateVec x = (StateVec(2) << 0.0, 5.0 * unit(rng)).finished();
      if (disturbance_value(d, x, 0.0) != 0.0) return std::string("nonzero at x1 = 0");
    }
    return std::string();
  });

  // tde --------------------------------------------------------------------
  suite.check("tde", "ground-truth TDE error vanishes on a constant-gain linear plant", [] {
    Matrix A(2, 2);
    A << 0.0, 0.0, 0.0, 0.0;
    Matrix B(2, 1);
    B << 0.0, 0.1;
    const auto plant = plants::linear("flat", A, B, Matrix::Zero(2, 1));
    const IncrementalModelConfig model(B);
    const DelaySample s0{0.0, StateVec::Zero(2), plant.eval(StateVec::Zero(2), InputVec::Constant(1, 0.3), Vector::Zero(1)), InputVec::Constant(1, 0.3)};
    const DelaySample s1{0.001, StateVec::Zero(2), plant.eval(StateVec::Zero(2), InputVec::Constant(1, -1.1), Vector::Zero(1)), InputVec::Constant(1, -1.1)};
    const Vector xi = true_tde_error(compute_increments(s0, s1), model);
    return fail_if(xi.norm() > 1e-14, "xi = " + format_double(xi.norm()));
  });
  suite.check("tde", "delay line resolves t - L exactly", [] {
    DelayLine line(1e-3, 3);
    for (int k = 0; k < 10; ++k) {
      line.push({k * 1e-3, StateVec::Constant(2, k), StateVec::Zero(2), InputVec::Constant(1, k)});
    }
    const DelaySample* d = line.delayed(9e-3);
    return fail_if(d == nullptr || d->u(0) != 6.0, "wrong delayed sample");
  });

  // critic -----------------------------------------------------------------
  suite.check("critic", "grad_phi matches central differences", [&] {
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      StateVec x(2);
      do {
        x << 3.0 * unit(rng), 3.0 * unit(rng);
      } while (x.norm() > 3.0);
      const Matrix g = basis.grad_phi(x);
      for (int j = 0; j < 2; ++j) {
        const double h = 1e-6;
        StateVec xp = x, xm = x;
        xp(j) += h;
        xm(j) -= h;
        const Vector fd = (basis.phi(xp) - basis.phi(xm)) / (2.0 * h);
        for (int r = 0; r < basis.size(); ++r) {
          const double scale = std::max(1.0, std::abs(g(r, j)));
          worst = std::max(worst, std::abs(fd(r) - g(r, j)) / scale);
        }
      }
    }
    return fail_if(worst >= 1e-6, "max error " + format_double(worst));
  });
  suite.check("critic", "penalty matches quadrature", [&] {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double v = 0.99 * 2.0 * unit(rng);
      const double quad =
          2.0 * integrate([](double th) { return 2.0 * std::atanh(th / 2.0); }, 0.0, v, 1e-13);
      const double closed = penalty_W(InputVec::Constant(1, v), 2.0);
      if (quad != 0.0) worst = std::max(worst, std::abs(closed - quad) / std::abs(quad));
    }
    return fail_if(worst >= 1e-8, "max relative error " + format_double(worst));
  });
  suite.check("critic", "penalty is even, nonnegative and increasing", [] {
    double prev = -1.0;
    for (int i = 0; i <= 100; ++i) {
      const double v = 1.98 * i / 100.0;
      const double w = penalty_W(InputVec::Constant(1, v), 2.0);
      if (w != penalty_W(InputVec::Constant(1, -v), 2.0)) return std::string("not even");
      if (!(w > prev) || w < 0.0) return std::string("not increasing");
      prev = w;
    }
    return std::string();
  });
  suite.check("critic", "LIP identity", [&] {
    for (int i = 0; i < 50; ++i) {
      const Vector w = Vector::Random(6);
      const Vector Y = Vector::Random(6);
      RegressionPair p{Y, -w.dot(Y)};
      if (std::abs(residual(CriticWeights{w}, p)) > 1e-15) return std::string("residual nonzero");
    }
    return std::string();
  });

  // learner ----------------------------------------------------------------
  suite.check("learner", "update law is -Gamma grad E", [&] {
    double worst = 0.0;
    for (int c = 0; c < 20; ++c) {
      ExperienceBuffer buf(8, 6, InsertionPolicy::sequential_fill);
      for (int l = 0; l < 8; ++l) buf.try_insert({Vector::Random(6), unit(rng)});
      const RegressionPair cur{Vector::Random(6), unit(rng)};
      const LearnerGains gains{1e-4 * Matrix::Identity(6, 6), 5.0, 3.0};
      const Vector w = Vector::Random(6);
      auto E = [&](const Vector& wv) {
        const CriticWeights cw{wv};
        double e = 0.5 * gains.k_c * std::pow(residual(cw, cur), 2);
        for (const auto& p : buf.points()) e += 0.5 * gains.k_e * std::pow(residual(cw, p), 2);
        return e;
      };
      Vector grad(6);
      for (int i = 0; i < 6; ++i) {
        Vector wp = w, wm = w;
        wp(i) += 1e-6;
        wm(i) -= 1e-6;
        grad(i) = (E(wp) - E(wm)) / 2e-6;
      }
      const Vector expect = -gains.Gamma * grad;
      const Vector got = weight_derivative(CriticWeights{w}, cur, buf, gains);
      worst = std::max(worst, (got - expect).norm() / std::max(1e-300, expect.norm()));
    }
    return fail_if(worst >= 1e-6, "relative error " + format_double(worst));
  });
  suite.check("learner", "spanning buffer has full rank", [] {
    Matrix cols = Matrix::Zero(6, 8);
    cols.leftCols(6) = Matrix::Identity(6, 6);
    cols.col(6) = cols.col(0);
    cols.col(7) = cols.col(3);
    return fail_if(rank_report(cols).rank != 6, "rank != 6");
  });

  // controllers ------------------------------------------------------------
  const IadpController iadp(IncrementalModelConfig((Matrix(2, 1) << 0.0, 0.1).finished()), cost,
                            basis);
  suite.check("controllers", "outputs stay strictly inside the bound", [&] {
    const ZsadpController z(plants::pendulum(), 1.0, cost, basis);
    const TadpController t(plants::pendulum(), 0.1, cost, basis);
    for (int i = 0; i < 500; ++i) {
      const CriticWeights w{Vector::Random(6) * std::pow(10.0, 6.0 * (unit(rng) + 1.0))};
      const StateVec x = StateVec::Random(2) * 5.0;
      const double lim = 2.0 - 1e-12;
      if (std::abs(iadp_control(iadp, w, x, InputVec::Zero(1)).u(0)) > lim ||
          std::abs(zsadp_control(z, w, x).u(0)) > lim || std::abs(tadp_control(t, w, x).u(0)) > lim) {
        return std::string("bound violated");
      }
    }
    return std::string();
  });
  suite.check("controllers", "IADP output is odd in the weights and u - u0 = du", [&] {
    for (int i = 0; i < 100; ++i) {
      const Vector w = Vector::Random(6) * 20.0;
      const StateVec x = StateVec::Random(2) * 3.0;
      const InputVec u0 = InputVec::Constant(1, unit(rng));
      const auto a = iadp_control(iadp, CriticWeights{w}, x, InputVec::Zero(1));
      const auto b = iadp_control(iadp, CriticWeights{-w}, x, InputVec::Zero(1));
      if (a.u(0) != -b.u(0)) return std::string("not odd");
      const auto c = iadp_control(iadp, CriticWeights{w}, x, u0);
      if (c.u(0) - u0(0) != c.du(0)) return std::string("du mismatch");
    }
    return std::string();
  });

  // sim --------------------------------------------------------------------
  suite.check("sim", "RK4 matches exp(-dt) on x' = -x", [] {
    const auto plant = plants::linear("decay", -Matrix::Identity(1, 1), Matrix::Zero(1, 1),
                                      Matrix::Zero(1, 0));
    const StateVec x = rk4_step(plant, StateVec::Ones(1), InputVec::Zero(1),
                                [](const StateVec&, double) { return Vector(); }, 0.0, 1e-3);
    return fail_if(std::abs(x(0) - std::exp(-1e-3)) >= 1e-14, "error too large");
  });
  suite.check("sim", "episodes are deterministic and metrics monotone", [] {
    const SimConfig cfg = short_config(ControllerKind::iadp, 2.0);
    const EpisodeResult a = run_episode(cfg);
    const EpisodeResult b = run_episode(cfg);
    if (a.log.data() != b.log.data()) return std::string("logs differ");
    const auto eu = a.log.column("E_u");
    const auto ex = a.log.column("E_x");
    for (std::size_t i = 1; i < eu.size(); ++i) {
      if (eu[i] < eu[i - 1] || ex[i] < ex[i - 1]) return std::string("metric decreased");
    }
    return fail_if(a.log.rows() != 2001, "row count " + std::to_string(a.log.rows()));
  });

  // cli --------------------------------------------------------------------
  suite.check("cli", "config echo round-trips", [] {
    for (const char* s : {"s1", "s2", "s3"}) {
      const ConfigValues v = resolve_config({}, {{"scenario", s}});
      if (resolve_config(parse_config_text(config_echo(v)), {}) != v) {
        return std::string("round-trip failed for ") + s;
      }
    }
    return std::string();
  });
  suite.check("cli", "non-symmetric Q is rejected by name", [] {
    try {
      resolve_config({{"cost.Q", "[[1, 2], [0, 1]]"}}, {});
    } catch (const ConfigError& e) {
      return fail_if(std::string(e.what()).find("cost.Q") == std::string::npos, e.what());
    }
    return std::string("accepted");
  });

  return out;
}

}  // namespace iadp
