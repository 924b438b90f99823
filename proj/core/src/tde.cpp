#include "iadp/tde.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace iadp {

DelayLine::DelayLine(double dt, int delay_steps)
    : dt_(dt), delay_steps_(delay_steps) {
  if (!(dt > 0.0)) throw ConfigError("delay line: dt must be > 0");
  if (delay_steps < 1) throw ConfigError("delay line: delay must be >= 1 sample");
  buffer_.resize(static_cast<std::size_t>(delay_steps) + 2);
}

void DelayLine::push(DelaySample s) {
  if (size_ > 0) {
    const double expected = newest().t + dt_;
    if (std::abs(s.t - expected) > 1e-6 * dt_) {
      throw UsageError("delay line: sample at t=" + std::to_string(s.t) +
                       " does not follow t=" + std::to_string(newest().t) +
                       " by dt");
    }
  }
  if (size_ < buffer_.size()) {
    buffer_[(head_ + size_) % buffer_.size()] = std::move(s);
    ++size_;
  } else {
    buffer_[head_] = std::move(s);
    head_ = (head_ + 1) % buffer_.size();
  }
}

const DelaySample& DelayLine::newest() const {
  if (size_ == 0) throw UsageError("delay line is empty");
  return buffer_[(head_ + size_ - 1) % buffer_.size()];
}

const DelaySample& DelayLine::oldest() const {
  if (size_ == 0) throw UsageError("delay line is empty");
  return buffer_[head_];
}

const DelaySample* DelayLine::at(double t) const {
  if (size_ == 0) return nullptr;
  const double back = (newest().t - t) / dt_;
  const double steps = std::round(back);
  if (std::abs(back - steps) > 1e-6 || steps < 0.0 ||
      steps >= static_cast<double>(size_)) {
    return nullptr;
  }
  const auto offset = static_cast<std::size_t>(steps);
  return &buffer_[(head_ + size_ - 1 - offset) % buffer_.size()];
}

void push_sample(DelayLine& line, DelaySample s) { line.push(std::move(s)); }

std::optional<StateVec> estimate_xdot_backward(const DelayLine& line,
                                               const StateVec& x_now) {
  if (line.empty()) return std::nullopt;
  return ((x_now - line.newest().x) / line.dt()).eval();
}

// ---------------------------------------------------------------------------

Matrix left_pseudo_inverse(const Matrix& g) {
  const Matrix gram = g.transpose() * g;
  Eigen::LDLT<Matrix> ldlt(gram);
  if (ldlt.info() != Eigen::Success) {
    throw ConfigError("pseudo-inverse: gᵀg is not invertible");
  }
  return ldlt.solve(g.transpose());
}

IncrementalModelConfig::IncrementalModelConfig(Matrix g_bar)
    : g_bar_(std::move(g_bar)) {
  if (g_bar_.rows() < g_bar_.cols() || g_bar_.cols() == 0) {
    throw ConfigError("g_bar must be n x m with n >= m >= 1");
  }
  Eigen::JacobiSVD<Matrix> svd(g_bar_);
  const auto& sv = svd.singularValues();
  if (!(sv.minCoeff() > 1e-12 * std::max(1.0, sv.maxCoeff()))) {
    throw ConfigError("g_bar must have full column rank");
  }
  g_bar_pinv_ = left_pseudo_inverse(g_bar_);
}

IncrementRecord compute_increments(const DelaySample& delayed,
                                   const DelaySample& now) {
  IncrementRecord rec;
  rec.dx_dot = now.xdot - delayed.xdot;
  rec.du = now.u - delayed.u;
  rec.u0 = delayed.u;
  rec.x0dot = delayed.xdot;
  return rec;
}

std::optional<IncrementRecord> compute_increments(const DelayLine& line,
                                                  const DelaySample& now) {
  const DelaySample* delayed = line.delayed(now.t);
  if (delayed == nullptr) return std::nullopt;
  return compute_increments(*delayed, now);
}

Vector true_tde_error(const IncrementRecord& rec,
                      const IncrementalModelConfig& cfg) {
  return cfg.g_bar_pinv() * rec.dx_dot - rec.du;
}

TdeBoundFit fit_tde_bound(const std::vector<double>& xi_norm,
                          const std::vector<double>& du_norm) {
  if (xi_norm.size() != du_norm.size()) {
    throw ConfigError("fit_tde_bound: length mismatch");
  }
  const std::size_t n = xi_norm.size();
  if (n < 100) throw ConfigError("fit_tde_bound: need at least 100 pairs");

  const double nd = static_cast<double>(n);
  const double mean_x = std::accumulate(du_norm.begin(), du_norm.end(), 0.0) / nd;
  const double mean_y = std::accumulate(xi_norm.begin(), xi_norm.end(), 0.0) / nd;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (du_norm[i] - mean_x) * (du_norm[i] - mean_x);
    sxy += (du_norm[i] - mean_x) * (xi_norm[i] - mean_y);
  }

  TdeBoundFit fit;
  fit.samples = n;
  if (sxx > 0.0) {
    fit.c_fit = sxy / sxx;
    fit.delta1_fit = mean_y - fit.c_fit * mean_x;
  } else {
    fit.c_fit = 0.0;
    fit.delta1_fit = mean_y;
  }
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = xi_norm[i] - (fit.c_fit * du_norm[i] + fit.delta1_fit);
    ss += r * r;
  }
  fit.residual_std = std::sqrt(ss / nd);
  return fit;
}

}  // namespace iadp
