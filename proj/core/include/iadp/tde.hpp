#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "iadp/types.hpp"

namespace iadp {

/// One timestamped measurement (x, x', u) held by the delay line.
struct DelaySample {
  double t = 0.0;
  StateVec x;
  StateVec xdot;
  InputVec u;
};

/// Ring buffer of samples spaced exactly dt apart.
///
/// The delay is an integer number of samples, so a lookup at t - L resolves
/// to a stored sample without interpolation.
class DelayLine {
 public:
  /// `delay_steps` = L / dt, at least 1. Capacity is delay_steps + 2.
  DelayLine(double dt, int delay_steps);

  double dt() const { return dt_; }
  int delay_steps() const { return delay_steps_; }
  double delay() const { return dt_ * delay_steps_; }
  std::size_t capacity() const { return buffer_.size(); }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  bool full() const { return size_ == buffer_.size(); }

  /// Throws UsageError unless s.t is the last timestamp plus dt.
  void push(DelaySample s);

  const DelaySample& newest() const;
  const DelaySample& oldest() const;

  /// Sample stored at time `t`, if present.
  const DelaySample* at(double t) const;
  /// Sample at now_t - L, if present.
  const DelaySample* delayed(double now_t) const { return at(now_t - delay()); }

 private:
  double dt_;
  int delay_steps_;
  std::vector<DelaySample> buffer_;
  std::size_t head_ = 0;  // index of the oldest sample
  std::size_t size_ = 0;
};

void push_sample(DelayLine& line, DelaySample s);

enum class XdotSource { ground_truth, backward_difference };

/// (x_now - x_prev) / dt against the newest stored sample. Empty while the
/// line holds no history (warm-up).
std::optional<StateVec> estimate_xdot_backward(const DelayLine& line,
                                               const StateVec& x_now);

/// Constant input-gain guess g_bar and its left pseudo-inverse.
class IncrementalModelConfig {
 public:
  /// Throws ConfigError unless g_bar has full column rank.
  explicit IncrementalModelConfig(Matrix g_bar);

  const Matrix& g_bar() const { return g_bar_; }
  const Matrix& g_bar_pinv() const { return g_bar_pinv_; }
  int state_dim() const { return static_cast<int>(g_bar_.rows()); }
  int input_dim() const { return static_cast<int>(g_bar_.cols()); }

 private:
  Matrix g_bar_;
  Matrix g_bar_pinv_;
};

/// (gᵀg)⁻¹gᵀ for a full-column-rank g.
Matrix left_pseudo_inverse(const Matrix& g);

struct IncrementRecord {
  StateVec dx_dot;  // x' - x0'
  InputVec du;      // u - u0
  InputVec u0;
  StateVec x0dot;
};

/// Increments of `now` against the line's sample at now.t - L. Empty when
/// that sample is not (yet) available.
std::optional<IncrementRecord> compute_increments(const DelayLine& line,
                                                  const DelaySample& now);

/// Increments against an explicitly supplied delayed sample.
IncrementRecord compute_increments(const DelaySample& delayed,
                                   const DelaySample& now);

/// g_bar⁺ Δx' − Δu: the part of the incremental response not explained by
/// g_bar Δu. Diagnostics only; the controller never reads it.
Vector true_tde_error(const IncrementRecord& rec,
                      const IncrementalModelConfig& cfg);

struct TdeBoundFit {
  double c_fit = 0.0;
  double delta1_fit = 0.0;
  double residual_std = 0.0;
  std::size_t samples = 0;
};

/// Least-squares line ‖ξ‖ ≈ c ‖Δu‖ + δ over logged pairs. Falls back to an
/// intercept-only fit when every ‖Δu‖ is zero. Throws ConfigError with
/// fewer than 100 pairs.
TdeBoundFit fit_tde_bound(const std::vector<double>& xi_norm,
                          const std::vector<double>& du_norm);

}  // namespace iadp
