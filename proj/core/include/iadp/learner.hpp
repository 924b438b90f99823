#pragma once

#include <cstddef>
#include <vector>

#include "iadp/critic.hpp"
#include "iadp/types.hpp"

namespace iadp {

struct ExperiencePoint {
  Vector Y;
  double Theta = 0.0;
};

struct RankReport {
  int rank = 0;
  /// N-th singular value of [Y_1 .. Y_P]; zero with fewer than N points.
  double sigma_min = 0.0;
};

enum class InsertionPolicy { sequential_fill, sigma_min_enrich };

struct InsertResult {
  bool inserted = false;
  RankReport report;
};

/// Replay memory of (Y_l, Θ_l) pairs.
///
/// Residuals are never stored: the update law recomputes each Θ̃_l against
/// the live weights.
class ExperienceBuffer {
 public:
  ExperienceBuffer(std::size_t capacity, int feature_count,
                   InsertionPolicy policy);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return points_.size(); }
  bool full() const { return points_.size() >= capacity_; }
  int feature_count() const { return feature_count_; }
  InsertionPolicy policy() const { return policy_; }
  const std::vector<ExperiencePoint>& points() const { return points_; }

  /// sequential_fill appends until full. sigma_min_enrich additionally, once
  /// full, swaps the candidate in for whichever point maximises σ_min, but
  /// only if that strictly increases it. `force_enrich` applies the enrich
  /// rule regardless of policy.
  InsertResult try_insert(const ExperiencePoint& p, bool force_enrich = false);

  RankReport rank_report() const;

 private:
  Matrix stacked() const;

  std::size_t capacity_;
  int feature_count_;
  InsertionPolicy policy_;
  std::vector<ExperiencePoint> points_;
};

/// Numerical rank (tolerance 1e-8 σ_max) and N-th singular value of the
/// column matrix.
RankReport rank_report(const Matrix& columns);
RankReport rank_report(const ExperienceBuffer& buf);

struct LearnerGains {
  Matrix Gamma;
  double k_c = 5.0;
  double k_e = 3.0;
};

/// Throws ConfigError unless Γ is symmetric positive definite and both
/// gains are positive.
void validate(const LearnerGains& gains);

/// Θ̃ = Θ + ŴᵀY.
double residual(const CriticWeights& w, const RegressionPair& pair);
double residual(const CriticWeights& w, const ExperiencePoint& p);

/// −Γ k_c Y Θ̃ − Σ_l Γ k_e Y_l Θ̃_l, with every replayed residual taken
/// against the current weights.
Vector weight_derivative(const CriticWeights& w, const RegressionPair& current,
                         const ExperienceBuffer& buf, const LearnerGains& gains);

/// Explicit Euler step. Throws NumericFault on a non-finite result.
CriticWeights step_weights(const CriticWeights& w, const Vector& wdot, double dt);

}  // namespace iadp
