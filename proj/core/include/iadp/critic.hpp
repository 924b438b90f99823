#pragma once

#include <vector>

#include "iadp/types.hpp"

namespace iadp {

/// Monomial x1^e1 * x2^e2 * ... described by its exponent list.
struct Monomial {
  std::vector<int> exponents;
};

/// Polynomial features Φ(x) with analytic gradients.
class BasisSet {
 public:
  /// Throws ConfigError on empty lists, negative exponents or mixed arity.
  explicit BasisSet(std::vector<Monomial> features);

  /// [x1², x1x2, x2², x2³, x1x2², x1²x2].
  static BasisSet default_pendulum();

  int size() const { return static_cast<int>(features_.size()); }
  int arity() const { return arity_; }
  const std::vector<Monomial>& features() const { return features_; }

  Vector phi(const StateVec& x) const;
  /// N x n; row i is ∂Φ_i/∂x.
  Matrix grad_phi(const StateVec& x) const;

  /// True when every monomial has total degree >= 2, i.e. Φ(0) = 0 and
  /// ∇Φ(0) = 0.
  bool vanishes_to_second_order() const;

 private:
  std::vector<Monomial> features_;
  int arity_ = 0;
};

struct CriticWeights {
  Vector w_hat;
};

/// Ŵᵀ Φ(x).
double value(const CriticWeights& w, const BasisSet& basis, const StateVec& x);

struct CostConfig {
  Matrix Q;
  double beta = 2.0;
  double c_bar = 2.0;
};

/// Throws ConfigError unless Q is symmetric positive definite, beta > 0 and
/// c_bar > 0.
void validate(const CostConfig& cfg);

/// Saturation penalty 2 Σ_j ∫₀^{v_j} β atanh(θ/β) dθ, in closed form.
///
/// |v_j|/β is clamped to 1 - 1e-9; beyond 1 + 1e-6 it throws
/// SaturationDomainError.
double penalty_W(const InputVec& v, double beta);

/// xᵀQx + W(u0 + du) + c̄² ‖du‖².
double running_cost(const StateVec& x, const InputVec& du, const InputVec& u0,
                    const CostConfig& cfg);

/// Pair (Y, Θ) of the linear-in-parameters Bellman residual Θ = -WᵀY.
struct RegressionPair {
  Vector Y;
  double Theta = 0.0;
};

/// ∇Φ (g_bar du + x0dot).
Vector regressor_Y(const Matrix& gphi, const Matrix& g_bar, const InputVec& du,
                   const StateVec& x0dot);

/// ∇Φ x'_meas; the regressor the model-based baselines learn from.
Vector baseline_regressor_Y(const Matrix& gphi, const StateVec& xdot_meas);

}  // namespace iadp
