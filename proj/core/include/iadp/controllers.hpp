#pragma once

#include <string>
#include <variant>

#include "iadp/critic.hpp"
#include "iadp/plant.hpp"
#include "iadp/tde.hpp"
#include "iadp/types.hpp"

namespace iadp {

enum class ControllerKind { iadp, zsadp, tadp, zero };

std::string to_string(ControllerKind kind);
/// Throws ConfigError on an unknown name.
ControllerKind controller_kind_from_string(const std::string& name);

struct ControlOutput {
  InputVec u;
  InputVec du;  // u - u0; IADP only, zero otherwise
  Vector aux;   // d̂ for ZSADP, v̂ for TADP, empty for IADP
  int guard_hits = 0;
};

/// Largest magnitude any controller may emit: β − 1e-12.
double saturation_limit(double beta);

/// u_j = −β tanh(s_j / (2β)), kept strictly inside the limit. tanh rounds to
/// exactly ±1 for |s_j/(2β)| beyond ~19, so those channels are pulled back
/// to β − 1e-12 and counted in `guard_hits`. Throws NumericFault on
/// non-finite s.
InputVec saturated_policy(const Vector& s, double beta, int* guard_hits = nullptr);

class IadpController {
 public:
  IadpController(IncrementalModelConfig model, CostConfig cost, BasisSet basis);

  const IncrementalModelConfig& model() const { return model_; }
  const CostConfig& cost() const { return cost_; }
  const BasisSet& basis() const { return basis_; }

 private:
  IncrementalModelConfig model_;
  CostConfig cost_;
  BasisSet basis_;
};

/// û = −β tanh(ḡᵀ∇Φ(x)ᵀŴ / (2β)), Δû = û − u0. Reads nothing but ḡ, Φ, Ŵ,
/// u0 and x.
ControlOutput iadp_control(const IadpController& ctrl, const CriticWeights& w,
                           const StateVec& x, const InputVec& u0);

/// Same as running_cost.
double iadp_cost(const StateVec& x, const InputVec& du, const InputVec& u0,
                 const CostConfig& cfg);

/// Zero-sum-game baseline. Holds its own copy of the plant model and reads
/// g(x), k(x) from it; the copy is not updated by plant swaps unless the
/// owner calls set_model.
class ZsadpController {
 public:
  ZsadpController(ControlAffinePlant model, double gamma, CostConfig cost,
                  BasisSet basis);

  const ControlAffinePlant& model() const { return model_; }
  void set_model(ControlAffinePlant model) { model_ = std::move(model); }
  double gamma() const { return gamma_; }
  const CostConfig& cost() const { return cost_; }
  const BasisSet& basis() const { return basis_; }

 private:
  ControlAffinePlant model_;
  double gamma_;
  CostConfig cost_;
  BasisSet basis_;
};

/// û = −β tanh(gᵀ∇ΦᵀŴ / (2β)), aux = d̂ = kᵀ∇ΦᵀŴ / (2γ²).
ControlOutput zsadp_control(const ZsadpController& ctrl, const CriticWeights& w,
                            const StateVec& x);

/// xᵀQx + W(u) − γ‖d̂‖².
double zsadp_cost(const StateVec& x, const InputVec& u, const Vector& d_hat,
                  const CostConfig& cfg, double gamma = 1.0);

/// Transformed-optimal-control baseline with mismatch channel
/// h = (I − g g⁺) k, recomputed from the held model.
class TadpController {
 public:
  static constexpr double kDefaultDm = 0.70710678118654752;  // √2/2
  static constexpr double kDefaultLm = 0.56568542494923802;  // 0.4√2

  TadpController(ControlAffinePlant model, double rho, CostConfig cost,
                 BasisSet basis, double d_M = kDefaultDm, double l_M = kDefaultLm);

  const ControlAffinePlant& model() const { return model_; }
  void set_model(ControlAffinePlant model) { model_ = std::move(model); }
  double rho() const { return rho_; }
  double d_M() const { return d_M_; }
  double l_M() const { return l_M_; }
  const CostConfig& cost() const { return cost_; }
  const BasisSet& basis() const { return basis_; }

  /// (I − g(x) g(x)⁺) k(x).
  Matrix h(const StateVec& x) const;

 private:
  ControlAffinePlant model_;
  double rho_;
  CostConfig cost_;
  BasisSet basis_;
  double d_M_;
  double l_M_;
};

/// û = −β tanh(gᵀ∇ΦᵀŴ / (2β)), aux = v̂ = −hᵀ∇ΦᵀŴ / (2ρ).
ControlOutput tadp_control(const TadpController& ctrl, const CriticWeights& w,
                           const StateVec& x);

/// xᵀQx + W(u) + ρ‖v̂‖² + (l_M² + d_M²)‖x‖².
double tadp_cost(const StateVec& x, const InputVec& u, const Vector& v_hat,
                 const CostConfig& cfg, double rho = 0.1,
                 double d_M = TadpController::kDefaultDm,
                 double l_M = TadpController::kDefaultLm);

}  // namespace iadp
