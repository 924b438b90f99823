#include "iadp/controllers.hpp"

#include <cmath>

namespace iadp {

std::string to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::iadp: return "iadp";
    case ControllerKind::zsadp: return "zsadp";
    case ControllerKind::tadp: return "tadp";
    case ControllerKind::zero: return "zero";
  }
  return "?";
}

ControllerKind controller_kind_from_string(const std::string& name) {
  if (name == "iadp") return ControllerKind::iadp;
  if (name == "zsadp") return ControllerKind::zsadp;
  if (name == "tadp") return ControllerKind::tadp;
  if (name == "zero") return ControllerKind::zero;
  throw ConfigError("controller: unknown kind '" + name +
                    "' (expected iadp, zsadp, tadp or zero)");
}

double saturation_limit(double beta) { return beta - 1e-12; }

InputVec saturated_policy(const Vector& s, double beta, int* guard_hits) {
  if (!s.allFinite()) throw NumericFault("control argument is non-finite");
  const double limit = saturation_limit(beta);
  InputVec u(s.size());
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    double v = -beta * std::tanh(s(j) / (2.0 * beta));
    if (std::abs(v) > limit) {
      v = std::copysign(limit, v);
      if (guard_hits != nullptr) ++*guard_hits;
    }
    u(j) = v;
  }
  return u;
}

namespace {

void check_weights(const CriticWeights& w, const BasisSet& basis) {
  if (w.w_hat.size() != basis.size()) {
    throw ConfigError("critic weights do not match the basis size");
  }
}

}  // namespace

// ---------------------------------------------------------------------------

IadpController::IadpController(IncrementalModelConfig model, CostConfig cost,
                               BasisSet basis)
    : model_(std::move(model)), cost_(std::move(cost)), basis_(std::move(basis)) {
  validate(cost_);
  if (basis_.arity() != model_.state_dim()) {
    throw ConfigError("basis arity does not match g_bar rows");
  }
}

ControlOutput iadp_control(const IadpController& ctrl, const CriticWeights& w,
                           const StateVec& x, const InputVec& u0) {
  check_weights(w, ctrl.basis());
  const Vector grad_v = ctrl.basis().grad_phi(x).transpose() * w.w_hat;
  ControlOutput out;
  out.u = saturated_policy(ctrl.model().g_bar().transpose() * grad_v,
                           ctrl.cost().beta, &out.guard_hits);
  out.du = out.u - u0;
  return out;
}

double iadp_cost(const StateVec& x, const InputVec& du, const InputVec& u0,
                 const CostConfig& cfg) {
  return running_cost(x, du, u0, cfg);
}

// ---------------------------------------------------------------------------

ZsadpController::ZsadpController(ControlAffinePlant model, double gamma,
                                 CostConfig cost, BasisSet basis)
    : model_(std::move(model)), gamma_(gamma), cost_(std::move(cost)),
      basis_(std::move(basis)) {
  validate(cost_);
  if (!(gamma_ > 0.0)) throw ConfigError("zsadp.gamma must be > 0");
}

ControlOutput zsadp_control(const ZsadpController& ctrl, const CriticWeights& w,
                            const StateVec& x) {
  check_weights(w, ctrl.basis());
  const Vector grad_v = ctrl.basis().grad_phi(x).transpose() * w.w_hat;
  ControlOutput out;
  out.u = saturated_policy(ctrl.model().input_map(x).transpose() * grad_v,
                           ctrl.cost().beta, &out.guard_hits);
  out.du = InputVec::Zero(out.u.size());
  out.aux = ctrl.model().disturbance_map(x).transpose() * grad_v /
            (2.0 * ctrl.gamma() * ctrl.gamma());
  return out;
}

double zsadp_cost(const StateVec& x, const InputVec& u, const Vector& d_hat,
                  const CostConfig& cfg, double gamma) {
  return x.dot(cfg.Q * x) + penalty_W(u, cfg.beta) - gamma * d_hat.squaredNorm();
}

// ---------------------------------------------------------------------------

TadpController::TadpController(ControlAffinePlant model, double rho,
                               CostConfig cost, BasisSet basis, double d_M,
                               double l_M)
    : model_(std::move(model)), rho_(rho), cost_(std::move(cost)),
      basis_(std::move(basis)), d_M_(d_M), l_M_(l_M) {
  validate(cost_);
  if (!(rho_ > 0.0)) throw ConfigError("tadp.rho must be > 0");
  if (!(d_M_ >= 0.0) || !(l_M_ >= 0.0)) {
    throw ConfigError("tadp.d_M and tadp.l_M must be >= 0");
  }
}

Matrix TadpController::h(const StateVec& x) const {
  const Matrix g = model_.input_map(x);
  const Matrix k = model_.disturbance_map(x);
  const Matrix proj = Matrix::Identity(g.rows(), g.rows()) - g * left_pseudo_inverse(g);
  return proj * k;
}

ControlOutput tadp_control(const TadpController& ctrl, const CriticWeights& w,
                           const StateVec& x) {
  check_weights(w, ctrl.basis());
  const Vector grad_v = ctrl.basis().grad_phi(x).transpose() * w.w_hat;
  ControlOutput out;
  out.u = saturated_policy(ctrl.model().input_map(x).transpose() * grad_v,
                           ctrl.cost().beta, &out.guard_hits);
  out.du = InputVec::Zero(out.u.size());
  out.aux = -(ctrl.h(x).transpose() * grad_v) / (2.0 * ctrl.rho());
  return out;
}

double tadp_cost(const StateVec& x, const InputVec& u, const Vector& v_hat,
                 const CostConfig& cfg, double rho, double d_M, double l_M) {
  const double nx2 = x.squaredNorm();
  return x.dot(cfg.Q * x) + penalty_W(u, cfg.beta) + rho * v_hat.squaredNorm() +
         (l_M * l_M + d_M * d_M) * nx2;
}

}  // namespace iadp
