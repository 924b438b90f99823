#include "iadp/critic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace iadp {

namespace {

double ipow(double base, int exp) {
  double r = 1.0;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

// f(z) = 2 z atanh(z) + log(1 - z²) = Σ_{k>=1} z^{2k} / (k (2k - 1)).
// The series avoids the cancellation between the two terms near z = 0.
double scaled_penalty(double z) {
  const double a = std::abs(z);
  if (a < 0.125) {
    const double z2 = z * z;
    double term = z2;
    double sum = 0.0;
    for (int k = 1; k <= 40; ++k) {
      const double add = term / (k * (2.0 * k - 1.0));
      sum += add;
      if (add < 1e-18 * sum) break;
      term *= z2;
    }
    return sum;
  }
  return 2.0 * a * std::atanh(a) + std::log1p(-a * a);
}

}  // namespace

BasisSet::BasisSet(std::vector<Monomial> features)
    : features_(std::move(features)) {
  if (features_.empty()) throw ConfigError("basis: no features");
  arity_ = static_cast<int>(features_.front().exponents.size());
  if (arity_ == 0) throw ConfigError("basis: monomial with no variables");
  for (std::size_t i = 0; i < features_.size(); ++i) {
    const auto& e = features_[i].exponents;
    if (static_cast<int>(e.size()) != arity_) {
      std::ostringstream msg;
      msg << "basis: feature " << i << " has " << e.size()
          << " exponents, expected " << arity_;
      throw ConfigError(msg.str());
    }
    for (int p : e) {
      if (p < 0) throw ConfigError("basis: negative exponent");
    }
  }
}

BasisSet BasisSet::default_pendulum() {
  return BasisSet({{{2, 0}}, {{1, 1}}, {{0, 2}}, {{0, 3}}, {{1, 2}}, {{2, 1}}});
}

Vector BasisSet::phi(const StateVec& x) const {
  if (x.size() != arity_) throw ConfigError("basis: state dimension mismatch");
  Vector out(size());
  for (int i = 0; i < size(); ++i) {
    double v = 1.0;
    for (int j = 0; j < arity_; ++j) v *= ipow(x(j), features_[i].exponents[j]);
    out(i) = v;
  }
  return out;
}

Matrix BasisSet::grad_phi(const StateVec& x) const {
  if (x.size() != arity_) throw ConfigError("basis: state dimension mismatch");
  Matrix out = Matrix::Zero(size(), arity_);
  for (int i = 0; i < size(); ++i) {
    const auto& e = features_[i].exponents;
    for (int j = 0; j < arity_; ++j) {
      if (e[j] == 0) continue;
      double v = e[j] * ipow(x(j), e[j] - 1);
      for (int l = 0; l < arity_; ++l) {
        if (l != j) v *= ipow(x(l), e[l]);
      }
      out(i, j) = v;
    }
  }
  return out;
}

bool BasisSet::vanishes_to_second_order() const {
  for (const auto& f : features_) {
    if (std::accumulate(f.exponents.begin(), f.exponents.end(), 0) < 2) return false;
  }
  return true;
}

double value(const CriticWeights& w, const BasisSet& basis, const StateVec& x) {
  return w.w_hat.dot(basis.phi(x));
}

void validate(const CostConfig& cfg) {
  if (cfg.Q.rows() != cfg.Q.cols() || cfg.Q.rows() == 0) {
    throw ConfigError("cost.Q must be square");
  }
  if (!cfg.Q.isApprox(cfg.Q.transpose(), 1e-12)) {
    throw ConfigError("cost.Q must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cfg.Q);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw ConfigError("cost.Q must be positive definite");
  }
  if (!(cfg.beta > 0.0)) throw ConfigError("cost.beta must be > 0");
  if (!(cfg.c_bar > 0.0)) throw ConfigError("cost.c_bar must be > 0");
}

double penalty_W(const InputVec& v, double beta) {
  constexpr double kClamp = 1.0 - 1e-9;
  constexpr double kHardLimit = 1.0 + 1e-6;
  double sum = 0.0;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    double z = v(j) / beta;
    if (!std::isfinite(z) || std::abs(z) > kHardLimit) {
      std::ostringstream msg;
      msg << "penalty: |u_" << j << "| = " << std::abs(v(j))
          << " is outside the saturation bound " << beta;
      throw SaturationDomainError(msg.str());
    }
    z = std::clamp(z, -kClamp, kClamp);
    sum += beta * beta * scaled_penalty(z);
  }
  return sum;
}

double running_cost(const StateVec& x, const InputVec& du, const InputVec& u0,
                    const CostConfig& cfg) {
  return x.dot(cfg.Q * x) + penalty_W(u0 + du, cfg.beta) +
         cfg.c_bar * cfg.c_bar * du.squaredNorm();
}

Vector regressor_Y(const Matrix& gphi, const Matrix& g_bar, const InputVec& du,
                   const StateVec& x0dot) {
  return gphi * (g_bar * du + x0dot);
}

Vector baseline_regressor_Y(const Matrix& gphi, const StateVec& xdot_meas) {
  return gphi * xdot_meas;
}

}  // namespace iadp
