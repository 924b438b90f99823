#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace iadp {

using StateVec = Eigen::VectorXd;  // x, length n
using InputVec = Eigen::VectorXd;  // u, length m
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Invalid configuration or mismatched dimensions. Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// API misuse, e.g. pushing a sample out of timestamp order.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A computation produced a non-finite value; the episode is treated as diverged.
class NumericFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument of the saturation penalty left the open interval (-beta, beta).
class SaturationDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

}  // namespace iadp
