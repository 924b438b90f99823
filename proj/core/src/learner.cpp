#include "iadp/learner.hpp"

#include <cmath>

namespace iadp {

ExperienceBuffer::ExperienceBuffer(std::size_t capacity, int feature_count,
                                   InsertionPolicy policy)
    : capacity_(capacity), feature_count_(feature_count), policy_(policy) {
  if (capacity_ == 0) throw ConfigError("learner.P must be >= 1");
  if (feature_count_ <= 0) throw ConfigError("experience buffer: no features");
  points_.reserve(capacity_);
}

Matrix ExperienceBuffer::stacked() const {
  Matrix m(feature_count_, static_cast<Eigen::Index>(points_.size()));
  for (std::size_t l = 0; l < points_.size(); ++l) {
    m.col(static_cast<Eigen::Index>(l)) = points_[l].Y;
  }
  return m;
}

InsertResult ExperienceBuffer::try_insert(const ExperiencePoint& p,
                                          bool force_enrich) {
  if (p.Y.size() != feature_count_) {
    throw ConfigError("experience point has the wrong feature count");
  }
  if (!p.Y.allFinite() || !std::isfinite(p.Theta)) {
    return {false, rank_report()};
  }
  if (!full()) {
    points_.push_back(p);
    return {true, rank_report()};
  }
  if (policy_ != InsertionPolicy::sigma_min_enrich && !force_enrich) {
    return {false, rank_report()};
  }

  Matrix cols = stacked();
  const double current = iadp::rank_report(cols).sigma_min;
  double best = current;
  Eigen::Index best_slot = -1;
  for (Eigen::Index l = 0; l < cols.cols(); ++l) {
    const Vector saved = cols.col(l);
    cols.col(l) = p.Y;
    const double s = iadp::rank_report(cols).sigma_min;
    if (s > best) {
      best = s;
      best_slot = l;
    }
    cols.col(l) = saved;
  }
  if (best_slot < 0) return {false, rank_report()};
  points_[static_cast<std::size_t>(best_slot)] = p;
  return {true, rank_report()};
}

RankReport ExperienceBuffer::rank_report() const {
  return iadp::rank_report(stacked());
}

RankReport rank_report(const Matrix& columns) {
  RankReport r;
  if (columns.cols() == 0 || columns.rows() == 0) return r;
  Eigen::JacobiSVD<Matrix> svd(columns);
  const Vector& sv = svd.singularValues();  // descending
  const double tol = 1e-8 * sv(0);
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol) ++r.rank;
  }
  r.sigma_min = columns.cols() >= columns.rows() ? sv(columns.rows() - 1) : 0.0;
  return r;
}

RankReport rank_report(const ExperienceBuffer& buf) { return buf.rank_report(); }

void validate(const LearnerGains& gains) {
  if (gains.Gamma.rows() != gains.Gamma.cols() || gains.Gamma.rows() == 0) {
    throw ConfigError("learner.Gamma must be square");
  }
  if (!gains.Gamma.isApprox(gains.Gamma.transpose(), 1e-12)) {
    throw ConfigError("learner.Gamma must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gains.Gamma);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw ConfigError("learner.Gamma must be positive definite");
  }
  if (!(gains.k_c > 0.0)) throw ConfigError("learner.k_c must be > 0");
  if (!(gains.k_e > 0.0)) throw ConfigError("learner.k_e must be > 0");
}

double residual(const CriticWeights& w, const RegressionPair& pair) {
  return pair.Theta + w.w_hat.dot(pair.Y);
}

double residual(const CriticWeights& w, const ExperiencePoint& p) {
  return p.Theta + w.w_hat.dot(p.Y);
}

Vector weight_derivative(const CriticWeights& w, const RegressionPair& current,
                         const ExperienceBuffer& buf, const LearnerGains& gains) {
  Vector grad = gains.k_c * residual(w, current) * current.Y;
  for (const auto& p : buf.points()) {
    grad += gains.k_e * residual(w, p) * p.Y;
  }
  return -(gains.Gamma * grad);
}

CriticWeights step_weights(const CriticWeights& w, const Vector& wdot, double dt) {
  if (!(dt > 0.0)) throw UsageError("step_weights: dt must be > 0");
  CriticWeights next{w.w_hat + dt * wdot};
  if (!next.w_hat.allFinite()) {
    throw NumericFault("critic weights became non-finite");
  }
  return next;
}

}  // namespace iadp
