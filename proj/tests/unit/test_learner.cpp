#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "iadp/learner.hpp"

namespace iadp {
namespace {

Vector unit(int i, int n = 6) {
  Vector e = Vector::Zero(n);
  e(i) = 1.0;
  return e;
}

LearnerGains paper_gains() { return {1e-4 * Matrix::Identity(6, 6), 5.0, 3.0}; }

TEST(Residual, Examples) {
  const Vector w = Vector::Random(6);
  const Vector Y = Vector::Random(6);
  EXPECT_NEAR(residual(CriticWeights{w}, RegressionPair{Y, -w.dot(Y)}), 0.0, 1e-15);
  EXPECT_EQ(residual(CriticWeights{Vector::Zero(6)}, RegressionPair{Y, 2.5}), 2.5);
  EXPECT_EQ(residual(CriticWeights{Vector::Ones(6)}, RegressionPair{Vector::Ones(6), 1.0}), 7.0);
}

TEST(Residual, LipIdentityIsExact) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> N;
  for (int i = 0; i < 200; ++i) {
    Vector w(6), Y(6);
    for (int k = 0; k < 6; ++k) {
      w(k) = N(rng);
      Y(k) = N(rng);
    }
    EXPECT_EQ(residual(CriticWeights{w}, ExperiencePoint{Y, -w.dot(Y)}), 0.0);
  }
}

TEST(Buffer, EmptyInsertGivesRankOne) {
  ExperienceBuffer buf(8, 6, InsertionPolicy::sequential_fill);
  EXPECT_EQ(buf.rank_report().rank, 0);
  const InsertResult r = buf.try_insert({unit(2), 1.0});
  EXPECT_TRUE(r.inserted);
  EXPECT_EQ(r.report.rank, 1);
  EXPECT_EQ(r.report.sigma_min, 0.0);
}

TEST(Buffer, SpanningSetWithRepeats) {
  ExperienceBuffer buf(8, 6, InsertionPolicy::sequential_fill);
  for (int i = 0; i < 6; ++i) buf.try_insert({unit(i), 0.0});
  buf.try_insert({unit(0), 0.0});
  const InsertResult r = buf.try_insert({unit(4), 0.0});
  EXPECT_EQ(r.report.rank, 6);
  EXPECT_NEAR(r.report.sigma_min, 1.0, 1e-12);
  EXPECT_TRUE(buf.full());
}

TEST(Buffer, SequentialFillStopsWhenFull) {
  ExperienceBuffer buf(3, 2, InsertionPolicy::sequential_fill);
  for (int i = 0; i < 3; ++i) EXPECT_TRUE(buf.try_insert({Vector::Ones(2), 0.0}).inserted);
  EXPECT_FALSE(buf.try_insert({unit(0, 2), 0.0}).inserted);
  EXPECT_EQ(buf.size(), 3u);
}

TEST(Buffer, EnrichRejectsCollinear) {
  ExperienceBuffer buf(3, 3, InsertionPolicy::sigma_min_enrich);
  buf.try_insert({unit(0, 3), 0.0});
  buf.try_insert({unit(1, 3), 0.0});
  buf.try_insert({(unit(0, 3) + 0.1 * unit(2, 3)), 0.0});
  const double before = buf.rank_report().sigma_min;
  const InsertResult r = buf.try_insert({2.0 * unit(1, 3), 0.0});
  EXPECT_FALSE(r.inserted);
  EXPECT_EQ(r.report.sigma_min, before);
}

TEST(Buffer, EnrichReplacesWeakestDirection) {
  ExperienceBuffer buf(3, 3, InsertionPolicy::sigma_min_enrich);
  buf.try_insert({unit(0, 3), 0.0});
  buf.try_insert({unit(1, 3), 0.0});
  buf.try_insert({unit(0, 3) + 1e-3 * unit(2, 3), 0.0});
  const double before = buf.rank_report().sigma_min;
  const InsertResult r = buf.try_insert({unit(2, 3), 0.0});
  EXPECT_TRUE(r.inserted);
  EXPECT_GT(r.report.sigma_min, before);
  EXPECT_NEAR(r.report.sigma_min, 1.0, 1e-9);
}

TEST(Buffer, ForcedEnrichOnSequentialPolicy) {
  ExperienceBuffer buf(2, 2, InsertionPolicy::sequential_fill);
  buf.try_insert({unit(0, 2), 0.0});
  buf.try_insert({unit(0, 2), 0.0});
  EXPECT_FALSE(buf.try_insert({unit(1, 2), 0.0}).inserted);
  EXPECT_TRUE(buf.try_insert({unit(1, 2), 0.0}, true).inserted);
  EXPECT_EQ(buf.rank_report().rank, 2);
}

TEST(Buffer, RejectsNonFiniteAndWrongSize) {
  ExperienceBuffer buf(2, 2, InsertionPolicy::sequential_fill);
  EXPECT_FALSE(buf.try_insert({Vector::Constant(2, NAN), 0.0}).inserted);
  EXPECT_FALSE(buf.try_insert({Vector::Ones(2), INFINITY}).inserted);
  EXPECT_THROW(buf.try_insert({Vector::Ones(3), 0.0}), ConfigError);
  EXPECT_THROW(ExperienceBuffer(0, 2, InsertionPolicy::sequential_fill), ConfigError);
}

TEST(RankReport, Examples) {
  EXPECT_EQ(rank_report(Matrix(6, 0)).rank, 0);
  Matrix cols = Matrix::Zero(6, 8);
  cols.leftCols(6) = Matrix::Identity(6, 6);
  cols.col(6) = unit(1);
  cols.col(7) = unit(5);
  EXPECT_EQ(rank_report(cols).rank, 6);
  Matrix scaled(6, 4);
  const Vector v = Vector::LinSpaced(6, 1, 6);
  for (int i = 0; i < 4; ++i) scaled.col(i) = (i + 1.5) * v;
  EXPECT_EQ(rank_report(scaled).rank, 1);
  EXPECT_LT(rank_report(scaled).sigma_min, 1e-12);
}

TEST(Gains, Validation) {
  EXPECT_NO_THROW(validate(paper_gains()));
  LearnerGains g = paper_gains();
  g.Gamma(0, 1) = 1e-5;
  EXPECT_THROW(validate(g), ConfigError);
  g = paper_gains();
  g.Gamma(3, 3) = -1e-4;
  EXPECT_THROW(validate(g), ConfigError);
  g = paper_gains();
  g.k_c = 0.0;
  EXPECT_THROW(validate(g), ConfigError);
  g = paper_gains();
  g.k_e = -1.0;
  EXPECT_THROW(validate(g), ConfigError);
}

// ---------------------------------------------------------------------------

TEST(WeightDerivative, Examples) {
  ExperienceBuffer empty(8, 6, InsertionPolicy::sequential_fill);
  EXPECT_EQ(weight_derivative(CriticWeights{Vector::Random(6)}, {Vector::Zero(6), 3.0}, empty,
                              paper_gains()),
            Vector::Zero(6));

  ExperienceBuffer toy(1, 1, InsertionPolicy::sequential_fill);
  const LearnerGains g{Matrix::Identity(1, 1), 1.0, 1e-9};
  const Vector wd = weight_derivative(CriticWeights{Vector::Zero(1)},
                                      {Vector::Constant(1, 2.0), 3.0}, toy, g);
  EXPECT_EQ(wd(0), -6.0);
}

TEST(WeightDerivative, FixedPoint) {
  const Vector w_star = Vector::Random(6);
  ExperienceBuffer buf(8, 6, InsertionPolicy::sequential_fill);
  for (int i = 0; i < 8; ++i) {
    const Vector Y = Vector::Random(6);
    buf.try_insert({Y, -w_star.dot(Y)});
  }
  const Vector Y = Vector::Random(6);
  const Vector wd = weight_derivative(CriticWeights{w_star}, {Y, -w_star.dot(Y)}, buf, paper_gains());
  EXPECT_LT(wd.norm(), 1e-15);
}

TEST(WeightDerivative, IsNegativeGammaGradient) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> N;
  auto randv = [&](int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = N(rng);
    return v;
  };
  for (int trial = 0; trial < 50; ++trial) {
    ExperienceBuffer buf(8, 6, InsertionPolicy::sequential_fill);
    for (int l = 0; l < 8; ++l) buf.try_insert({randv(6), N(rng)});
    const RegressionPair cur{randv(6), N(rng)};
    Matrix A(6, 6);
    for (int k = 0; k < 36; ++k) A(k / 6, k % 6) = N(rng);
    const LearnerGains gains{A * A.transpose() + 0.1 * Matrix::Identity(6, 6), 5.0, 3.0};
    const Vector w = randv(6);
    auto E = [&](const Vector& wv) {
      double e = 0.5 * gains.k_c * std::pow(cur.Theta + wv.dot(cur.Y), 2);
      for (const auto& p : buf.points()) e += 0.5 * gains.k_e * std::pow(p.Theta + wv.dot(p.Y), 2);
      return e;
    };
    Vector grad(6);
    for (int i = 0; i < 6; ++i) {
      const double h = 1e-6;
      Vector wp = w, wm = w;
      wp(i) += h;
      wm(i) -= h;
      grad(i) = (E(wp) - E(wm)) / (2 * h);
    }
    const Vector expect = -gains.Gamma * grad;
    const Vector got = weight_derivative(CriticWeights{w}, cur, buf, gains);
    EXPECT_LT((got - expect).norm() / expect.norm(), 1e-6);
  }
}

TEST(WeightDerivative, ReplayIgnoresHowPointsWereCollected) {
  // Same (Y_l, Θ_l) inserted in a different order gives the same flow.
  std::vector<ExperiencePoint> pts;
  for (int i = 0; i < 8; ++i) pts.push_back({Vector::Random(6), static_cast<double>(i)});
  ExperienceBuffer a(8, 6, InsertionPolicy::sequential_fill);
  ExperienceBuffer b(8, 6, InsertionPolicy::sequential_fill);
  for (int i = 0; i < 8; ++i) {
    a.try_insert(pts[i]);
    b.try_insert(pts[7 - i]);
  }
  CriticWeights wa{Vector::Zero(6)}, wb{Vector::Zero(6)};
  const RegressionPair cur{Vector::Zero(6), 0.0};
  for (int k = 0; k < 1000; ++k) {
    wa = step_weights(wa, weight_derivative(wa, cur, a, paper_gains()), 1e-3);
    wb = step_weights(wb, weight_derivative(wb, cur, b, paper_gains()), 1e-3);
  }
  EXPECT_LT((wa.w_hat - wb.w_hat).norm(), 1e-15);
}

TEST(StepWeights, Examples) {
  const CriticWeights w{Vector::Random(6)};
  EXPECT_EQ(step_weights(w, Vector::Zero(6), 1e-3).w_hat, w.w_hat);
  const CriticWeights z = step_weights(CriticWeights{Vector::Zero(6)}, unit(0), 1e-3);
  EXPECT_EQ(z.w_hat, 1e-3 * unit(0));
  EXPECT_THROW(step_weights(w, Vector::Constant(6, INFINITY), 1e-3), NumericFault);
  EXPECT_THROW(step_weights(w, Vector::Zero(6), 0.0), UsageError);
}

TEST(Convergence, LyapunovDecreaseAndRate) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> N;
  Vector w_star(6);
  for (int i = 0; i < 6; ++i) w_star(i) = N(rng);
  w_star *= 3.0 / w_star.norm();

  const LearnerGains gains = paper_gains();
  Matrix R = Matrix::Identity(6, 6);
  {
    Matrix A(6, 6);
    for (int k = 0; k < 36; ++k) A(k / 6, k % 6) = N(rng);
    R = Eigen::HouseholderQR<Matrix>(A).householderQ();
  }
  ExperienceBuffer buf(8, 6, InsertionPolicy::sequential_fill);
  for (int l = 0; l < 8; ++l) {
    const Vector Y = 100.0 * R.col(l % 6) * (l < 6 ? 1.0 : 0.5);
    buf.try_insert({Y, -w_star.dot(Y)});
  }
  Matrix B = Matrix::Zero(6, 6);
  for (const auto& p : buf.points()) B += gains.k_e * p.Y * p.Y.transpose();
  const double rate = Eigen::SelfAdjointEigenSolver<Matrix>(gains.Gamma * B).eigenvalues().minCoeff();

  const double dt = 1e-3;
  CriticWeights w{Vector::Zero(6)};
  const Matrix Ginv = gains.Gamma.inverse();
  double V_prev = INFINITY;
  const double e0 = (w.w_hat - w_star).norm();
  double t = 0.0;
  double e = e0;
  while (e > 1e-9 && t < 30.0) {
    const Vector Y = Vector::Zero(6);
    w = step_weights(w, weight_derivative(w, {Y, 0.0}, buf, gains), dt);
    t += dt;
    const Vector err = w.w_hat - w_star;
    const double V = 0.5 * err.dot(Ginv * err);
    ASSERT_LT(V, V_prev) << "at t=" << t;
    V_prev = V;
    e = err.norm();
  }
  EXPECT_LT(e, 1e-9);
  const double slope = std::log(e / e0) / t;
  EXPECT_LE(slope, -rate * (1.0 - 0.2));
}

}  // namespace
}  // namespace iadp
