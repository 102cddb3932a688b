#include "dntk/error.hpp"
#include "dntk/theory.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace dntk;
using namespace dntk::theory;
using dntk::testing::random_matrix;
using dntk::testing::random_orthonormal;
using dntk::testing::random_spd;

TEST(Theory, MinimizerExample) {
  Vector g(2);
  g << 2.0, 4.0;
  const Matrix v = Matrix::Identity(2, 1);
  const Vector d = subspace_minimizer(g, 2.0, v);
  EXPECT_DOUBLE_EQ(d[0], -1.0);
  EXPECT_DOUBLE_EQ(d[1], 0.0);
  EXPECT_DOUBLE_EQ(quadratic_model(g, 2.0, d), -1.0);
}

TEST(Theory, NoPerturbationImproves) {
  TheoryProbe p;
  p.smoothness = 3.0;
  p.basis = random_orthonormal(8, 3, 4);
  for (std::uint64_t t = 0; t < 5; ++t) p.task_gradients.push_back(random_matrix(8, 1, t).col(0));
  EXPECT_LE(quadratic_minimizer_check(p, 1000, 9), 1e-12);
}

TEST(Theory, ProbeValidation) {
  TheoryProbe p;
  p.basis = Matrix::Ones(3, 1);
  p.task_gradients = {Vector::Ones(3)};
  EXPECT_THROW(p.validate(), Error);
  p.basis = Matrix::Identity(3, 1);
  p.smoothness = 0.0;
  EXPECT_THROW(p.validate(), Error);
}

TEST(Theory, DecreaseBoundHoldsAndIsTightForIsotropic) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const Matrix a = random_spd(6, seed);
    const double l = Eigen::SelfAdjointEigenSolver<Matrix>(a).eigenvalues().maxCoeff();
    const DecreaseCheck c = decrease_bound_check(a, random_matrix(6, 1, seed + 1).col(0),
                                                 random_matrix(6, 1, seed + 2).col(0), random_orthonormal(6, 2, seed), l);
    EXPECT_TRUE(c.holds);
  }
  const DecreaseCheck iso = decrease_bound_check(2.0 * Matrix::Identity(5, 5), Vector::Ones(5), Vector::Zero(5),
                                                 random_orthonormal(5, 2, 1), 2.0);
  EXPECT_NEAR(iso.decrease, iso.bound, 1e-12);
  try {
    decrease_bound_check(4.0 * Matrix::Identity(2, 2), Vector::Ones(2), Vector::Zero(2), Matrix::Identity(2, 1), 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotSmooth);
  }
}

TEST(Theory, PcaIsOptimal) {
  const Matrix g = random_spd(9, 3);
  EXPECT_GE(pca_optimality_bruteforce(g, 2, 2000, 5), -1e-10);
  EXPECT_THROW(pca_optimality_bruteforce(random_spd(13, 1), 2, 10, 1), Error);
  EXPECT_THROW(pca_optimality_bruteforce(g, 9, 10, 1), Error);
}

TEST(Theory, ResidualExample) {
  Matrix g = Matrix::Zero(3, 3);
  g.diagonal() << 3.0, 2.0, 1.0;
  EXPECT_DOUBLE_EQ(subspace_residual(g, Matrix::Identity(3, 1)), 3.0);
}

TEST(Theory, NearOptimalTail) {
  const Matrix g = random_spd(7, 2);
  const Matrix v = random_orthonormal(7, 3, 8);
  const Matrix proj = v * v.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  const Matrix top = es.eigenvectors().rightCols(3);
  const double gap = (top.transpose() * g * top).trace() - (v.transpose() * g * v).trace();
  const TailCheck c = near_optimal_tail_check(g, 3, gap + 1e-9, proj);
  EXPECT_TRUE(c.holds);
  EXPECT_NEAR(c.residual, c.tail + c.gap, 1e-10);
  try {
    near_optimal_tail_check(g, 3, 0.5 * gap, proj);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PreconditionFailed);
  }
}

TEST(Theory, ResidualTwoWays) {
  std::vector<Vector> samples;
  for (std::uint64_t t = 0; t < 20; ++t) samples.push_back(random_matrix(6, 1, t + 40).col(0));
  const Matrix v = random_orthonormal(6, 2, 3);
  const ResidualPair r = residual_two_ways(samples, v * v.transpose());
  EXPECT_NEAR(r.sample_mean, r.trace_form, 1e-12 * r.trace_form);
  EXPECT_LT((empirical_covariance(samples) - empirical_covariance(samples).transpose()).norm(), 1e-15);
}

TEST(Theory, SuitePasses) {
  for (const auto& row : run_theory_suite(1)) EXPECT_TRUE(row.passed) << row.name << " " << row.value;
}
