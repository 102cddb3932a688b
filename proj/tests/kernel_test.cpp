#include "dntk/error.hpp"
#include "dntk/kernel.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace dntk;
using dntk::testing::max_abs;
using dntk::testing::random_features;
using dntk::testing::random_matrix;
using dntk::testing::random_orthonormal;
using dntk::testing::random_spd;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST(ClassKernel, IdentityFeatures) {
  GradientFeatures f;
  f.per_class = {Matrix::Identity(4, 4)};
  f.labels = Matrix::Zero(4, 1);
  f.model_logits = Matrix::Zero(4, 1);
  EXPECT_EQ(kernel::class_kernel(f, 0, ScaleKind::None), Matrix::Identity(4, 4));
}

TEST(ClassKernel, SingleRowInvK) {
  GradientFeatures f = random_features(1, 6, 1, 3);
  const Matrix k = kernel::class_kernel(f, 0, ScaleKind::InvK);
  EXPECT_NEAR(k(0, 0), f.per_class[0].squaredNorm() / 6.0, 1e-14);
}

TEST(ClassKernel, DoubleLoopOracleAndScaleConsistency) {
  const GradientFeatures f = random_features(8, 5, 2, 7);
  const Matrix k = kernel::class_kernel(f, 1, ScaleKind::None);
  const Matrix kk = kernel::class_kernel(f, 1, ScaleKind::InvK);
  for (Index i = 0; i < 8; ++i)
    for (Index j = 0; j < 8; ++j) {
      double s = 0.0;
      for (Index t = 0; t < 5; ++t) s += f.per_class[1](i, t) * f.per_class[1](j, t);
      EXPECT_NEAR(k(i, j), s, 1e-13);
    }
  EXPECT_LT(max_abs(kk - k / 5.0), 1e-15);
  EXPECT_EQ(k, k.transpose());
}

TEST(ClassKernel, ClassOutOfRange) {
  try {
    kernel::class_kernel(random_features(3, 2, 2, 1), 2, ScaleKind::None);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ClassOutOfRange);
  }
}

TEST(AverageKernel, Examples) {
  kernel::KernelStack one{{random_spd(3, 1)}, ScaleKind::None, 3};
  EXPECT_EQ(kernel::average_kernel(one), one.per_class[0]);
  kernel::KernelStack two{{Matrix::Identity(3, 3), 3.0 * Matrix::Identity(3, 3)}, ScaleKind::None, 3};
  EXPECT_LT(max_abs(kernel::average_kernel(two) - 2.0 * Matrix::Identity(3, 3)), 1e-15);
  const GradientFeatures f = random_features(5, 4, 3, 2);
  const kernel::KernelStack s = kernel::build_stack(f, ScaleKind::InvK);
  Matrix mean = Matrix::Zero(5, 5);
  for (const auto& k : s.per_class) mean += k;
  EXPECT_LT(max_abs(kernel::average_kernel(s) - mean / 3.0), 1e-14);
}

TEST(BuildStack, NearPsd) {
  const kernel::KernelStack s = kernel::build_stack(random_features(12, 3, 4, 9), ScaleKind::InvK);
  for (const auto& k : s.per_class) {
    const auto eig = numerics::sym_eig(k);
    EXPECT_GE(eig.values.minCoeff(), -1e-9 * k.trace());
  }
}

TEST(TruncationRank, Examples) {
  EXPECT_EQ(kernel::truncation_rank(vec({1, 0, 0}), 0.05), 1);
  EXPECT_EQ(kernel::truncation_rank(vec({4, 3, 2, 1}), 0.05), 4);
  EXPECT_EQ(kernel::truncation_rank(vec({0.5, 0.3, 0.15, 0.05}), 0.05), 3);
}

TEST(TruncationRank, ClampsNegativesAndMonotoneInEps) {
  EXPECT_EQ(kernel::truncation_rank(vec({2, 1, -1e-12}), 0.2), 2);
  const Vector e = vec({5, 3, 2, 1, 0.5, 0.1});
  Index prev = 100;
  for (double eps : {0.01, 0.05, 0.1, 0.3, 0.6}) {
    const Index r = kernel::truncation_rank(e, eps);
    EXPECT_LE(r, prev);
    prev = r;
  }
}

TEST(TruncationRank, Errors) {
  EXPECT_THROW(kernel::truncation_rank(vec({0, 0}), 0.05), Error);
  EXPECT_THROW(kernel::truncation_rank(vec({1, 0}), 0.0), Error);
}

TEST(DataRedundancy, Examples) {
  EXPECT_FALSE(kernel::data_redundancy_certificate(Matrix::Identity(10, 10), 2.0, 0.05).redundant);
  const Vector u = random_matrix(10, 1, 1).col(0);
  EXPECT_TRUE(kernel::data_redundancy_certificate(u * u.transpose(), 5.0, 0.05).redundant);
  Vector spec(10);
  spec << 10, 10, 0.01, 0.01, 0.01, 0.01, 0.01, 0.01, 0.01, 0.01;
  const Matrix q = random_orthonormal(10, 10, 4);
  const auto cert = kernel::data_redundancy_certificate(q * spec.asDiagonal() * q.transpose(), 4.0, 0.05);
  EXPECT_TRUE(cert.redundant);
  EXPECT_EQ(cert.summary.trunc_rank, 2);
}

TEST(ParameterRedundancy, Examples) {
  const Matrix phi = random_matrix(6, 10, 2);
  const auto svd = numerics::thin_svd(phi);
  EXPECT_LT(kernel::parameter_redundancy_error(phi, svd.right), 1e-12);
  for (Index d = 1; d < 6; ++d) {
    double num = 0.0;
    double den = 0.0;
    for (Index i = 0; i < 6; ++i) {
      const double l = std::pow(svd.singulars[i], 2);
      den += l * l;
      if (i >= d) num += l * l;
    }
    EXPECT_NEAR(kernel::parameter_redundancy_error(phi, svd.right.leftCols(d)), std::sqrt(num / den), 1e-10);
  }
  Matrix narrow = Matrix::Zero(6, 10);
  narrow.leftCols(3) = random_matrix(6, 3, 3);
  Matrix orth = Matrix::Zero(10, 2);
  orth(5, 0) = 1.0;
  orth(8, 1) = 1.0;
  EXPECT_NEAR(kernel::parameter_redundancy_error(narrow, orth), 1.0, 1e-14);
  EXPECT_THROW(kernel::parameter_redundancy_error(phi, 2.0 * Matrix::Identity(10, 2)), Error);
}

TEST(EffectiveDimension, Examples) {
  EXPECT_NEAR(kernel::effective_dimension(Vector::Constant(6, 0.3), 0.3), 3.0, 1e-15);
  EXPECT_NEAR(kernel::effective_dimension(vec({2, 1, 0, 0}), 1e-12), 2.0, 1e-9);
  EXPECT_NEAR(kernel::effective_dimension(vec({1, 0.1, 0.01}), 0.1), 1.0 / 1.1 + 0.5 + 0.01 / 0.11, 1e-14);
  EXPECT_THROW(kernel::effective_dimension(vec({1}), 0.0), Error);
}

TEST(Conditioning, Examples) {
  auto c = kernel::conditioning(Matrix::Identity(3, 3));
  EXPECT_DOUBLE_EQ(c.condition, 1.0);
  EXPECT_DOUBLE_EQ(c.min_eig, 1.0);
  Matrix d(2, 2);
  d << 4, 0, 0, 1;
  EXPECT_NEAR(kernel::conditioning(d).condition, 4.0, 1e-14);
  const Matrix k = random_spd(6, 3, 0.0);
  c = kernel::conditioning(k, 1e-4);
  Eigen::SelfAdjointEigenSolver<Matrix> es(k + 1e-4 * Matrix::Identity(6, 6));
  EXPECT_NEAR(c.condition, es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff(), 1e-8 * c.condition);
  EXPECT_NEAR(c.min_eig, Eigen::SelfAdjointEigenSolver<Matrix>(k).eigenvalues().minCoeff(), 1e-12);
}

TEST(BiasVariance, Examples) {
  EXPECT_EQ(kernel::bias_variance_diagnostics(vec({1, 2}), vec({1, 1}), 0.0, 10, 1.0).bias_sq, 0.0);
  EXPECT_NEAR(kernel::bias_variance_diagnostics(vec({1}), vec({1}), 1.0, 10, 1.0).bias_sq, 0.25, 1e-15);
  const Vector mu = vec({3, 1, 0.2, 0.05});
  const Vector beta = vec({0.5, -1, 2, 0.3});
  const double lambda = 0.1;
  double bias = 0.0;
  double d = 0.0;
  for (Index j = 0; j < 4; ++j) {
    bias += std::pow(lambda / (mu[j] + lambda), 2) * mu[j] * beta[j] * beta[j];
    d += mu[j] / (mu[j] + lambda);
  }
  const auto bv = kernel::bias_variance_diagnostics(mu, beta, lambda, 50, 0.4);
  EXPECT_NEAR(bv.bias_sq, bias, 1e-15);
  EXPECT_NEAR(bv.variance_bound, 0.4 * d / 50.0, 1e-15);
  try {
    kernel::bias_variance_diagnostics(mu, vec({1}), lambda, 50, 0.4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
  }
}

TEST(ExpandTargets, RecoversCoefficients) {
  const Matrix phi = random_matrix(8, 5, 1);
  const auto svd = numerics::thin_svd(phi);
  const Vector beta_true = vec({1.0, -0.5, 0.25, 2.0, 0.1});
  const Vector w = svd.right * beta_true;
  const Vector y = phi * w;
  const auto eig = numerics::sym_eig(phi * phi.transpose());
  const auto ex = kernel::expand_targets(eig, y, 8);
  ASSERT_EQ(ex.beta.size(), 5);
  for (Index j = 0; j < 5; ++j) {
    EXPECT_NEAR(std::abs(ex.beta[j]), std::abs(beta_true[j]), 1e-9);
    EXPECT_NEAR(ex.mu[j], svd.singulars[j] * svd.singulars[j] / 8.0, 1e-10);
  }
}
