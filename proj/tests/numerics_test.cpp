#include "dntk/error.hpp"
#include "dntk/numerics.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace dntk;
using dntk::testing::max_abs;
using dntk::testing::random_matrix;
using dntk::testing::random_spd;
using dntk::testing::random_symmetric;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no dntk::Error thrown";
  return ErrorCode::BadArgument;
}

}  // namespace

TEST(SymEig, DiagonalCase) {
  Matrix s(2, 2);
  s << 2, 0, 0, 1;
  const auto eig = numerics::sym_eig(s);
  EXPECT_DOUBLE_EQ(eig.values[0], 2.0);
  EXPECT_DOUBLE_EQ(eig.values[1], 1.0);
  EXPECT_LT(max_abs(eig.vectors.cwiseAbs() - Matrix::Identity(2, 2)), 1e-14);
}

TEST(SymEig, Identity) {
  const auto eig = numerics::sym_eig(Matrix::Identity(3, 3));
  for (Index i = 0; i < 3; ++i) EXPECT_NEAR(eig.values[i], 1.0, 1e-15);
}

TEST(SymEig, RandomReconstructionAndInvariants) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Matrix s = random_symmetric(8, seed);
    const auto eig = numerics::sym_eig(s);
    const Matrix rebuilt = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
    EXPECT_LT((rebuilt - s).norm() / s.norm(), 1e-10);
    EXPECT_LT(max_abs(eig.vectors.transpose() * eig.vectors - Matrix::Identity(8, 8)), 1e-10);
    EXPECT_NEAR(eig.values.sum(), s.trace(), 1e-8 * std::max(1.0, std::abs(s.trace())));
    for (Index i = 1; i < 8; ++i) EXPECT_GE(eig.values[i - 1], eig.values[i]);
  }
}

TEST(SymEig, SignConventionFirstNonzeroPositive) {
  const auto eig = numerics::sym_eig(random_symmetric(6, 3));
  for (Index j = 0; j < 6; ++j) {
    Index first = 0;
    while (std::abs(eig.vectors(first, j)) < 1e-10) ++first;
    EXPECT_GT(eig.vectors(first, j), 0.0);
  }
}

TEST(SymEig, Errors) {
  EXPECT_EQ(code_of([] { numerics::sym_eig(Matrix::Zero(2, 3)); }), ErrorCode::NotSquare);
  Matrix asym(2, 2);
  asym << 1, 2, 3, 4;
  EXPECT_EQ(code_of([&] { numerics::sym_eig(asym); }), ErrorCode::NotSymmetric);
  Matrix bad = Matrix::Identity(2, 2);
  bad(0, 0) = std::nan("");
  EXPECT_EQ(code_of([&] { numerics::sym_eig(bad); }), ErrorCode::NonFinite);
}

TEST(SymEig, AcceptsRoundoffAsymmetry) {
  Matrix s = random_symmetric(5, 9);
  s(0, 1) += 1e-13;
  EXPECT_NO_THROW(numerics::sym_eig(s));
}

TEST(ThinSvd, ZeroMatrix) {
  const auto svd = numerics::thin_svd(Matrix::Zero(4, 3));
  EXPECT_EQ(max_abs(svd.singulars), 0.0);
}

TEST(ThinSvd, RankOne) {
  Vector u = random_matrix(5, 1, 1).col(0).normalized();
  Vector v = random_matrix(3, 1, 2).col(0).normalized();
  const auto svd = numerics::thin_svd(u * v.transpose());
  EXPECT_NEAR(svd.singulars[0], 1.0, 1e-12);
  EXPECT_NEAR(svd.singulars[1], 0.0, 1e-12);
  EXPECT_NEAR(svd.singulars[2], 0.0, 1e-12);
}

TEST(ThinSvd, RandomReconstruction) {
  const Matrix a = random_matrix(6, 4, 5);
  const auto svd = numerics::thin_svd(a);
  const Matrix rebuilt = svd.left * svd.singulars.asDiagonal() * svd.right.transpose();
  EXPECT_LT((a - rebuilt).norm() / a.norm(), 1e-10);
  EXPECT_LT(max_abs(svd.left.transpose() * svd.left - Matrix::Identity(4, 4)), 1e-10);
  EXPECT_LT(max_abs(svd.right.transpose() * svd.right - Matrix::Identity(4, 4)), 1e-10);
  for (Index i = 1; i < 4; ++i) EXPECT_GE(svd.singulars[i - 1], svd.singulars[i]);
  EXPECT_GE(svd.singulars.minCoeff(), 0.0);
}

TEST(ThinSvd, NonFinite) {
  Matrix a = Matrix::Ones(2, 2);
  a(1, 1) = INFINITY;
  EXPECT_EQ(code_of([&] { numerics::thin_svd(a); }), ErrorCode::NonFinite);
}

TEST(QrFilter, DuplicateColumns) {
  Matrix c(3, 2);
  c << 1, 1, 0, 0, 0, 0;
  EXPECT_EQ(numerics::qr_redundancy_filter(c, 1e-6).size(), 1u);
}

TEST(QrFilter, OrthonormalColumnsKept) {
  const auto kept = numerics::qr_redundancy_filter(Matrix::Identity(5, 4), 1e-6);
  EXPECT_EQ(kept, (std::vector<Index>{0, 1, 2, 3}));
}

TEST(QrFilter, MatchesSvdRankOnRandomInstances) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Index rank = 1 + static_cast<Index>(seed % 5);
    const Matrix c = random_matrix(12, rank, seed) * random_matrix(rank, 7, seed + 100);
    const auto kept = numerics::qr_redundancy_filter(c, 1e-6);
    // oracle: rank by singular values of the same matrix, computed by a
    // Jacobi eigensolve of the Gram matrix
    Eigen::JacobiSVD<Matrix> jac(c);
    const Vector sv = jac.singularValues();
    Index oracle = 0;
    for (Index i = 0; i < sv.size(); ++i) oracle += sv[i] > 1e-6 * sv[0];
    EXPECT_EQ(static_cast<Index>(kept.size()), std::min<Index>(rank, 7));
    EXPECT_EQ(static_cast<Index>(kept.size()), oracle);
    EXPECT_EQ(numerics::numerical_rank(c, 1e-6), oracle);
    Matrix sub(12, static_cast<Index>(kept.size()));
    for (std::size_t k = 0; k < kept.size(); ++k) sub.col(static_cast<Index>(k)) = c.col(kept[k]);
    EXPECT_EQ(Eigen::FullPivLU<Matrix>(sub).rank(), static_cast<Index>(kept.size()));
  }
}

TEST(QrFilter, FiveColumnsRankThree) {
  const Matrix c = random_matrix(8, 3, 4) * random_matrix(3, 5, 5);
  EXPECT_EQ(numerics::qr_redundancy_filter(c, 1e-6).size(), 3u);
}

TEST(QrFilter, Errors) {
  EXPECT_EQ(code_of([] { numerics::qr_redundancy_filter(Matrix(3, 0), 1e-6); }), ErrorCode::EmptyInput);
  EXPECT_EQ(code_of([] { numerics::qr_redundancy_filter(Matrix::Identity(2, 2), 0.0); }), ErrorCode::BadEps);
  EXPECT_EQ(code_of([] { numerics::qr_redundancy_filter(Matrix::Identity(2, 2), 1.0); }), ErrorCode::BadEps);
}

TEST(RidgeSolve, IdentityNoRidge) {
  const Matrix y = random_matrix(4, 2, 1);
  EXPECT_LT(max_abs(numerics::ridge_solve_direct(Matrix::Identity(4, 4), y, 0.0) - y), 1e-15);
}

TEST(RidgeSolve, DiagonalExample) {
  Matrix k(2, 2);
  k << 1, 0, 0, 3;
  Matrix y(2, 1);
  y << 2, 8;
  const Matrix a = numerics::ridge_solve_direct(k, y, 1.0);
  EXPECT_NEAR(a(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(a(1, 0), 2.0, 1e-15);
}

TEST(RidgeSolve, MatchesIterativeRefinementOracle) {
  const Matrix k = random_spd(10, 7);
  const Matrix y = random_matrix(10, 3, 8);
  const double lambda = 1e-3;
  const Matrix a = numerics::ridge_solve_direct(k, y, lambda);
  const Matrix shifted = k + lambda * Matrix::Identity(10, 10);
  // oracle: Cholesky solve followed by one residual correction
  Eigen::LLT<Matrix> llt(shifted);
  Matrix oracle = llt.solve(y);
  oracle += llt.solve(y - shifted * oracle);
  EXPECT_LT(max_abs(a - oracle) / max_abs(oracle), 1e-10);
  EXPECT_LE((shifted * a - y).norm(), 1e-8 * y.norm());
}

TEST(RidgeSolve, SingularWithoutRidge) {
  Matrix k = Matrix::Zero(3, 3);
  k(0, 0) = 1.0;
  EXPECT_EQ(code_of([&] { numerics::ridge_solve_direct(k, Matrix::Ones(3, 1), 0.0); }), ErrorCode::SingularSystem);
  EXPECT_NO_THROW(numerics::ridge_solve_direct(k, Matrix::Ones(3, 1), 1e-2));
}

TEST(RidgeSolve, NegativeLambdaRejected) {
  EXPECT_EQ(code_of([] { numerics::ridge_solve_direct(Matrix::Identity(2, 2), Matrix::Ones(2, 1), -1.0); }),
            ErrorCode::BadLambda);
}

TEST(OrthonormalBasis, SpansColumnSpace) {
  const Matrix a = random_matrix(9, 2, 1) * random_matrix(2, 4, 2);
  const Matrix q = numerics::orthonormal_basis(a);
  ASSERT_EQ(q.cols(), 2);
  EXPECT_LT(max_abs(q.transpose() * q - Matrix::Identity(2, 2)), 1e-12);
  EXPECT_LT((q * (q.transpose() * a) - a).norm() / a.norm(), 1e-12);
}
