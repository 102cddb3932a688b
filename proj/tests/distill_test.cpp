#include "dntk/baselines.hpp"
#include "dntk/cluster.hpp"
#include "dntk/distill.hpp"
#include "dntk/error.hpp"
#include "dntk/kernel.hpp"
#include "dntk/metrics.hpp"
#include "planted.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace dntk;
using namespace dntk::distill;
using dntk::testing::max_abs;
using dntk::testing::random_features;
using dntk::testing::random_matrix;
using dntk::testing::random_spd;

namespace {

std::vector<Index> range(Index a, Index b) {
  std::vector<Index> v(static_cast<std::size_t>(b - a));
  std::iota(v.begin(), v.end(), a);
  return v;
}

GradientFeatures block_features(const std::vector<Index>& sizes, Index d, std::uint64_t seed) {
  // rows of block b live in their own coordinate group, so the kernel is
  // exactly block diagonal
  Index n = 0;
  for (Index s : sizes) n += s;
  const Index groups = static_cast<Index>(sizes.size());
  GradientFeatures f;
  f.dim_kind = DimKind::RawParams;
  Matrix phi = Matrix::Zero(n, d * groups);
  Index off = 0;
  for (Index b = 0; b < groups; ++b) {
    Matrix block = random_matrix(sizes[b], d, seed + static_cast<std::uint64_t>(b));
    block.col(0).array() = block.col(0).array().abs() + 3.0;
    phi.block(off, b * d, sizes[b], d) = block;
    off += sizes[b];
  }
  f.per_class = {phi, 0.5 * phi};
  f.labels = random_matrix(n, 2, seed + 50);
  f.model_logits = f.labels;
  return f;
}

}  // namespace

TEST(Coverage, SingleClusterFullRank) {
  const Matrix k = random_spd(6, 1);
  const auto global = numerics::sym_eig(k);
  LocalEigen le{global, 6};
  const Vector c = coverage_coefficients(global.vectors, 6, {range(0, 6)}, {le});
  for (Index j = 0; j < 6; ++j) EXPECT_NEAR(c[j], 1.0, 1e-12);
}

TEST(Coverage, SupportedOnOneClusterInsideItsTopSpace) {
  Matrix k = Matrix::Zero(6, 6);
  k.topLeftCorner(3, 3) = random_spd(3, 2) + 5.0 * Matrix::Identity(3, 3);
  k.bottomRightCorner(3, 3) = 0.1 * random_spd(3, 3);
  const auto global = numerics::sym_eig(k);
  const std::vector<std::vector<Index>> sets{range(0, 3), range(3, 6)};
  std::vector<LocalEigen> locals;
  for (const auto& s : sets) locals.push_back(local_eigen(cluster::restrict_kernel(k, s), 0.999));
  const Vector c = coverage_coefficients(global.vectors, 1, sets, locals);
  EXPECT_NEAR(c[0], 1.0, 1e-12);
}

TEST(Coverage, MatchesExplicitProjectorOracle) {
  const Matrix k = random_spd(30, 4);
  const auto global = numerics::sym_eig(k);
  const std::vector<std::vector<Index>> sets{range(0, 10), range(10, 22), range(22, 30)};
  std::vector<LocalEigen> locals;
  for (const auto& s : sets) locals.push_back(local_eigen(cluster::restrict_kernel(k, s), 0.8));
  const Index rg = 12;
  const Vector c = coverage_coefficients(global.vectors, rg, sets, locals);
  for (Index j = 0; j < rg; ++j) {
    double best = 0.0;
    for (std::size_t h = 0; h < sets.size(); ++h) {
      const Index nh = static_cast<Index>(sets[h].size());
      // P_h assembled as an explicit nh x nh matrix from a fresh eigensolve
      Eigen::SelfAdjointEigenSolver<Matrix> es(cluster::restrict_kernel(k, sets[h]));
      const Matrix top = es.eigenvectors().rightCols(locals[h].rank);
      const Matrix proj = top * top.transpose();
      Vector u(nh);
      for (Index a = 0; a < nh; ++a) u[a] = global.vectors(sets[h][a], j);
      best = std::max(best, (proj * u).squaredNorm() / u.squaredNorm());
    }
    EXPECT_NEAR(c[j], best, 1e-10);
    EXPECT_LE(c[j], 1.0 + 1e-9);
  }
}

TEST(Coverage, RankZeroCluster) {
  const auto global = numerics::sym_eig(random_spd(4, 1));
  LocalEigen empty{numerics::sym_eig(Matrix::Identity(2, 2)), 0};
  LocalEigen full{numerics::sym_eig(Matrix::Identity(2, 2)), 2};
  try {
    coverage_coefficients(global.vectors, 2, {range(0, 2), range(2, 4)}, {empty, full});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RankZeroCluster);
  }
}

TEST(GapDirections, Examples) {
  Vector c(3);
  c << 0.9, 0.4, 0.95;
  EXPECT_TRUE(gap_directions(c, 0.0).empty());
  EXPECT_EQ(gap_directions(c, 1.0 + 1e-9), (std::vector<Index>{0, 1, 2}));
  EXPECT_EQ(gap_directions(c, 0.5), std::vector<Index>{1});
}

TEST(SynthesizeLocal, SinglePointCluster) {
  const GradientFeatures f = random_features(3, 5, 2, 1);
  LocalEigen le{numerics::sym_eig(Matrix::Constant(1, 1, 2.0)), 1};
  const auto cands = synthesize_local(f, {{1}}, {le});
  ASSERT_EQ(cands.size(), 1u);
  for (Index c = 0; c < 2; ++c) EXPECT_LT(max_abs(cands[0].phi.row(c) - f.per_class[c].row(1)), 1e-15);
  EXPECT_LT(max_abs(cands[0].target - f.labels.row(1).transpose()), 1e-15);
  EXPECT_EQ(max_abs(cands[0].lifted - Vector::Unit(3, 1)), 0.0);
}

TEST(SynthesizeLocal, NormIdentityAndLiftSupport) {
  const GradientFeatures f = random_features(9, 12, 1, 5);
  const std::vector<Index> idx{2, 4, 5, 7};
  const Matrix kh = cluster::restrict_kernel(kernel::class_kernel(f, 0, ScaleKind::InvK), idx);
  const LocalEigen le{numerics::sym_eig(kh), 4};
  const auto cands = synthesize_local(f, {idx}, {le});
  ASSERT_EQ(cands.size(), 4u);
  for (const auto& c : cands) {
    const double expect = 12.0 * c.eigenvalue;
    EXPECT_LE(std::abs(c.phi.row(0).squaredNorm() - expect), 1e-8 * expect);
    for (Index i = 0; i < 9; ++i)
      if (std::find(idx.begin(), idx.end(), i) == idx.end()) EXPECT_EQ(c.lifted[i], 0.0);
  }
}

TEST(SynthesizeLocal, TwoPointAverage) {
  const GradientFeatures f = random_features(2, 4, 1, 2);
  LocalEigen le;
  le.eig.values = Vector::Unit(2, 0);
  le.eig.vectors = Matrix::Constant(2, 1, 1.0 / std::sqrt(2.0));
  le.rank = 1;
  const auto cands = synthesize_local(f, {{0, 1}}, {le});
  const Vector expected = (f.per_class[0].row(0) + f.per_class[0].row(1)).transpose() / std::sqrt(2.0);
  EXPECT_LT(max_abs(cands[0].phi.row(0).transpose() - expected), 1e-15);
}

TEST(SynthesizeGap, EmptyAndRankOne) {
  GradientFeatures f;
  f.dim_kind = DimKind::Sketched;
  const Vector a = random_matrix(6, 1, 1).col(0);
  const Vector w = random_matrix(5, 1, 2).col(0);
  f.per_class = {a * w.transpose()};
  f.labels = Matrix::Zero(6, 1);
  f.model_logits = Matrix::Zero(6, 1);
  const Matrix k = kernel::class_kernel(f, 0, ScaleKind::InvK);
  const auto global = numerics::sym_eig(k);
  EXPECT_TRUE(synthesize_gap(f, global, {}).empty());
  const auto cands = synthesize_gap(f, global, {0});
  ASSERT_EQ(cands.size(), 1u);
  const Vector kv = f.per_class[0] * cands[0].phi.row(0).transpose() / 5.0;
  EXPECT_LT(max_abs(kv - global.values[0] * global.vectors.col(0)), 1e-10);
}

TEST(SynthesizeGap, DisjointSupportsAddUp) {
  const GradientFeatures f = random_features(6, 4, 1, 3);
  numerics::EigenSystem global;
  global.values = Vector::Ones(1);
  Vector v = random_matrix(6, 1, 9).col(0).normalized();
  global.vectors = v;
  const auto gap = synthesize_gap(f, global, {0});
  LocalEigen l1, l2;
  l1.eig.values = Vector::Unit(3, 0);
  l1.eig.vectors = v.head(3);
  l1.rank = 1;
  l2.eig.values = Vector::Unit(3, 0);
  l2.eig.vectors = v.tail(3);
  l2.rank = 1;
  const auto loc = synthesize_local(f, {range(0, 3), range(3, 6)}, {l1, l2});
  const Vector sum = v.head(3).norm() * loc[0].phi.row(0).transpose() + v.tail(3).norm() * loc[1].phi.row(0).transpose();
  EXPECT_LT(max_abs(sum - gap[0].phi.row(0).transpose()), 1e-12);
}

TEST(Distill, SingleClusterNoGaps) {
  const GradientFeatures f = random_features(20, 6, 2, 4);
  DistillOptions o;
  o.clusters = 1;
  o.tau_g = 0.0;
  const DistillResult r = distill::distill(f, o);
  EXPECT_TRUE(r.report.gap_set.empty());
  ASSERT_EQ(r.report.local_ranks.size(), 1u);
  EXPECT_EQ(r.distilled.size(), r.report.local_ranks[0]);
}

TEST(Distill, BlockDiagonalHasNoGaps) {
  const GradientFeatures f = block_features({10, 12, 9}, 3, 7);
  DistillOptions o;
  o.clusters = 3;
  o.tau_v = 1.0;
  const DistillResult r = distill::distill(f, o);
  EXPECT_TRUE(r.report.gap_set.empty());
  EXPECT_EQ(r.partition.index_sets.size(), 3u);
  for (Index j = 0; j < r.report.coverage.size(); ++j) EXPECT_GT(r.report.coverage[j], 0.99);
}

TEST(Distill, PlantedCrossModeLandsInGapSetAndSurvivesQr) {
  const auto planted = dntk::testing::planted_cross_mode();
  DistillOptions o;
  o.clusters = 5;
  o.tau_v = 0.95;
  o.tau_g = 0.5;
  const DistillResult r = distill::distill(planted.features, o);
  const auto global = numerics::sym_eig(kernel::class_kernel(planted.features, 0, ScaleKind::None));
  Index planted_j = -1;
  for (Index j = 0; j < r.report.r_g; ++j)
    if (std::abs(global.vectors.col(j).dot(planted.cross_direction)) > 0.999) planted_j = j;
  ASSERT_GE(planted_j, 0);
  EXPECT_NE(std::find(r.report.gap_set.begin(), r.report.gap_set.end(), planted_j), r.report.gap_set.end());
  bool kept = false;
  for (const auto& p : r.distilled.provenance) kept = kept || (p.origin == Origin::Gap && p.component == planted_j);
  EXPECT_TRUE(kept);
}

TEST(Distill, InvariantsOnRandomFeatures) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const GradientFeatures f = random_features(40, 60, 3, seed);
    DistillOptions o;
    o.clusters = 4;
    o.tau_v = 0.9;
    o.tau_g = 0.5;
    o.seed = seed;
    const DistillResult r = distill::distill(f, o);
    Index bound = static_cast<Index>(r.report.gap_set.size());
    for (Index rh : r.report.local_ranks) bound += rh;
    EXPECT_LE(r.distilled.size(), bound);
    EXPECT_EQ(numerics::numerical_rank(r.distilled.lifted_basis, 1e-10), r.distilled.size());
    for (Index c = 0; c < 3; ++c) {
      const Matrix k = kernel::class_kernel(r.distilled.synthetic, c, ScaleKind::InvK);
      EXPECT_EQ(numerics::numerical_rank(k, 1e-12), r.distilled.size());
    }
    // same combination vector on labels
    const Matrix y_hat = r.distilled.lifted_basis.transpose() * f.labels;
    EXPECT_LT(max_abs(y_hat - r.distilled.synthetic.labels), 1e-12);

    DistillOptions wider = o;
    wider.tau_g = 0.8;
    const DistillResult r2 = distill::distill(f, wider);
    for (Index j : r.report.gap_set)
      EXPECT_NE(std::find(r2.report.gap_set.begin(), r2.report.gap_set.end(), j), r2.report.gap_set.end());
    DistillOptions deeper = o;
    deeper.tau_v = 0.97;
    EXPECT_GE(distill::distill(f, deeper).report.r_g, r.report.r_g);
  }
}

TEST(Distill, DeterministicPerSeed) {
  const GradientFeatures f = random_features(30, 8, 2, 9);
  DistillOptions o;
  o.clusters = 3;
  o.seed = 5;
  const DistillResult a = distill::distill(f, o);
  const DistillResult b = distill::distill(f, o);
  EXPECT_EQ(a.distilled.synthetic.per_class[0], b.distilled.synthetic.per_class[0]);
  EXPECT_EQ(a.partition.assignments, b.partition.assignments);
}

TEST(Distill, BudgetKeepsHighestEnergy) {
  const GradientFeatures f = random_features(30, 8, 2, 3);
  DistillOptions o;
  o.clusters = 3;
  const DistillResult full = distill::distill(f, o);
  o.budget = 4;
  const DistillResult cut = distill::distill(f, o);
  ASSERT_EQ(cut.distilled.size(), 4);
  std::vector<double> energies(full.distilled.energies.data(), full.distilled.energies.data() + full.distilled.size());
  std::sort(energies.rbegin(), energies.rend());
  for (Index i = 0; i < 4; ++i) EXPECT_GE(cut.distilled.energies[i], energies[3] - 1e-12);
}

TEST(Distill, CoverageAtLeastRandomOnPlantedLowRank) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    // rank-6 features with 4 loose groups
    GradientFeatures f;
    f.dim_kind = DimKind::Sketched;
    const Matrix mix = random_matrix(60, 6, seed);
    Matrix scaled = mix;
    for (Index i = 0; i < 60; ++i) scaled.row(i) *= 1.0 + static_cast<double>(i % 4);
    f.per_class = {scaled * random_matrix(6, 20, seed + 10)};
    f.labels = Matrix::Zero(60, 1);
    f.model_logits = Matrix::Zero(60, 1);
    DistillOptions o;
    o.clusters = 4;
    o.seed = seed;
    const DistillResult r = distill::distill(f, o);
    const Index s = r.distilled.size();
    const Matrix centered = metrics::center_rows(f.flattened());
    const double cov_d =
        metrics::subspace_coverage(centered, numerics::orthonormal_basis(r.distilled.synthetic.flattened().transpose()));
    const auto idx = baselines::select_random(60, s, seed).indices;
    const double cov_r = metrics::subspace_coverage(centered, numerics::orthonormal_basis(f.subset(idx).flattened().transpose()));
    EXPECT_GE(cov_d, cov_r - 1e-9);
  }
}

TEST(Distill, Errors) {
  DistillOptions o;
  o.clusters = 50;
  EXPECT_THROW(distill::distill(random_features(10, 3, 1, 1), o), Error);
}

TEST(CompressionRatio, Examples) {
  EXPECT_DOUBLE_EQ(compression_ratio(500, 5), 100.0);
  EXPECT_DOUBLE_EQ(compression_ratio(500, 500), 1.0);
  EXPECT_DOUBLE_EQ(compression_ratio(500, 25), 20.0);
  EXPECT_THROW(compression_ratio(5, 0), Error);
}
