#pragma once

#include "dntk/tangent.hpp"
#include "dntk/types.hpp"

#include <cstdint>

namespace dntk::sketch {

/// g(u) = scale * Q^T u with Q a P x k matrix of orthonormal columns and
/// scale = sqrt(P/k).
struct SketchOperator {
  Matrix q;
  double scale = 1.0;
  std::uint64_t seed = 0;
  double eps_target = 0.3;

  Index source_dim() const { return q.rows(); }
  Index target_dim() const { return q.cols(); }

  Vector apply(const Eigen::Ref<const Vector>& u) const;
  /// Applies g to every row.
  Matrix apply_rows(const Matrix& rows) const;
};

inline constexpr double kDefaultEpsJl = 0.3;

/// Smallest integer k with k > 8 ln(n) / eps^2, eps in (0,1].
Index jl_dimension(Index n, double eps);

/// Q from the QR factorization of a seeded Gaussian P x k matrix, with column
/// signs fixed so that diag(R) > 0.
SketchOperator sample_orthonormal(Index p, Index k, std::uint64_t seed, double eps_target = kDefaultEpsJl);

GradientFeatures project_features(const GradientFeatures& features, const SketchOperator& op);

/// Extracts per-logit gradients in chunks and projects them immediately, so
/// the raw n x P blocks are never held in memory at once.
GradientFeatures extract_projected_features(const tangent::MlpParams& params, const Matrix& inputs,
                                            const Matrix& targets, const SketchOperator& op,
                                            Index chunk = 64);

}  // namespace dntk::sketch
