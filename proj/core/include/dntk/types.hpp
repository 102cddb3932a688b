#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace dntk {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Whether gradient columns live in the raw parameter space (width P) or in
/// a JL-sketched space (width k).
enum class DimKind { RawParams, Sketched };

/// Kernel normalization: K = Phi Phi^T (None) or K = (1/D) Phi Phi^T (InvK).
enum class ScaleKind { None, InvK };

/// The default scale convention: 1/k on sketched features, unscaled on raw
/// parameter gradients.
ScaleKind default_scale(DimKind kind);

/// Per-class gradient matrices Phi^c (rows = samples) together with the
/// regression targets and the base model's logits at the same inputs.
struct GradientFeatures {
  std::vector<Matrix> per_class;  // C matrices, each n x D
  Matrix labels;                  // n x C targets
  Matrix model_logits;            // n x C
  DimKind dim_kind = DimKind::RawParams;

  Index samples() const { return per_class.empty() ? 0 : per_class.front().rows(); }
  Index width() const { return per_class.empty() ? 0 : per_class.front().cols(); }
  Index classes() const { return static_cast<Index>(per_class.size()); }

  /// Throws DimMismatch / NonFinite when the invariants are broken.
  void validate() const;

  /// Rows `indices` of every block, in the given order.
  GradientFeatures subset(std::span<const Index> indices) const;

  /// n x (C*D): class blocks laid side by side.
  Matrix flattened() const;
};

bool all_finite(const Matrix& m);

}  // namespace dntk
