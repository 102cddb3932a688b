#pragma once

#include "dntk/numerics.hpp"
#include "dntk/types.hpp"

#include <optional>
#include <vector>

namespace dntk::krr {

inline constexpr double kDefaultLambda = 1e-4;

struct FitOptions {
  double lambda_reg = kDefaultLambda;
  std::optional<Index> rank;
  std::optional<ScaleKind> scale;  // defaults to the training set's convention
};

struct KrrModel {
  std::vector<Matrix> basis;  // C blocks, s x D
  Matrix targets;             // s x C
  Matrix alpha;               // s x C
  double lambda_reg = kDefaultLambda;
  std::optional<Index> rank;
  ScaleKind scale_kind = ScaleKind::None;
  DimKind dim_kind = DimKind::RawParams;
  std::vector<numerics::EigenSystem> eig;  // per-class kernel eigensystems

  Index size() const { return targets.rows(); }
  Index classes() const { return static_cast<Index>(basis.size()); }
  Index width() const { return basis.empty() ? 0 : basis.front().cols(); }
};

/// Per class: alpha^c = U (Sigma + lambda I)^{-1} U^T Y^c with K^c = U Sigma U^T,
/// truncated to the top `rank` modes when requested. Targets are the
/// training set's labels.
KrrModel fit(const GradientFeatures& train, const FitOptions& options = {});

/// Recomputes alpha for a new rank from the cached eigensystems.
KrrModel with_rank(const KrrModel& model, std::optional<Index> rank);

/// f^c(x*) = s * phi^c(x*)^T (Phi^c)^T alpha^c for each test row.
Matrix predict(const KrrModel& model, const GradientFeatures& test);

}  // namespace dntk::krr
