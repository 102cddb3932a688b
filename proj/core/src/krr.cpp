#include "dntk/krr.hpp"

#include "dntk/error.hpp"
#include "dntk/kernel.hpp"

namespace dntk::krr {
namespace {

void solve_alpha(KrrModel& model) {
  const Index s = model.size();
  if (model.rank && (*model.rank < 1 || *model.rank > s))
    throw Error(ErrorCode::RankTooLarge, "rank must lie in [1, s]");
  const Index r = model.rank.value_or(s);
  model.alpha.resize(s, model.classes());
  for (Index c = 0; c < model.classes(); ++c) {
    const auto& eig = model.eig[c];
    const Vector sigma = eig.values.head(r);
    const Vector shifted = sigma.array() + model.lambda_reg;
    const double top = std::abs(sigma.size() > 0 ? sigma[0] : 0.0) + model.lambda_reg;
    if (top == 0.0 || (shifted.array().abs() <= 1e-12 * top).any())
      throw Error(ErrorCode::SingularSystem, "kernel is singular; use lambda_reg > 0 or a lower rank");
    const auto u = eig.vectors.leftCols(r);
    const Vector proj = u.transpose() * model.targets.col(c);
    model.alpha.col(c) = u * proj.cwiseQuotient(shifted);
  }
}

}  // namespace

KrrModel fit(const GradientFeatures& train, const FitOptions& options) {
  if (options.lambda_reg < 0.0) throw Error(ErrorCode::BadLambda, "lambda_reg must be >= 0");
  if (train.classes() == 0 || train.samples() == 0) throw Error(ErrorCode::EmptyInput, "empty training set");
  if (train.labels.rows() != train.samples() || train.labels.cols() != train.classes())
    throw Error(ErrorCode::DimMismatch, "targets must be s x C");

  KrrModel model;
  model.basis = train.per_class;
  model.targets = train.labels;
  model.lambda_reg = options.lambda_reg;
  model.rank = options.rank;
  model.dim_kind = train.dim_kind;
  model.scale_kind = options.scale.value_or(default_scale(train.dim_kind));
  for (Index c = 0; c < train.classes(); ++c)
    model.eig.push_back(numerics::sym_eig(kernel::class_kernel(train, c, model.scale_kind)));
  solve_alpha(model);
  return model;
}

KrrModel with_rank(const KrrModel& model, std::optional<Index> rank) {
  KrrModel out = model;
  out.rank = rank;
  solve_alpha(out);
  return out;
}

Matrix predict(const KrrModel& model, const GradientFeatures& test) {
  if (test.classes() != model.classes()) throw Error(ErrorCode::DimMismatch, "class count differs");
  if (test.width() != model.width()) throw Error(ErrorCode::DimMismatch, "feature width differs");
  if (test.dim_kind != model.dim_kind)
    throw Error(ErrorCode::ScaleMismatch, "test features live in a different space than the model basis");
  Matrix out(test.samples(), model.classes());
  for (Index c = 0; c < model.classes(); ++c) {
    const Vector w = model.basis[c].transpose() * model.alpha.col(c);
    out.col(c) = kernel::scale_factor(model.scale_kind, model.width()) * (test.per_class[c] * w);
  }
  return out;
}

}  // namespace dntk::krr
