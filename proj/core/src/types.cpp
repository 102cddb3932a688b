#include "dntk/types.hpp"

#include "dntk/error.hpp"

namespace dntk {

ScaleKind default_scale(DimKind kind) {
  return kind == DimKind::Sketched ? ScaleKind::InvK : ScaleKind::None;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

void GradientFeatures::validate() const {
  if (per_class.empty()) throw Error(ErrorCode::EmptyInput, "no class blocks");
  const Index n = samples();
  const Index d = width();
  for (const auto& block : per_class) {
    if (block.rows() != n || block.cols() != d)
      throw Error(ErrorCode::DimMismatch, "class blocks differ in shape");
    if (!block.allFinite()) throw Error(ErrorCode::NonFinite, "gradient block");
  }
  if (labels.rows() != n || labels.cols() != classes())
    throw Error(ErrorCode::DimMismatch, "labels must be n x C");
  if (model_logits.rows() != n || model_logits.cols() != classes())
    throw Error(ErrorCode::DimMismatch, "model_logits must be n x C");
  if (!labels.allFinite() || !model_logits.allFinite())
    throw Error(ErrorCode::NonFinite, "labels or logits");
}

GradientFeatures GradientFeatures::subset(std::span<const Index> indices) const {
  GradientFeatures out;
  out.dim_kind = dim_kind;
  const auto rows = static_cast<Index>(indices.size());
  for (Index i : indices)
    if (i < 0 || i >= samples()) throw Error(ErrorCode::IndexOutOfRange, "subset index");
  out.per_class.reserve(per_class.size());
  for (const auto& block : per_class) {
    Matrix sub(rows, block.cols());
    for (Index r = 0; r < rows; ++r) sub.row(r) = block.row(indices[r]);
    out.per_class.push_back(std::move(sub));
  }
  out.labels.resize(rows, labels.cols());
  out.model_logits.resize(rows, model_logits.cols());
  for (Index r = 0; r < rows; ++r) {
    out.labels.row(r) = labels.row(indices[r]);
    out.model_logits.row(r) = model_logits.row(indices[r]);
  }
  return out;
}

Matrix GradientFeatures::flattened() const {
  const Index d = width();
  Matrix out(samples(), d * classes());
  for (Index c = 0; c < classes(); ++c) out.middleCols(c * d, d) = per_class[c];
  return out;
}

}  // namespace dntk
