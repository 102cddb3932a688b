#include "dntk/sketch.hpp"

#include "dntk/error.hpp"

#include <cmath>
#include <random>

namespace dntk::sketch {

Vector SketchOperator::apply(const Eigen::Ref<const Vector>& u) const {
  if (u.size() != source_dim()) throw Error(ErrorCode::DimMismatch, "vector width does not match the sketch");
  return scale * (q.transpose() * u);
}

Matrix SketchOperator::apply_rows(const Matrix& rows) const {
  if (rows.cols() != source_dim()) throw Error(ErrorCode::DimMismatch, "row width does not match the sketch");
  Matrix out = rows * q;
  out *= scale;
  return out;
}

Index jl_dimension(Index n, double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw Error(ErrorCode::BadEps, "eps must lie in (0,1]");
  if (n < 2) throw Error(ErrorCode::BadArgument, "jl_dimension needs n >= 2");
  const double bound = 8.0 * std::log(static_cast<double>(n)) / (eps * eps);
  return static_cast<Index>(std::floor(bound)) + 1;
}

SketchOperator sample_orthonormal(Index p, Index k, std::uint64_t seed, double eps_target) {
  if (k < 1 || p < 1) throw Error(ErrorCode::BadArgument, "sketch dimensions must be positive");
  if (k > p) throw Error(ErrorCode::KTooLarge, "k must not exceed P");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(p, k);
  // column by column so that a fixed seed gives the same leading columns for any P
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < p; ++i) g(i, j) = normal(rng);

  Eigen::HouseholderQR<Matrix> qr(g);
  SketchOperator op;
  op.q = qr.householderQ() * Matrix::Identity(p, k);
  const Matrix& r = qr.matrixQR();
  for (Index j = 0; j < k; ++j)
    if (r(j, j) < 0.0) op.q.col(j) = -op.q.col(j);
  op.scale = std::sqrt(static_cast<double>(p) / static_cast<double>(k));
  op.seed = seed;
  op.eps_target = eps_target;
  return op;
}

GradientFeatures project_features(const GradientFeatures& features, const SketchOperator& op) {
  if (features.dim_kind != DimKind::RawParams)
    throw Error(ErrorCode::DimMismatch, "features are already sketched");
  if (features.width() != op.source_dim()) throw Error(ErrorCode::DimMismatch, "feature width must equal P");
  GradientFeatures out;
  out.dim_kind = DimKind::Sketched;
  out.labels = features.labels;
  out.model_logits = features.model_logits;
  out.per_class.reserve(features.per_class.size());
  for (const auto& block : features.per_class) out.per_class.push_back(op.apply_rows(block));
  return out;
}

GradientFeatures extract_projected_features(const tangent::MlpParams& params, const Matrix& inputs,
                                            const Matrix& targets, const SketchOperator& op, Index chunk) {
  if (params.param_count() != op.source_dim()) throw Error(ErrorCode::DimMismatch, "sketch width must equal P");
  if (chunk < 1) chunk = 1;
  const Index n = inputs.rows();
  const Index classes = params.output_dim();
  GradientFeatures out;
  out.dim_kind = DimKind::Sketched;
  out.labels = targets;
  out.model_logits.resize(n, classes);
  out.per_class.assign(static_cast<std::size_t>(classes), Matrix(n, op.target_dim()));
  for (Index start = 0; start < n; start += chunk) {
    const Index rows = std::min(chunk, n - start);
    const GradientFeatures raw =
        tangent::extract_features(params, inputs.middleRows(start, rows), targets.middleRows(start, rows));
    out.model_logits.middleRows(start, rows) = raw.model_logits;
    for (Index c = 0; c < classes; ++c) out.per_class[c].middleRows(start, rows) = op.apply_rows(raw.per_class[c]);
  }
  return out;
}

}  // namespace dntk::sketch
