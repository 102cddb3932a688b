#include "dntk/kernel.hpp"

#include "dntk/error.hpp"

#include <cmath>
#include <limits>

namespace dntk::kernel {
namespace {

Vector clamped(const Vector& v) { return v.cwiseMax(0.0); }

}  // namespace

double scale_factor(ScaleKind kind, Index width) {
  if (kind == ScaleKind::None) return 1.0;
  if (width <= 0) throw Error(ErrorCode::DimMismatch, "feature width must be positive");
  return 1.0 / static_cast<double>(width);
}

Matrix cross_kernel(const Matrix& a, const Matrix& b, ScaleKind scale) {
  if (a.cols() != b.cols()) throw Error(ErrorCode::DimMismatch, "cross kernel widths differ");
  Matrix k = a * b.transpose();
  k *= scale_factor(scale, a.cols());
  return k;
}

Matrix class_kernel(const GradientFeatures& features, Index c, ScaleKind scale) {
  if (c < 0 || c >= features.classes()) throw Error(ErrorCode::ClassOutOfRange, "class index");
  const Matrix& phi = features.per_class[c];
  Matrix k(phi.rows(), phi.rows());
  k.setZero();
  k.selfadjointView<Eigen::Lower>().rankUpdate(phi, scale_factor(scale, phi.cols()));
  k.triangularView<Eigen::StrictlyUpper>() = k.transpose();
  return k;
}

KernelStack build_stack(const GradientFeatures& features, ScaleKind scale) {
  KernelStack stack;
  stack.scale_kind = scale;
  stack.source_dim = features.width();
  for (Index c = 0; c < features.classes(); ++c) stack.per_class.push_back(class_kernel(features, c, scale));
  return stack;
}

Matrix average_kernel(const KernelStack& stack) {
  if (stack.per_class.empty()) throw Error(ErrorCode::EmptyInput, "empty kernel stack");
  Matrix avg = Matrix::Zero(stack.size(), stack.size());
  for (const auto& k : stack.per_class) avg += k;
  avg /= static_cast<double>(stack.classes());
  return 0.5 * (avg + avg.transpose());
}

Index rank_for_fraction(const Vector& eigvals, double fraction) {
  const Vector lam = clamped(eigvals);
  const double total = lam.sum();
  if (!(total > 0.0)) throw Error(ErrorCode::ZeroTrace, "spectrum has zero trace");
  // relative slack absorbs rounding in the cumulative sum
  const double target = fraction * total * (1.0 - 1e-12);
  double cum = 0.0;
  for (Index r = 0; r < lam.size(); ++r) {
    cum += lam[r];
    if (cum >= target) return r + 1;
  }
  return lam.size();
}

Index truncation_rank(const Vector& eigvals, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorCode::BadEps, "eps must lie in (0,1)");
  return rank_for_fraction(eigvals, 1.0 - eps);
}

SpectralSummary summarize(const Matrix& k, double eps) {
  SpectralSummary s;
  s.eig = numerics::sym_eig(k);
  s.trunc_rank = truncation_rank(s.eig.values, eps);
  s.trace = clamped(s.eig.values).sum();
  s.min_eig = s.eig.values.size() > 0 ? s.eig.values.minCoeff() : 0.0;
  double smallest_pos = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < s.eig.values.size(); ++i)
    if (s.eig.values[i] > 0.0) smallest_pos = std::min(smallest_pos, s.eig.values[i]);
  s.condition = s.eig.values.size() > 0 && std::isfinite(smallest_pos) ? s.eig.values[0] / smallest_pos
                                                                        : std::numeric_limits<double>::infinity();
  return s;
}

RedundancyCertificate data_redundancy_certificate(const Matrix& k, double r_factor, double eps) {
  if (!(r_factor > 0.0)) throw Error(ErrorCode::BadArgument, "r_factor must be positive");
  RedundancyCertificate cert;
  cert.summary = summarize(k, eps);
  cert.redundant = static_cast<double>(cert.summary.trunc_rank) <= static_cast<double>(k.rows()) / r_factor;
  return cert;
}

double parameter_redundancy_error(const Matrix& phi, const Matrix& basis) {
  if (basis.rows() != phi.cols()) throw Error(ErrorCode::DimMismatch, "basis must be D x d");
  if (basis.cols() > 0) {
    const Matrix gram = basis.transpose() * basis;
    if ((gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() > 1e-8)
      throw Error(ErrorCode::NonOrthonormalBasis, "basis columns are not orthonormal");
  }
  const Matrix k = phi * phi.transpose();
  const Matrix projected = (phi * basis) * basis.transpose();
  const Matrix kp = projected * projected.transpose();
  const double denom = k.norm();
  if (denom == 0.0) return 0.0;
  return (kp - k).norm() / denom;
}

double effective_dimension(const Vector& eigvals, double lambda_reg) {
  if (!(lambda_reg > 0.0)) throw Error(ErrorCode::BadLambda, "lambda_reg must be positive");
  const Vector mu = clamped(eigvals);
  return (mu.array() / (mu.array() + lambda_reg)).sum();
}

Conditioning conditioning(const Matrix& k, double ridge) {
  const numerics::EigenSystem eig = numerics::sym_eig(k);
  Conditioning out;
  if (eig.values.size() == 0) return out;
  out.min_eig = eig.values.minCoeff();
  const double hi = eig.values.maxCoeff() + ridge;
  const double lo = out.min_eig + ridge;
  out.condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  return out;
}

BiasVariance bias_variance_diagnostics(const Vector& mu, const Vector& beta, double lambda_reg, Index n,
                                       double sigma2) {
  if (mu.size() != beta.size()) throw Error(ErrorCode::LengthMismatch, "mu and beta lengths differ");
  if (lambda_reg < 0.0) throw Error(ErrorCode::BadLambda, "lambda_reg must be >= 0");
  if (n < 1) throw Error(ErrorCode::BadArgument, "n must be positive");
  BiasVariance out;
  const Vector m = clamped(mu);
  for (Index j = 0; j < m.size(); ++j) {
    const double denom = m[j] + lambda_reg;
    if (denom <= 0.0) continue;
    const double shrink = lambda_reg / denom;
    out.bias_sq += shrink * shrink * m[j] * beta[j] * beta[j];
  }
  const double d = lambda_reg > 0.0 ? effective_dimension(m, lambda_reg)
                                    : static_cast<double>((m.array() > 0.0).count());
  out.variance_bound = sigma2 * d / static_cast<double>(n);
  return out;
}

TargetExpansion expand_targets(const numerics::EigenSystem& eig, const Vector& y, Index n, double tol) {
  if (y.size() != eig.vectors.rows()) throw Error(ErrorCode::LengthMismatch, "target length");
  if (n < 1) throw Error(ErrorCode::BadArgument, "n must be positive");
  TargetExpansion out;
  if (eig.size() == 0) return out;
  const double top = std::max(0.0, eig.values[0]);
  Index kept = 0;
  for (Index j = 0; j < eig.size(); ++j)
    if (eig.values[j] > tol * top && eig.values[j] > 0.0) ++kept;
  out.mu.resize(kept);
  out.beta.resize(kept);
  for (Index j = 0, k = 0; j < eig.size(); ++j) {
    if (!(eig.values[j] > tol * top && eig.values[j] > 0.0)) continue;
    out.mu[k] = eig.values[j] / static_cast<double>(n);
    out.beta[k] = eig.vectors.col(j).dot(y) / std::sqrt(eig.values[j]);
    ++k;
  }
  return out;
}

}  // namespace dntk::kernel
