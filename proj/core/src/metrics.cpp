#include "dntk/metrics.hpp"

#include "dntk/error.hpp"
#include "dntk/numerics.hpp"

#include <cmath>

namespace dntk::metrics {
namespace {

void require_same_shape(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(ErrorCode::ShapeMismatch, "operand shapes differ");
}

void require_orthonormal(const Matrix& phi, const Matrix& basis) {
  if (basis.rows() != phi.cols()) throw Error(ErrorCode::DimMismatch, "basis must be D x s");
  if (basis.cols() == 0) return;
  const Matrix gram = basis.transpose() * basis;
  if ((gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() > 1e-8)
    throw Error(ErrorCode::NonOrthonormalBasis, "basis columns are not orthonormal");
}

void require_projector(const Matrix& p, Index dim) {
  if (p.rows() != dim || p.cols() != dim) throw Error(ErrorCode::DimMismatch, "projector must be D x D");
  const double scale = std::max(1.0, p.cwiseAbs().maxCoeff());
  if ((p * p - p).cwiseAbs().maxCoeff() > 1e-9 * scale || (p - p.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw Error(ErrorCode::NotAProjector, "matrix is not an orthogonal projector");
}

}  // namespace

std::vector<int> argmax_rows(const Matrix& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()), 0);
  for (Index i = 0; i < logits.rows(); ++i) {
    int best = 0;
    for (Index c = 1; c < logits.cols(); ++c)
      if (logits(i, c) > logits(i, best)) best = static_cast<int>(c);
    out[i] = best;
  }
  return out;
}

double fidelity(const Matrix& pred_kernel, const Matrix& pred_model) {
  require_same_shape(pred_kernel, pred_model);
  if (pred_kernel.rows() == 0) return 0.0;
  const auto a = argmax_rows(pred_kernel);
  const auto b = argmax_rows(pred_model);
  Index match = 0;
  for (std::size_t i = 0; i < a.size(); ++i) match += a[i] == b[i];
  return static_cast<double>(match) / static_cast<double>(a.size());
}

double mse(const Matrix& pred, const Matrix& ref) {
  require_same_shape(pred, ref);
  if (pred.size() == 0) return 0.0;
  return (pred - ref).squaredNorm() / static_cast<double>(pred.size());
}

double accuracy(const Matrix& pred, const std::vector<int>& labels) {
  if (static_cast<Index>(labels.size()) != pred.rows()) throw Error(ErrorCode::ShapeMismatch, "one label per row");
  if (labels.empty()) return 0.0;
  const auto a = argmax_rows(pred);
  Index match = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= pred.cols()) throw Error(ErrorCode::ClassOutOfRange, "label");
    match += a[i] == labels[i];
  }
  return static_cast<double>(match) / static_cast<double>(a.size());
}

Matrix center_rows(const Matrix& phi) {
  if (phi.rows() == 0) return phi;
  return phi.rowwise() - phi.colwise().mean();
}

double subspace_coverage(const Matrix& phi, const Matrix& basis) {
  require_orthonormal(phi, basis);
  const double total = phi.squaredNorm();
  if (total == 0.0) return 1.0;
  if (basis.cols() == 0) return 0.0;
  return (phi * basis).squaredNorm() / total;
}

double reconstruction_error(const Matrix& phi, const Matrix& basis) {
  require_orthonormal(phi, basis);
  if (phi.rows() == 0) return 0.0;
  const Matrix residual = basis.cols() == 0 ? phi : Matrix(phi - (phi * basis) * basis.transpose());
  return residual.squaredNorm() / static_cast<double>(phi.rows());
}

Matrix psd_pinv(const Matrix& s, double tol) {
  const numerics::EigenSystem eig = numerics::sym_eig(s);
  if (eig.size() == 0) return s;
  const double top = std::max(0.0, eig.values[0]);
  Vector inv = Vector::Zero(eig.size());
  for (Index i = 0; i < eig.size(); ++i)
    if (eig.values[i] > tol * top && eig.values[i] > 0.0) inv[i] = 1.0 / eig.values[i];
  return eig.vectors * inv.asDiagonal() * eig.vectors.transpose();
}

Matrix row_space_projector(const Matrix& rows) {
  const Matrix gram = rows * rows.transpose();
  Matrix p = rows.transpose() * psd_pinv(gram) * rows;
  return 0.5 * (p + p.transpose());
}

NystromResult nystrom_kernel(const Matrix& phi, const Matrix& inducing) {
  if (phi.cols() != inducing.cols()) throw Error(ErrorCode::DimMismatch, "inducing rows must share the width");
  if (inducing.rows() == 0 || inducing.cwiseAbs().maxCoeff() == 0.0)
    throw Error(ErrorCode::DegenerateInducing, "inducing set is empty or all zero");
  NystromResult out;
  const Matrix pi = row_space_projector(inducing);
  out.kernel = phi * pi * phi.transpose();
  const Matrix k_xi = phi * inducing.transpose();
  const Matrix k_ii = inducing * inducing.transpose();
  const Matrix inducing_form = k_xi * psd_pinv(k_ii) * k_xi.transpose();
  const double scale = phi.squaredNorm();
  out.identity_residual = scale == 0.0 ? 0.0 : (out.kernel - inducing_form).norm() / scale;
  return out;
}

BoundCheck kernel_error_bound_check(const Matrix& phi, const Matrix& projector) {
  require_projector(projector, phi.cols());
  const Matrix complement = Matrix::Identity(phi.cols(), phi.cols()) - projector;
  BoundCheck out;
  out.lhs = (phi * complement * phi.transpose()).norm();
  out.rhs = phi.norm() * (phi * complement).norm();
  out.holds = out.lhs <= out.rhs * (1.0 + 1e-12) + 1e-14;
  return out;
}

EnergyGap energy_gap_decomposition(const Matrix& phi, const Matrix& projector) {
  require_projector(projector, phi.cols());
  const Index r = static_cast<Index>(std::llround(projector.trace()));
  if (r < 1 || r > phi.cols()) throw Error(ErrorCode::RankMismatch, "projector rank must lie in [1, D]");
  const numerics::SvdResult svd = numerics::thin_svd(phi);
  EnergyGap out;
  for (Index j = r; j < svd.singulars.size(); ++j) out.tail += svd.singulars[j] * svd.singulars[j];

  const Matrix gram = phi.transpose() * phi;
  // Pi* = W_r W_r^T; pad with zeros when Phi has fewer than r singular directions
  const Index avail = std::min(r, svd.right.cols());
  const Matrix wr = svd.right.leftCols(avail);
  const double best = (wr.transpose() * gram * wr).trace();
  const double captured = (gram * projector).trace();
  out.misalignment = best - captured;
  const Matrix complement = Matrix::Identity(phi.cols(), phi.cols()) - projector;
  out.residual = (phi * complement).squaredNorm();
  const double total = phi.squaredNorm();
  out.identity_error = total == 0.0 ? 0.0 : std::abs(out.tail + out.misalignment - out.residual) / total;
  return out;
}

}  // namespace dntk::metrics
