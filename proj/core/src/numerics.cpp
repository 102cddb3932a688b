#include "dntk/numerics.hpp"

#include "dntk/error.hpp"

#include <algorithm>
#include <cmath>

namespace dntk::numerics {
namespace {

constexpr double kSignTolerance = 1e-10;

// First entry whose magnitude exceeds a small fraction of the column's norm
// is made positive.
void fix_sign(Eigen::Ref<Vector> v, Eigen::Ref<Vector> partner) {
  const double norm = v.norm();
  if (norm == 0.0) return;
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > kSignTolerance * norm) {
      if (v[i] < 0.0) {
        v = -v;
        if (partner.size() > 0) partner = -partner;
      }
      return;
    }
  }
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw Error(ErrorCode::NonFinite, what);
}

}  // namespace

EigenSystem sym_eig(const Matrix& s) {
  if (s.rows() != s.cols()) throw Error(ErrorCode::NotSquare, "sym_eig expects a square matrix");
  require_finite(s, "sym_eig input");
  EigenSystem out;
  if (s.rows() == 0) return out;

  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale)
    throw Error(ErrorCode::NotSymmetric, "sym_eig input is not symmetric");

  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::NonFinite, "eigensolver failed");

  const Index n = sym.rows();
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  Vector none;
  for (Index j = 0; j < n; ++j) fix_sign(out.vectors.col(j), none);
  return out;
}

SvdResult thin_svd(const Matrix& a) {
  require_finite(a, "thin_svd input");
  SvdResult out;
  if (a.size() == 0) {
    out.left = Matrix(a.rows(), 0);
    out.right = Matrix(a.cols(), 0);
    return out;
  }
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.left = svd.matrixU();
  out.singulars = svd.singularValues();
  out.right = svd.matrixV();
  for (Index j = 0; j < out.singulars.size(); ++j) {
    if (out.singulars[j] > 0.0) {
      fix_sign(out.left.col(j), out.right.col(j));
    } else {
      Vector none;
      fix_sign(out.right.col(j), none);
      fix_sign(out.left.col(j), none);
    }
  }
  return out;
}

Index numerical_rank(const Matrix& a, double tol_rel) {
  if (a.size() == 0) return 0;
  const Vector sv = thin_svd(a).singulars;
  if (sv[0] == 0.0) return 0;
  return static_cast<Index>((sv.array() > tol_rel * sv[0]).count());
}

std::vector<Index> qr_redundancy_filter(const Matrix& columns, double eps_rel) {
  if (columns.cols() == 0 || columns.rows() == 0)
    throw Error(ErrorCode::EmptyInput, "qr_redundancy_filter needs at least one column");
  if (!(eps_rel > 0.0 && eps_rel < 1.0)) throw Error(ErrorCode::BadEps, "eps_rel must lie in (0,1)");
  require_finite(columns, "qr_redundancy_filter input");

  Eigen::ColPivHouseholderQR<Matrix> qr(columns);
  const Matrix& r = qr.matrixQR();
  const Index diag = std::min(r.rows(), r.cols());
  double max_diag = 0.0;
  for (Index i = 0; i < diag; ++i) max_diag = std::max(max_diag, std::abs(r(i, i)));

  std::vector<Index> kept;
  if (max_diag == 0.0) return kept;
  const auto& perm = qr.colsPermutation().indices();
  for (Index i = 0; i < diag; ++i)
    if (std::abs(r(i, i)) > eps_rel * max_diag) kept.push_back(perm[i]);
  std::sort(kept.begin(), kept.end());
  return kept;
}

Matrix ridge_solve_direct(const Matrix& k, const Matrix& y, double lambda_reg) {
  if (k.rows() != k.cols()) throw Error(ErrorCode::NotSquare, "ridge kernel must be square");
  if (y.rows() != k.rows()) throw Error(ErrorCode::DimMismatch, "targets must have one row per sample");
  if (lambda_reg < 0.0) throw Error(ErrorCode::BadLambda, "lambda_reg must be >= 0");
  require_finite(k, "ridge kernel");
  require_finite(y, "ridge targets");

  Matrix shifted = k;
  shifted.diagonal().array() += lambda_reg;

  const EigenSystem eig = sym_eig(shifted);
  const double largest = eig.values.cwiseAbs().maxCoeff();
  const double smallest = eig.values.cwiseAbs().minCoeff();
  if (largest == 0.0 || smallest <= largest * 1e-12)
    throw Error(ErrorCode::SingularSystem, "K + lambda I is numerically singular");

  Eigen::PartialPivLU<Matrix> lu(shifted);
  return lu.solve(y);
}

Matrix orthonormal_basis(const Matrix& a, double eps_rel) {
  if (a.cols() == 0 || a.rows() == 0) return Matrix(a.rows(), 0);
  const auto kept = qr_redundancy_filter(a, eps_rel);
  if (kept.empty()) return Matrix(a.rows(), 0);
  Matrix sub(a.rows(), static_cast<Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) sub.col(static_cast<Index>(j)) = a.col(kept[j]);
  Eigen::HouseholderQR<Matrix> qr(sub);
  return qr.householderQ() * Matrix::Identity(a.rows(), sub.cols());
}

double relative_frobenius(const Matrix& approx, const Matrix& reference) {
  const double denom = reference.norm();
  const double diff = (approx - reference).norm();
  return denom == 0.0 ? diff : diff / denom;
}

}  // namespace dntk::numerics
