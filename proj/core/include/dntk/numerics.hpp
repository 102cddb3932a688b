#pragma once

#include "dntk/types.hpp"

#include <vector>

namespace dntk::numerics {

/// Symmetric eigendecomposition S = U diag(values) U^T, values descending.
struct EigenSystem {
  Vector values;
  Matrix vectors;  // columns orthonormal

  Index size() const { return values.size(); }
};

struct SvdResult {
  Matrix left;
  Vector singulars;  // non-negative, descending
  Matrix right;
};

inline constexpr double kSymmetryTolerance = 1e-9;
inline constexpr double kDefaultQrTolerance = 1e-6;

/// Input is symmetrized as (S + S^T)/2 after checking it is symmetric within
/// 1e-9 relative. Each eigenvector's first non-negligible entry is positive.
EigenSystem sym_eig(const Matrix& s);

/// Thin SVD with the same sign convention applied to the left vectors.
SvdResult thin_svd(const Matrix& a);

/// Numerical rank of `a` with singular values above tol_rel * sigma_max.
Index numerical_rank(const Matrix& a, double tol_rel);

/// Column-pivoted QR of `columns`; returns (ascending) original column indices
/// i with |R_ii| > eps_rel * max_j |R_jj|.
std::vector<Index> qr_redundancy_filter(const Matrix& columns, double eps_rel = kDefaultQrTolerance);

/// alpha = (K + lambda I)^{-1} Y by pivoted LU. Throws SingularSystem when the
/// shifted matrix has condition number above 1e12.
Matrix ridge_solve_direct(const Matrix& k, const Matrix& y, double lambda_reg);

/// Orthonormal basis of the column space of `a` (QR with the redundancy filter).
Matrix orthonormal_basis(const Matrix& a, double eps_rel = 1e-10);

double relative_frobenius(const Matrix& approx, const Matrix& reference);

}  // namespace dntk::numerics
