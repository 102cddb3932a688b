#pragma once

#include "dntk/types.hpp"

#include <string>
#include <vector>

namespace dntk::metrics {

struct EvalReport {
  double fidelity = 0.0;
  double accuracy = 0.0;
  double mse = 0.0;
  double condition = 0.0;
  double min_eig = 0.0;
  double coverage = 0.0;
  double reconstruction_error = 0.0;
  double compression_ratio = 0.0;
};

/// Index of the largest entry in each row; ties go to the lowest index.
std::vector<int> argmax_rows(const Matrix& logits);

double fidelity(const Matrix& pred_kernel, const Matrix& pred_model);
double mse(const Matrix& pred, const Matrix& ref);
double accuracy(const Matrix& pred, const std::vector<int>& labels);

/// Subtracts the mean row.
Matrix center_rows(const Matrix& phi);

/// ||Phi V V^T||_F^2 / ||Phi||_F^2 for orthonormal V (D x s, s may be 0).
double subspace_coverage(const Matrix& phi, const Matrix& basis);

/// ||Phi - Phi V V^T||_F^2 / n.
double reconstruction_error(const Matrix& phi, const Matrix& basis);

/// Pi = A^T (A A^T)^+ A, the orthogonal projector onto the row space of A.
Matrix row_space_projector(const Matrix& rows);

/// Moore-Penrose pseudo-inverse of a symmetric PSD matrix; eigenvalues at or
/// below tol * lambda_max are treated as zero.
Matrix psd_pinv(const Matrix& s, double tol = 1e-12);

struct NystromResult {
  Matrix kernel;            // Phi Pi Phi^T
  double identity_residual; // vs K_{X I} K_{I I}^+ K_{I X}, relative to ||Phi||_F^2
};

NystromResult nystrom_kernel(const Matrix& phi, const Matrix& inducing);

struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// ||K - Phi Pi Phi^T||_F <= ||Phi||_F ||Phi (I - Pi)||_F.
BoundCheck kernel_error_bound_check(const Matrix& phi, const Matrix& projector);

struct EnergyGap {
  double tail = 0.0;          // sum_{j>r} sigma_j^2
  double misalignment = 0.0;  // tr(Phi^T Phi Pi*) - tr(Phi^T Phi Pi)
  double residual = 0.0;      // ||Phi (I - Pi)||_F^2
  double identity_error = 0.0;
};

/// Requires Pi to be an orthogonal projector of rank r (1 <= r <= D).
EnergyGap energy_gap_decomposition(const Matrix& phi, const Matrix& projector);

}  // namespace dntk::metrics
