#pragma once

#include "dntk/numerics.hpp"
#include "dntk/types.hpp"

#include <vector>

namespace dntk::kernel {

struct KernelStack {
  std::vector<Matrix> per_class;
  ScaleKind scale_kind = ScaleKind::None;
  Index source_dim = 0;

  Index classes() const { return static_cast<Index>(per_class.size()); }
  Index size() const { return per_class.empty() ? 0 : per_class.front().rows(); }
};

struct SpectralSummary {
  numerics::EigenSystem eig;
  Index trunc_rank = 0;
  double trace = 0.0;      // of the clamped spectrum
  double condition = 0.0;  // lambda_max / smallest positive eigenvalue
  double min_eig = 0.0;    // raw, may be slightly negative
};

double scale_factor(ScaleKind kind, Index width);

/// s * Phi^c (Phi^c)^T, symmetrized; s = 1 or 1/D.
Matrix class_kernel(const GradientFeatures& features, Index c, ScaleKind scale);

/// s * A B^T between two row sets of the same width.
Matrix cross_kernel(const Matrix& a, const Matrix& b, ScaleKind scale);

KernelStack build_stack(const GradientFeatures& features, ScaleKind scale);

Matrix average_kernel(const KernelStack& stack);

/// Smallest r with sum_{i<=r} lambda_i / sum_i lambda_i >= 1 - eps, with
/// negative eigenvalues clamped to zero. eps must lie in (0,1).
Index truncation_rank(const Vector& eigvals, double eps);

/// Same rule expressed as a captured-variance fraction in (0,1].
Index rank_for_fraction(const Vector& eigvals, double fraction);

SpectralSummary summarize(const Matrix& k, double eps);

struct RedundancyCertificate {
  bool redundant = false;
  SpectralSummary summary;
};

/// (r, eps)-data redundancy: trunc_rank(K, eps) <= n / r_factor.
RedundancyCertificate data_redundancy_certificate(const Matrix& k, double r_factor, double eps);

/// ||(Phi V V^T)(Phi V V^T)^T - Phi Phi^T||_F / ||Phi Phi^T||_F.
double parameter_redundancy_error(const Matrix& phi, const Matrix& basis);

/// d(lambda) = sum_j mu_j / (mu_j + lambda), mu clamped at zero.
double effective_dimension(const Vector& eigvals, double lambda_reg);

struct Conditioning {
  double condition = 0.0;
  double min_eig = 0.0;
};

/// Condition number of K + ridge I (ridge may be 0) and the raw minimum
/// eigenvalue of K. A non-positive smallest eigenvalue gives +inf condition.
Conditioning conditioning(const Matrix& k, double ridge = 0.0);

struct BiasVariance {
  double bias_sq = 0.0;
  double variance_bound = 0.0;
};

/// bias^2 = sum_j (lambda/(mu_j+lambda))^2 mu_j beta_j^2 and the variance
/// bound sigma^2 d(lambda) / n.
BiasVariance bias_variance_diagnostics(const Vector& mu, const Vector& beta, double lambda_reg, Index n,
                                       double sigma2);

struct TargetExpansion {
  Vector mu;    // covariance-scale eigenvalues lambda_j / n
  Vector beta;  // coefficients of the target in the covariance eigenbasis
};

/// Expands y in the eigenbasis of K = Phi Phi^T: with y = Phi w and
/// w = sum_j beta_j v_j, beta_j = (u_j^T y) / sqrt(lambda_j). Modes with
/// lambda_j <= tol * lambda_max are dropped.
TargetExpansion expand_targets(const numerics::EigenSystem& eig, const Vector& y, Index n, double tol = 1e-12);

}  // namespace dntk::kernel
