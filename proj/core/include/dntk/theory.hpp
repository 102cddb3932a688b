#pragma once

#include "dntk/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dntk::theory {

/// One-step setting: local quadratic model M(d) = g^T d + (L/2)||d||^2 of an
/// L-smooth loss around the current parameters, restricted to span(basis).
struct TheoryProbe {
  std::vector<Vector> task_gradients;  // the finite task set, each of length P
  double smoothness = 1.0;             // L
  Matrix basis;                        // P x r, orthonormal columns

  Index dim() const { return basis.rows(); }
  /// Throws BadArgument / NonOrthonormalBasis / DimMismatch.
  void validate() const;
};

/// Pi = V V^T.
Matrix projector(const Matrix& basis);

/// M(d) = g^T d + (L/2)||d||^2.
double quadratic_model(const Vector& g, double smoothness, const Vector& step);

/// -(1/L) Pi g.
Vector subspace_minimizer(const Vector& g, double smoothness, const Matrix& basis);

/// Largest M(d*) - M(d* + delta) over `trials` random delta in span(basis) and
/// every task gradient. Non-positive values mean no perturbation improved M.
double quadratic_minimizer_check(const TheoryProbe& probe, Index trials, std::uint64_t seed);

struct DecreaseCheck {
  double decrease = 0.0;  // L(theta) - L(theta + d*)
  double bound = 0.0;     // (||g||^2 - ||(I - Pi) g||^2) / (2L)
  bool holds = false;
};

/// Loss L(theta) = 0.5 theta^T A theta + b^T theta with lambda_max(A) <= L.
DecreaseCheck decrease_bound_check(const Matrix& a, const Vector& b, const Vector& theta, const Matrix& basis,
                                   double smoothness);

/// tr(G) - tr(V^T G V) for orthonormal V.
double subspace_residual(const Matrix& g, const Matrix& basis);

/// min over random r-dimensional subspaces of (their residual - top-r
/// eigenspace residual). Requires 1 <= r < P <= 12.
double pca_optimality_bruteforce(const Matrix& g, Index r, Index trials, std::uint64_t seed);

struct TailCheck {
  double residual = 0.0;  // tr(G) - tr(Pi G)
  double tail = 0.0;      // sum_{j>r} lambda_j
  double gap = 0.0;       // tr(Pi* G) - tr(Pi G)
  bool holds = false;
};

/// Requires gap <= delta (PreconditionFailed otherwise), then checks
/// residual <= tail + delta.
TailCheck near_optimal_tail_check(const Matrix& g, Index r, double delta, const Matrix& proj);

/// (1/T) sum_t g_t g_t^T.
Matrix empirical_covariance(const std::vector<Vector>& samples);

struct ResidualPair {
  double sample_mean = 0.0;  // mean_t ||(I - Pi) g_t||^2
  double trace_form = 0.0;   // tr(G) - tr(Pi G)
};

ResidualPair residual_two_ways(const std::vector<Vector>& samples, const Matrix& proj);

struct CheckRow {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

/// Randomized instances of every check above with their pass thresholds.
std::vector<CheckRow> run_theory_suite(std::uint64_t seed);

}  // namespace dntk::theory
