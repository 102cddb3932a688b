#include "dntk/theory.hpp"

#include "dntk/error.hpp"
#include "dntk/numerics.hpp"
#include "dntk/seed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace dntk::theory {
namespace {

Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

Matrix random_orthonormal(Index p, Index r, std::mt19937_64& rng) {
  Eigen::HouseholderQR<Matrix> qr(gaussian(p, r, rng));
  return qr.householderQ() * Matrix::Identity(p, r);
}

void require_orthonormal(const Matrix& basis) {
  if (basis.cols() == 0) return;
  const Matrix gram = basis.transpose() * basis;
  if ((gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() > 1e-8)
    throw Error(ErrorCode::NonOrthonormalBasis, "basis columns are not orthonormal");
}

double tail_sum(const Vector& values, Index r) {
  double tail = 0.0;
  for (Index j = r; j < values.size(); ++j) tail += values[j];
  return tail;
}

CheckRow row(std::string name, double value, double threshold, bool passed) {
  return CheckRow{std::move(name), value, threshold, passed};
}

Matrix random_psd(Index p, std::mt19937_64& rng) {
  const Matrix a = gaussian(p, p, rng);
  return a * a.transpose() / static_cast<double>(p);
}

}  // namespace

void TheoryProbe::validate() const {
  if (!(smoothness > 0.0) || !std::isfinite(smoothness)) throw Error(ErrorCode::BadArgument, "smoothness must be positive");
  require_orthonormal(basis);
  for (const Vector& g : task_gradients)
    if (g.size() != basis.rows()) throw Error(ErrorCode::DimMismatch, "task gradient length must equal P");
}

Matrix projector(const Matrix& basis) { return basis * basis.transpose(); }

double quadratic_model(const Vector& g, double smoothness, const Vector& step) {
  return g.dot(step) + 0.5 * smoothness * step.squaredNorm();
}

Vector subspace_minimizer(const Vector& g, double smoothness, const Matrix& basis) {
  return -(basis * (basis.transpose() * g)) / smoothness;
}

double quadratic_minimizer_check(const TheoryProbe& probe, Index trials, std::uint64_t seed) {
  probe.validate();
  if (trials < 1) throw Error(ErrorCode::BadArgument, "trials must be at least 1");
  std::mt19937_64 rng(derive_seed(seed, "theory-minimizer", 0));
  std::normal_distribution<double> normal(0.0, 1.0);
  const Index r = probe.basis.cols();
  double worst = -std::numeric_limits<double>::infinity();
  for (const Vector& g : probe.task_gradients) {
    const Vector best = subspace_minimizer(g, probe.smoothness, probe.basis);
    const double at_best = quadratic_model(g, probe.smoothness, best);
    const double scale = std::max(best.norm(), 1e-3);
    for (Index t = 0; t < trials; ++t) {
      Vector coeff(r);
      for (Index i = 0; i < r; ++i) coeff[i] = normal(rng);
      // spread perturbation sizes over several orders of magnitude
      const double size = scale * std::pow(10.0, -3.0 + 4.0 * static_cast<double>(t % 8) / 7.0);
      const Vector delta = r == 0 ? Vector::Zero(probe.dim()) : Vector(probe.basis * coeff * (size / std::max(coeff.norm(), 1e-300)));
      worst = std::max(worst, at_best - quadratic_model(g, probe.smoothness, best + delta));
    }
  }
  return worst;
}

DecreaseCheck decrease_bound_check(const Matrix& a, const Vector& b, const Vector& theta, const Matrix& basis,
                                   double smoothness) {
  if (a.rows() != a.cols() || a.rows() != b.size() || a.rows() != theta.size() || basis.rows() != a.rows())
    throw Error(ErrorCode::DimMismatch, "quadratic dimensions disagree");
  if (!(smoothness > 0.0)) throw Error(ErrorCode::BadArgument, "smoothness must be positive");
  require_orthonormal(basis);
  const numerics::EigenSystem eig = numerics::sym_eig(a);
  if (eig.size() > 0 && eig.values[0] > smoothness * (1.0 + 1e-12))
    throw Error(ErrorCode::NotSmooth, "lambda_max(A) exceeds L");
  auto loss = [&](const Vector& t) { return 0.5 * t.dot(a * t) + b.dot(t); };
  const Vector g = a * theta + b;
  const Vector step = subspace_minimizer(g, smoothness, basis);
  const Vector outside = g - basis * (basis.transpose() * g);
  DecreaseCheck out;
  out.decrease = loss(theta) - loss(theta + step);
  out.bound = (g.squaredNorm() - outside.squaredNorm()) / (2.0 * smoothness);
  out.holds = out.decrease >= out.bound - 1e-10;
  return out;
}

double subspace_residual(const Matrix& g, const Matrix& basis) {
  return g.trace() - (basis.transpose() * g * basis).trace();
}

double pca_optimality_bruteforce(const Matrix& g, Index r, Index trials, std::uint64_t seed) {
  const Index p = g.rows();
  if (r < 1 || r >= p || p > 12) throw Error(ErrorCode::BadArgument, "requires 1 <= r < P <= 12");
  if (trials < 1) throw Error(ErrorCode::BadArgument, "trials must be at least 1");
  const numerics::EigenSystem eig = numerics::sym_eig(g);
  const double best = subspace_residual(g, eig.vectors.leftCols(r));
  std::mt19937_64 rng(derive_seed(seed, "theory-pca", 0));
  double margin = std::numeric_limits<double>::infinity();
  for (Index t = 0; t < trials; ++t) margin = std::min(margin, subspace_residual(g, random_orthonormal(p, r, rng)) - best);
  return margin;
}

TailCheck near_optimal_tail_check(const Matrix& g, Index r, double delta, const Matrix& proj) {
  if (proj.rows() != g.rows() || proj.cols() != g.cols()) throw Error(ErrorCode::DimMismatch, "projector must be P x P");
  if (r < 1 || r > g.rows()) throw Error(ErrorCode::BadArgument, "rank out of range");
  const numerics::EigenSystem eig = numerics::sym_eig(g);
  TailCheck out;
  out.tail = tail_sum(eig.values, r);
  const double best = (eig.vectors.leftCols(r).transpose() * g * eig.vectors.leftCols(r)).trace();
  const double captured = (proj * g).trace();
  out.gap = best - captured;
  const double slack = 1e-10 * std::max(1.0, std::abs(g.trace()));
  if (out.gap > delta + slack) throw Error(ErrorCode::PreconditionFailed, "captured-energy gap exceeds delta");
  out.residual = g.trace() - captured;
  out.holds = out.residual <= out.tail + delta + 1e-10;
  return out;
}

Matrix empirical_covariance(const std::vector<Vector>& samples) {
  if (samples.empty()) throw Error(ErrorCode::EmptyInput, "no samples");
  const Index p = samples.front().size();
  Matrix g = Matrix::Zero(p, p);
  for (const Vector& s : samples) {
    if (s.size() != p) throw Error(ErrorCode::DimMismatch, "samples differ in length");
    g.selfadjointView<Eigen::Lower>().rankUpdate(s);
  }
  g = g.selfadjointView<Eigen::Lower>();
  return g / static_cast<double>(samples.size());
}

ResidualPair residual_two_ways(const std::vector<Vector>& samples, const Matrix& proj) {
  const Matrix g = empirical_covariance(samples);
  if (proj.rows() != g.rows() || proj.cols() != g.cols()) throw Error(ErrorCode::DimMismatch, "projector must be P x P");
  ResidualPair out;
  for (const Vector& s : samples) out.sample_mean += (s - proj * s).squaredNorm();
  out.sample_mean /= static_cast<double>(samples.size());
  out.trace_form = g.trace() - (proj * g).trace();
  return out;
}

std::vector<CheckRow> run_theory_suite(std::uint64_t seed) {
  std::vector<CheckRow> rows;
  std::mt19937_64 rng(derive_seed(seed, "theory-suite", 0));

  {
    TheoryProbe probe;
    const Index p = 20;
    probe.smoothness = 2.5;
    probe.basis = random_orthonormal(p, 6, rng);
    for (int t = 0; t < 5; ++t) probe.task_gradients.push_back(gaussian(p, 1, rng).col(0));
    const double violation = quadratic_minimizer_check(probe, 1000, derive_seed(seed, "theory-suite", 1));
    rows.push_back(row("minimizer_violation", violation, 1e-12, violation <= 1e-12));
  }

  {
    double worst = std::numeric_limits<double>::infinity();
    for (int t = 0; t < 100; ++t) {
      const Index p = 8 + t % 5;
      const double l = 1.0 + static_cast<double>(t % 3);
      Matrix a = random_psd(p, rng);
      const double top = numerics::sym_eig(a).values[0];
      a *= l / top * 0.9;
      const Vector b = gaussian(p, 1, rng).col(0);
      const Vector theta = gaussian(p, 1, rng).col(0);
      const DecreaseCheck check = decrease_bound_check(a, b, theta, random_orthonormal(p, 3, rng), l);
      worst = std::min(worst, check.decrease - check.bound);
    }
    rows.push_back(row("decrease_bound_slack", worst, -1e-10, worst >= -1e-10));
  }

  {
    const Index p = 10;
    const double l = 3.0;
    const Matrix a = l * Matrix::Identity(p, p);
    const Vector b = gaussian(p, 1, rng).col(0);
    const Vector theta = gaussian(p, 1, rng).col(0);
    const DecreaseCheck check = decrease_bound_check(a, b, theta, random_orthonormal(p, 4, rng), l);
    const double gap = std::abs(check.decrease - check.bound) / std::max(1.0, std::abs(check.bound));
    rows.push_back(row("decrease_bound_tight_isotropic", gap, 1e-10, gap <= 1e-10));
  }

  {
    double margin = std::numeric_limits<double>::infinity();
    for (int t = 0; t < 4; ++t) {
      const Index p = 9 + t;
      const Matrix g = random_psd(p, rng);
      margin = std::min(margin, pca_optimality_bruteforce(g, 1 + t, 10000, derive_seed(seed, "theory-suite", 10 + t)));
    }
    rows.push_back(row("pca_margin", margin, -1e-10, margin >= -1e-10));
  }

  {
    const Index p = 12;
    const Index r = 4;
    const Matrix g = random_psd(p, rng);
    const numerics::EigenSystem eig = numerics::sym_eig(g);
    Matrix rotation = Matrix::Identity(p, p);
    const double angle = 0.05;
    rotation(0, 0) = std::cos(angle);
    rotation(r, r) = std::cos(angle);
    rotation(0, r) = -std::sin(angle);
    rotation(r, 0) = std::sin(angle);
    const Matrix v = eig.vectors * rotation.leftCols(r);
    const Matrix proj = projector(v);
    const double delta = (eig.vectors.leftCols(r).transpose() * g * eig.vectors.leftCols(r)).trace() - (proj * g).trace();
    const TailCheck check = near_optimal_tail_check(g, r, delta, proj);
    const double slack = check.tail + delta - check.residual;
    rows.push_back(row("near_optimal_tail_slack", slack, -1e-10, check.holds));
  }

  {
    const Index p = 12;
    std::vector<Vector> samples;
    for (int t = 0; t < 200; ++t) samples.push_back(gaussian(p, 1, rng).col(0));
    const ResidualPair pair = residual_two_ways(samples, projector(random_orthonormal(p, 4, rng)));
    const double diff = std::abs(pair.sample_mean - pair.trace_form);
    rows.push_back(row("residual_two_ways", diff, 1e-10, diff <= 1e-10));
  }
  return rows;
}

}  // namespace dntk::theory
