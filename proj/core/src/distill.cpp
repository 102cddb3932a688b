#include "dntk/distill.hpp"

#include "dntk/error.hpp"
#include "dntk/kernel.hpp"
#include "dntk/seed.hpp"

#include <algorithm>
#include <numeric>

namespace dntk::distill {
namespace {

constexpr double kDegenerateFraction = 1e-12;

Vector gather(const Eigen::Ref<const Vector>& v, const std::vector<Index>& idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (std::size_t a = 0; a < idx.size(); ++a) out[static_cast<Index>(a)] = v[idx[a]];
  return out;
}

void check_alignment(const std::vector<std::vector<Index>>& index_sets, const std::vector<LocalEigen>& locals) {
  if (index_sets.size() != locals.size())
    throw Error(ErrorCode::LengthMismatch, "one local eigensystem per cluster is required");
  for (std::size_t h = 0; h < locals.size(); ++h) {
    if (locals[h].eig.size() != static_cast<Index>(index_sets[h].size()))
      throw Error(ErrorCode::DimMismatch, "local eigensystem does not match its cluster");
  }
}

// Combines rows of every class block (and the targets) with weights u over `rows`.
Candidate combine(const GradientFeatures& f, const std::vector<Index>& rows, const Vector& u) {
  Candidate cand;
  const Index classes = f.classes();
  cand.phi.resize(classes, f.width());
  cand.phi.setZero();
  cand.target = Vector::Zero(classes);
  cand.logits = Vector::Zero(classes);
  for (std::size_t a = 0; a < rows.size(); ++a) {
    const double w = u[static_cast<Index>(a)];
    const Index i = rows[a];
    for (Index c = 0; c < classes; ++c) cand.phi.row(c) += w * f.per_class[c].row(i);
    cand.target += w * f.labels.row(i).transpose();
    cand.logits += w * f.model_logits.row(i).transpose();
  }
  return cand;
}

}  // namespace

LocalEigen local_eigen(const Matrix& local_kernel, double tau_v) {
  LocalEigen le;
  le.eig = numerics::sym_eig(local_kernel);
  const double trace = le.eig.values.cwiseMax(0.0).sum();
  le.rank = trace > 0.0 ? kernel::rank_for_fraction(le.eig.values, tau_v) : 0;
  return le;
}

Vector coverage_coefficients(const Matrix& global_vectors, Index r_g,
                             const std::vector<std::vector<Index>>& index_sets,
                             const std::vector<LocalEigen>& locals) {
  check_alignment(index_sets, locals);
  if (r_g < 0 || r_g > global_vectors.cols()) throw Error(ErrorCode::RankTooLarge, "r_g exceeds the global basis");
  for (const auto& le : locals)
    if (le.rank < 1) throw Error(ErrorCode::RankZeroCluster, "a cluster has truncation rank zero");

  Vector c = Vector::Zero(r_g);
  for (Index j = 0; j < r_g; ++j) {
    for (std::size_t h = 0; h < locals.size(); ++h) {
      const Vector u = gather(global_vectors.col(j), index_sets[h]);
      const double norm_sq = u.squaredNorm();
      if (norm_sq < 1e-24) continue;
      const auto top = locals[h].eig.vectors.leftCols(locals[h].rank);
      const double captured = (top.transpose() * u).squaredNorm();
      c[j] = std::max(c[j], captured / norm_sq);
    }
  }
  return c;
}

std::vector<Index> gap_directions(const Vector& coverage, double tau_g) {
  std::vector<Index> gaps;
  for (Index j = 0; j < coverage.size(); ++j)
    if (coverage[j] < tau_g) gaps.push_back(j);
  return gaps;
}

Vector local_containment(const Matrix& global_vectors, Index rank,
                         const std::vector<std::vector<Index>>& index_sets,
                         const std::vector<LocalEigen>& locals) {
  check_alignment(index_sets, locals);
  rank = std::min(rank, global_vectors.cols());
  Vector out = Vector::Zero(static_cast<Index>(locals.size()));
  for (std::size_t h = 0; h < locals.size(); ++h) {
    const auto& idx = index_sets[h];
    Matrix restricted(static_cast<Index>(idx.size()), rank);
    for (Index j = 0; j < rank; ++j) restricted.col(j) = gather(global_vectors.col(j), idx);
    const Matrix basis = numerics::orthonormal_basis(restricted, 1e-10);
    double num = 0.0, den = 0.0;
    for (Index j = 0; j < locals[h].rank; ++j) {
      const double lam = std::max(0.0, locals[h].eig.values[j]);
      const Vector u = locals[h].eig.vectors.col(j);
      const double inside = basis.cols() > 0 ? (basis.transpose() * u).squaredNorm() : 0.0;
      num += lam * inside;
      den += lam;
    }
    out[static_cast<Index>(h)] = den > 0.0 ? num / den : 1.0;
  }
  return out;
}

std::vector<Candidate> synthesize_local(const GradientFeatures& features,
                                        const std::vector<std::vector<Index>>& index_sets,
                                        const std::vector<LocalEigen>& locals, double min_eigenvalue) {
  check_alignment(index_sets, locals);
  const Index m = features.samples();
  std::vector<Candidate> out;
  for (std::size_t h = 0; h < locals.size(); ++h) {
    for (Index j = 0; j < locals[h].rank; ++j) {
      const double lam = locals[h].eig.values[j];
      if (!(lam > min_eigenvalue)) continue;
      Vector u = locals[h].eig.vectors.col(j);
      u.normalize();
      Candidate cand = combine(features, index_sets[h], u);
      cand.lifted = Vector::Zero(m);
      for (std::size_t a = 0; a < index_sets[h].size(); ++a) cand.lifted[index_sets[h][a]] = u[static_cast<Index>(a)];
      cand.provenance = {Origin::Local, static_cast<int>(h), j};
      cand.eigenvalue = lam;
      out.push_back(std::move(cand));
    }
  }
  return out;
}

std::vector<Candidate> synthesize_gap(const GradientFeatures& features, const numerics::EigenSystem& global,
                                      const std::vector<Index>& gap_set, double min_eigenvalue) {
  std::vector<Index> all(static_cast<std::size_t>(features.samples()));
  std::iota(all.begin(), all.end(), Index{0});
  std::vector<Candidate> out;
  for (Index j : gap_set) {
    if (j < 0 || j >= global.size()) throw Error(ErrorCode::IndexOutOfRange, "gap index");
    const double lam = global.values[j];
    if (!(lam > min_eigenvalue)) continue;
    Vector v = global.vectors.col(j);
    v.normalize();
    Candidate cand = combine(features, all, v);
    cand.lifted = v;
    cand.provenance = {Origin::Gap, -1, j};
    cand.eigenvalue = lam;
    out.push_back(std::move(cand));
  }
  return out;
}

DistillResult distill(const GradientFeatures& features, const DistillOptions& options) {
  features.validate();
  const Index m = features.samples();
  if (options.clusters < 1 || options.clusters > m) throw Error(ErrorCode::HTooLarge, "need 1 <= H <= m");
  if (!(options.tau_v > 0.0 && options.tau_v <= 1.0)) throw Error(ErrorCode::BadArgument, "tau_v must lie in (0,1]");
  if (!(options.tau_g >= 0.0)) throw Error(ErrorCode::BadArgument, "tau_g must be >= 0");
  if (options.budget && *options.budget < 1) throw Error(ErrorCode::BadArgument, "budget must be positive");

  const ScaleKind scale = options.scale.value_or(default_scale(features.dim_kind));

  // 1. class-averaged kernel and clustering
  const Matrix kbar = kernel::average_kernel(kernel::build_stack(features, scale));
  DistillResult result;
  result.partition = cluster::spectral_cluster(kbar, options.clusters, derive_seed(options.seed, "distill-cluster"));

  // 2. global eigensystem
  const numerics::EigenSystem global = numerics::sym_eig(kbar);
  const double trace = global.values.cwiseMax(0.0).sum();
  if (!(trace > 0.0)) throw Error(ErrorCode::ZeroTrace, "class-averaged kernel has zero trace");
  const double floor = kDegenerateFraction * trace;

  CoverageReport& report = result.report;
  report.tau_v = options.tau_v;
  report.tau_g = options.tau_g;
  report.r_g = kernel::rank_for_fraction(global.values, options.tau_v);

  // 3. local eigensystems and coverage; clusters without energy carry no span
  std::vector<std::vector<Index>> active_sets;
  std::vector<LocalEigen> active;
  for (const auto& idx : result.partition.index_sets) {
    LocalEigen le = local_eigen(cluster::restrict_kernel(kbar, idx), options.tau_v);
    if (le.eig.values.cwiseMax(0.0).sum() <= floor) le.rank = 0;
    report.local_ranks.push_back(le.rank);
    if (le.rank > 0) {
      active_sets.push_back(idx);
      active.push_back(std::move(le));
    }
  }
  report.coverage = coverage_coefficients(global.vectors, report.r_g, active_sets, active);
  report.gap_set = gap_directions(report.coverage, options.tau_g);
  report.containment = local_containment(global.vectors, report.r_g, active_sets, active);

  // 4-5. synthesis
  std::vector<Candidate> candidates = synthesize_local(features, active_sets, active, floor);
  for (auto& g : synthesize_gap(features, global, report.gap_set, floor)) candidates.push_back(std::move(g));
  report.candidates = static_cast<Index>(candidates.size());
  if (candidates.empty()) throw Error(ErrorCode::ZeroTrace, "no synthesizable directions");

  // 6. redundancy filter on the lifted combination vectors
  Matrix lifted(m, static_cast<Index>(candidates.size()));
  for (std::size_t i = 0; i < candidates.size(); ++i) lifted.col(static_cast<Index>(i)) = candidates[i].lifted;
  std::vector<Index> kept = numerics::qr_redundancy_filter(lifted, options.eps_qr);
  report.kept_after_qr = static_cast<Index>(kept.size());

  if (options.budget && static_cast<Index>(kept.size()) > *options.budget) {
    std::stable_sort(kept.begin(), kept.end(),
                     [&](Index a, Index b) { return candidates[a].eigenvalue > candidates[b].eigenvalue; });
    kept.resize(static_cast<std::size_t>(*options.budget));
    std::sort(kept.begin(), kept.end());
  }

  const auto s = static_cast<Index>(kept.size());
  const Index classes = features.classes();
  DistilledGradients& out = result.distilled;
  out.synthetic.dim_kind = features.dim_kind;
  out.synthetic.per_class.assign(static_cast<std::size_t>(classes), Matrix(s, features.width()));
  out.synthetic.labels.resize(s, classes);
  out.synthetic.model_logits.resize(s, classes);
  out.lifted_basis.resize(m, s);
  out.energies.resize(s);
  for (Index r = 0; r < s; ++r) {
    const Candidate& cand = candidates[kept[r]];
    for (Index c = 0; c < classes; ++c) out.synthetic.per_class[c].row(r) = cand.phi.row(c);
    out.synthetic.labels.row(r) = cand.target.transpose();
    out.synthetic.model_logits.row(r) = cand.logits.transpose();
    out.lifted_basis.col(r) = cand.lifted;
    out.energies[r] = cand.eigenvalue;
    out.provenance.push_back(cand.provenance);
  }
  return result;
}

double compression_ratio(Index m, Index s) {
  if (s < 1) throw Error(ErrorCode::BadArgument, "s must be positive");
  return static_cast<double>(m) / static_cast<double>(s);
}

}  // namespace dntk::distill
