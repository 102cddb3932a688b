#pragma once

#include "dntk/cluster.hpp"
#include "dntk/numerics.hpp"
#include "dntk/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace dntk::distill {

/// Eigensystem of a cluster's local kernel and its truncation rank r_h.
struct LocalEigen {
  numerics::EigenSystem eig;
  Index rank = 0;
};

enum class Origin { Local, Gap };

struct Provenance {
  Origin origin = Origin::Local;
  int cluster = -1;     // -1 for gap directions
  Index component = 0;  // eigenvector index within the local or global system
};

/// One synthesized gradient/target pair before redundancy filtering.
struct Candidate {
  Matrix phi;         // C x D, row c is the class-c synthetic gradient
  Vector target;      // C
  Vector logits;      // C
  Vector lifted;      // m, the combination vector in sample space
  Provenance provenance;
  double eigenvalue = 0.0;
};

struct CoverageReport {
  Index r_g = 0;
  std::vector<Index> local_ranks;
  Vector coverage;             // c_j for j < r_g
  std::vector<Index> gap_set;  // zero-based indices j with c_j < tau_g
  double tau_v = 0.0;
  double tau_g = 0.0;
  Vector containment;          // variance-weighted local-in-global containment per cluster
  Index candidates = 0;
  Index kept_after_qr = 0;
};

struct DistilledGradients {
  GradientFeatures synthetic;  // s rows; labels = soft targets
  std::vector<Provenance> provenance;
  Matrix lifted_basis;  // m x s
  Vector energies;      // eigenvalue behind each kept gradient

  Index size() const { return synthetic.samples(); }
};

struct DistillOptions {
  int clusters = 10;
  double tau_v = 0.95;
  double tau_g = 0.5;
  double eps_qr = numerics::kDefaultQrTolerance;
  std::uint64_t seed = 0;
  std::optional<Index> budget;        // keep at most this many, highest energy first
  std::optional<ScaleKind> scale;     // defaults to the features' convention
};

struct DistillResult {
  DistilledGradients distilled;
  CoverageReport report;
  cluster::ClusterPartition partition;
};

/// c_j = max_h ||P_h u||^2 / ||u||^2 with u the j-th global eigenvector
/// restricted to cluster h and P_h the projector onto the top r_h local
/// eigenvectors. Clusters where ||u|| < 1e-12 contribute 0.
Vector coverage_coefficients(const Matrix& global_vectors, Index r_g,
                             const std::vector<std::vector<Index>>& index_sets,
                             const std::vector<LocalEigen>& locals);

std::vector<Index> gap_directions(const Vector& coverage, double tau_g);

/// Per cluster: sum_j lambda_j ||Pi_glob u_j||^2 / sum_j lambda_j over the top
/// r_h local eigenpairs, where Pi_glob projects onto span of the first `rank`
/// global eigenvectors restricted to the cluster.
Vector local_containment(const Matrix& global_vectors, Index rank,
                         const std::vector<std::vector<Index>>& index_sets,
                         const std::vector<LocalEigen>& locals);

/// phi_hat = Phi[I_h]^T u for each local eigenvector with eigenvalue above
/// `min_eigenvalue` among the top r_h.
std::vector<Candidate> synthesize_local(const GradientFeatures& features,
                                        const std::vector<std::vector<Index>>& index_sets,
                                        const std::vector<LocalEigen>& locals, double min_eigenvalue = 0.0);

/// phi_hat = Phi^T v_j for every j in the gap set.
std::vector<Candidate> synthesize_gap(const GradientFeatures& features, const numerics::EigenSystem& global,
                                      const std::vector<Index>& gap_set, double min_eigenvalue = 0.0);

LocalEigen local_eigen(const Matrix& local_kernel, double tau_v);

DistillResult distill(const GradientFeatures& features, const DistillOptions& options);

double compression_ratio(Index m, Index s);

}  // namespace dntk::distill
