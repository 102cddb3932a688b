#pragma once

#include "dntk/types.hpp"

#include <cstdint>
#include <vector>

namespace dntk::cluster {

struct ClusterPartition {
  std::vector<int> assignments;            // length n, values in [0, H)
  std::vector<std::vector<Index>> index_sets;  // H sorted, disjoint, non-empty
  int cluster_count = 0;

  Index size() const { return static_cast<Index>(assignments.size()); }
};

/// Builds index sets from assignments, relabelling clusters in order of their
/// lowest member so that equal partitions compare equal.
ClusterPartition make_partition(const std::vector<int>& assignments, int cluster_count);

struct KMeansOptions {
  int restarts = 20;
  int iterations = 100;
  std::uint64_t seed = 0;
};

struct KMeansResult {
  std::vector<int> assignments;
  Matrix centroids;  // k x d
  double inertia = 0.0;
};

/// Lloyd's algorithm with k-means++ seeding. Ties go to the lowest centroid
/// index; empty clusters take the member of the largest cluster farthest from
/// its centroid. Across restarts the lowest inertia wins (earliest on ties).
KMeansResult kmeans(const Matrix& points, int k, const KMeansOptions& options);

/// Affinity max(K, 0), symmetric normalized Laplacian, bottom-H eigenvectors,
/// row normalization, then k-means. Zero-degree rows become singleton clusters.
ClusterPartition spectral_cluster(const Matrix& kbar, int h, std::uint64_t seed);

/// K[I, I] for a sorted index set I.
Matrix restrict_kernel(const Matrix& k, const std::vector<Index>& indices);

}  // namespace dntk::cluster
