#include "dntk/cluster.hpp"

#include "dntk/error.hpp"
#include "dntk/numerics.hpp"
#include "dntk/seed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace dntk::cluster {
namespace {

// Squared distances from each point to each centroid (n x k).
Matrix squared_distances(const Matrix& points, const Matrix& centroids) {
  const Vector pn = points.rowwise().squaredNorm();
  const Vector cn = centroids.rowwise().squaredNorm();
  Matrix d = -2.0 * points * centroids.transpose();
  d.colwise() += pn;
  d.rowwise() += cn.transpose();
  return d.cwiseMax(0.0);
}

Matrix plus_plus_init(const Matrix& points, int k, std::mt19937_64& rng) {
  const Index n = points.rows();
  Matrix centroids(k, points.cols());
  std::uniform_int_distribution<Index> first(0, n - 1);
  centroids.row(0) = points.row(first(rng));
  Vector closest = (points.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 1; c < k; ++c) {
    const double total = closest.sum();
    Index pick = 0;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      pick = n - 1;
      for (Index i = 0; i < n; ++i) {
        acc += closest[i];
        if (acc >= target && closest[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = first(rng);
    }
    centroids.row(c) = points.row(pick);
    closest = closest.cwiseMin((points.rowwise() - centroids.row(c)).rowwise().squaredNorm());
  }
  return centroids;
}

KMeansResult lloyd(const Matrix& points, int k, int iterations, std::mt19937_64& rng) {
  const Index n = points.rows();
  KMeansResult res;
  res.centroids = plus_plus_init(points, k, rng);
  res.assignments.assign(static_cast<std::size_t>(n), -1);

  for (int it = 0; it <= iterations; ++it) {
    const Matrix dist = squared_distances(points, res.centroids);
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      int best = 0;
      for (int c = 1; c < k; ++c)
        if (dist(i, c) < dist(i, best)) best = c;
      if (res.assignments[i] != best) {
        res.assignments[i] = best;
        changed = true;
      }
    }

    // repair empty clusters
    for (;;) {
      std::vector<Index> counts(static_cast<std::size_t>(k), 0);
      for (int a : res.assignments) ++counts[a];
      const auto empty = std::find(counts.begin(), counts.end(), Index{0});
      if (empty == counts.end()) break;
      const int largest = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
      if (counts[largest] < 2) break;
      Index far = -1;
      double far_d = -1.0;
      for (Index i = 0; i < n; ++i)
        if (res.assignments[i] == largest && dist(i, largest) > far_d) {
          far_d = dist(i, largest);
          far = i;
        }
      const int target = static_cast<int>(empty - counts.begin());
      res.assignments[far] = target;
      res.centroids.row(target) = points.row(far);
      changed = true;
    }

    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      sums.row(res.assignments[i]) += points.row(i);
      ++counts[res.assignments[i]];
    }
    for (int c = 0; c < k; ++c)
      if (counts[c] > 0) res.centroids.row(c) = sums.row(c) / static_cast<double>(counts[c]);
    if (!changed && it > 0) break;
  }

  res.inertia = 0.0;
  for (Index i = 0; i < n; ++i)
    res.inertia += (points.row(i) - res.centroids.row(res.assignments[i])).squaredNorm();
  return res;
}

}  // namespace

ClusterPartition make_partition(const std::vector<int>& assignments, int cluster_count) {
  ClusterPartition p;
  p.cluster_count = cluster_count;
  std::vector<int> relabel(static_cast<std::size_t>(cluster_count), -1);
  int next = 0;
  p.assignments.resize(assignments.size());
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    const int a = assignments[i];
    if (a < 0 || a >= cluster_count) throw Error(ErrorCode::IndexOutOfRange, "cluster label");
    if (relabel[a] < 0) relabel[a] = next++;
    p.assignments[i] = relabel[a];
  }
  p.cluster_count = next;
  p.index_sets.assign(static_cast<std::size_t>(next), {});
  for (std::size_t i = 0; i < p.assignments.size(); ++i)
    p.index_sets[p.assignments[i]].push_back(static_cast<Index>(i));
  return p;
}

KMeansResult kmeans(const Matrix& points, int k, const KMeansOptions& options) {
  if (k < 1) throw Error(ErrorCode::BadArgument, "k must be positive");
  if (k > points.rows()) throw Error(ErrorCode::HTooLarge, "more clusters than points");
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  const int restarts = std::max(1, options.restarts);
  for (int r = 0; r < restarts; ++r) {
    std::mt19937_64 rng(derive_seed(options.seed, "kmeans-restart", static_cast<std::uint64_t>(r)));
    KMeansResult res = lloyd(points, k, options.iterations, rng);
    if (res.inertia < best.inertia) best = std::move(res);
  }
  return best;
}

ClusterPartition spectral_cluster(const Matrix& kbar, int h, std::uint64_t seed) {
  if (kbar.rows() != kbar.cols()) throw Error(ErrorCode::NotSquare, "affinity must be square");
  const Index n = kbar.rows();
  if (h < 1) throw Error(ErrorCode::BadArgument, "H must be positive");
  if (h > n) throw Error(ErrorCode::HTooLarge, "H exceeds the number of samples");
  if (h == 1) return make_partition(std::vector<int>(static_cast<std::size_t>(n), 0), 1);

  const Matrix affinity = (0.5 * (kbar + kbar.transpose())).cwiseMax(0.0);
  const Vector degree = affinity.rowwise().sum();

  std::vector<Index> isolated, connected;
  for (Index i = 0; i < n; ++i) (degree[i] > 0.0 ? connected : isolated).push_back(i);
  const auto iso = static_cast<int>(isolated.size());
  if (iso > h || (iso == h && !connected.empty()))
    throw Error(ErrorCode::DisconnectedDegenerate, "more zero-degree samples than clusters");

  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  for (int j = 0; j < iso; ++j) labels[isolated[j]] = j;
  const int remaining = h - iso;
  if (connected.empty()) return make_partition(labels, h);

  const auto m = static_cast<Index>(connected.size());
  if (remaining == 1) {
    for (Index i : connected) labels[i] = iso;
    return make_partition(labels, h);
  }
  if (remaining > m) throw Error(ErrorCode::HTooLarge, "H exceeds the number of connected samples");

  // bottom eigenvectors of I - D^-1/2 A D^-1/2 = top eigenvectors of D^-1/2 A D^-1/2
  Vector inv_sqrt(m);
  for (Index a = 0; a < m; ++a) inv_sqrt[a] = 1.0 / std::sqrt(degree[connected[a]]);
  Matrix normalized(m, m);
  for (Index a = 0; a < m; ++a)
    for (Index b = 0; b < m; ++b)
      normalized(a, b) = inv_sqrt[a] * affinity(connected[a], connected[b]) * inv_sqrt[b];
  const numerics::EigenSystem eig = numerics::sym_eig(normalized);

  Matrix embedding = eig.vectors.leftCols(remaining);
  for (Index a = 0; a < m; ++a) {
    const double norm = embedding.row(a).norm();
    if (norm > 0.0) embedding.row(a) /= norm;
  }
  const KMeansResult km = kmeans(embedding, remaining, {20, 100, derive_seed(seed, "spectral-kmeans")});
  for (Index a = 0; a < m; ++a) labels[connected[a]] = iso + km.assignments[a];
  return make_partition(labels, h);
}

Matrix restrict_kernel(const Matrix& k, const std::vector<Index>& indices) {
  const auto m = static_cast<Index>(indices.size());
  for (Index i : indices)
    if (i < 0 || i >= k.rows()) throw Error(ErrorCode::IndexOutOfRange, "restrict_kernel index");
  Matrix out(m, m);
  for (Index a = 0; a < m; ++a)
    for (Index b = 0; b < m; ++b) out(a, b) = k(indices[a], indices[b]);
  return out;
}

}  // namespace dntk::cluster
