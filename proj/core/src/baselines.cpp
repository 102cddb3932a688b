#include "dntk/baselines.hpp"

#include "dntk/cluster.hpp"
#include "dntk/error.hpp"
#include "dntk/numerics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

namespace dntk::baselines {
namespace {

void check_budget(Index m, Index s) {
  if (s < 0) throw Error(ErrorCode::BadArgument, "s must be non-negative");
  if (s > m) throw Error(ErrorCode::STooLarge, "cannot select more points than exist");
}

}  // namespace

SelectionResult select_random(Index m, Index s, std::uint64_t seed) {
  check_budget(m, s);
  std::vector<Index> pool(static_cast<std::size_t>(m));
  std::iota(pool.begin(), pool.end(), Index{0});
  std::mt19937_64 rng(seed);
  for (Index i = 0; i < s; ++i) {
    std::uniform_int_distribution<Index> pick(i, m - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(static_cast<std::size_t>(s));
  return {pool, "random", seed};
}

Vector leverage_scores(const Matrix& k, Index r) {
  if (r < 1 || r > k.rows()) throw Error(ErrorCode::RankTooLarge, "leverage rank must lie in [1, n]");
  const numerics::EigenSystem eig = numerics::sym_eig(k);
  // only modes with positive eigenvalues carry leverage
  Index used = 0;
  while (used < r && eig.values[used] > 0.0 && eig.values[used] > 1e-12 * eig.values[0]) ++used;
  if (used == 0) return Vector::Zero(k.rows());
  return eig.vectors.leftCols(used).rowwise().squaredNorm();
}

SelectionResult select_leverage(const Matrix& k, Index s, Index r, std::uint64_t seed) {
  const Index m = k.rows();
  check_budget(m, s);
  Vector weights = leverage_scores(k, r);
  // scores below roundoff are treated as exactly zero
  for (Index i = 0; i < m; ++i)
    if (weights[i] < 1e-14) weights[i] = 0.0;
  if (!(weights.sum() > 0.0)) throw Error(ErrorCode::ZeroScores, "all leverage scores vanish");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<bool> taken(static_cast<std::size_t>(m), false);
  SelectionResult out{{}, "leverage", seed};
  for (Index pick = 0; pick < s; ++pick) {
    double total = 0.0;
    for (Index i = 0; i < m; ++i)
      if (!taken[i]) total += weights[i];
    Index chosen = -1;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      for (Index i = 0; i < m; ++i) {
        if (taken[i] || weights[i] == 0.0) continue;
        acc += weights[i];
        chosen = i;
        if (acc >= target) break;
      }
    } else {
      std::vector<Index> rest;
      for (Index i = 0; i < m; ++i)
        if (!taken[i]) rest.push_back(i);
      std::uniform_int_distribution<std::size_t> any(0, rest.size() - 1);
      chosen = rest[any(rng)];
    }
    taken[chosen] = true;
    out.indices.push_back(chosen);
  }
  return out;
}

SelectionResult select_fps(const Matrix& rows, Index s, std::uint64_t seed) {
  const Index m = rows.rows();
  check_budget(m, s);
  SelectionResult out{{}, "fps", seed};
  if (s == 0) return out;
  const Vector norms = rows.rowwise().squaredNorm();
  Index first = 0;
  for (Index i = 1; i < m; ++i)
    if (norms[i] > norms[first]) first = i;
  out.indices.push_back(first);

  Vector min_dist = (rows.rowwise() - rows.row(first)).rowwise().squaredNorm();
  std::vector<bool> taken(static_cast<std::size_t>(m), false);
  taken[first] = true;
  while (static_cast<Index>(out.indices.size()) < s) {
    Index best = -1;
    for (Index i = 0; i < m; ++i) {
      if (taken[i]) continue;
      if (best < 0 || min_dist[i] > min_dist[best]) best = i;
    }
    taken[best] = true;
    out.indices.push_back(best);
    min_dist = min_dist.cwiseMin((rows.rowwise() - rows.row(best)).rowwise().squaredNorm());
  }
  return out;
}

SelectionResult select_kmeans(const Matrix& rows, Index s, std::uint64_t seed, int restarts) {
  const Index m = rows.rows();
  check_budget(m, s);
  SelectionResult out{{}, "kmeans", seed};
  if (s == 0) return out;
  const cluster::KMeansResult km = cluster::kmeans(rows, static_cast<int>(s), {restarts, 100, seed});
  std::vector<bool> taken(static_cast<std::size_t>(m), false);
  for (Index c = 0; c < s; ++c) {
    const Vector dist = (rows.rowwise() - km.centroids.row(c)).rowwise().squaredNorm();
    Index best = -1;
    for (Index i = 0; i < m; ++i) {
      if (taken[i]) continue;
      if (best < 0 || dist[i] < dist[best]) best = i;
    }
    taken[best] = true;
    out.indices.push_back(best);
  }
  return out;
}

}  // namespace dntk::baselines
