#pragma once

#include "dntk/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dntk::baselines {

struct SelectionResult {
  std::vector<Index> indices;
  std::string method;
  std::uint64_t seed = 0;
};

/// Uniform sample of s out of m without replacement.
SelectionResult select_random(Index m, Index s, std::uint64_t seed);

/// l_i = ||U_r[i,:]||^2 from the top-r eigenvectors of K, skipping modes with
/// non-positive eigenvalues.
Vector leverage_scores(const Matrix& k, Index r);

/// Sequential sampling without replacement with probability proportional to
/// the rank-r leverage scores. Once positive scores run out, remaining picks
/// are uniform over the zero-score rows.
SelectionResult select_leverage(const Matrix& k, Index s, Index r, std::uint64_t seed);

/// Greedy farthest-point sampling on rows, starting from the max-norm row;
/// ties go to the lowest index. The seed is recorded but does not affect the
/// result.
SelectionResult select_fps(const Matrix& rows, Index s, std::uint64_t seed);

/// k-means with s centroids; each centroid (in order) takes its nearest row
/// not already taken.
SelectionResult select_kmeans(const Matrix& rows, Index s, std::uint64_t seed, int restarts = 3);

}  // namespace dntk::baselines
