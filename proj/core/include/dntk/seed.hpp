#pragma once

#include <cstdint>
#include <string_view>

namespace dntk {

/// Derives an independent seed for a (stage, cell) pair from a global seed.
/// Pure function: the same triple always yields the same value, so work can
/// be scheduled in any order without changing results.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stage, std::uint64_t cell = 0);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace dntk
