#pragma once

#include <mixlit/realfield/certified_real.hpp>

#include <cstdint>

namespace mixlit {

/// Identifier of the seed derivation, recorded in run manifests.
inline constexpr const char* kSeedAlgorithm = "splitmix64-tree-v1";

/// Seed of real `component` in sample `sample`. Two levels of SplitMix64
/// streams: sample keys from the master seed, component seeds from the
/// sample key. Each seed depends only on its own indices.
inline std::uint64_t sample_seed(std::uint64_t master, std::uint64_t sample, std::uint64_t component) {
    return detail::random_block(detail::random_block(master, sample), component);
}

} // namespace mixlit
