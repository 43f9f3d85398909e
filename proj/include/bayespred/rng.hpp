#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>

namespace bayespred {

using Engine = std::mt19937_64;

/// Replicates are processed in fixed-size blocks. Each block owns an engine
/// seeded from (seed, stream, block), so the draws a replicate sees depend
/// only on its index, never on how blocks are spread over workers.
inline constexpr std::size_t block_size = 256;

/// Named substreams keep unrelated consumers of one root seed apart.
enum class Stream : std::uint64_t {
    cumulants = 1,
    risk = 2,
    family_sample = 3,
};

Engine make_engine(std::uint64_t seed, Stream stream, std::uint64_t block);

std::size_t block_count(std::size_t reps);

/// 0 means "use the hardware concurrency".
unsigned resolve_threads(unsigned requested);

/// Runs body(block) for every block in [0, blocks). Blocks are handed out
/// dynamically; body must only write state owned by its block.
void for_each_block(std::size_t blocks, unsigned threads,
                    const std::function<void(std::size_t)>& body);

/// Pairwise (cascade) summation; fixed association order for a given length.
double pairwise_sum(std::span<const double> values);

}  // namespace bayespred
