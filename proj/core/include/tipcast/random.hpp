#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace tipcast {

using Rng = std::mt19937_64;

/// Builds an engine from a base seed and an optional stream path, e.g.
/// make_rng(seed, {system_index, branch_index}). Distinct paths give
/// statistically independent engines; identical paths give identical ones.
Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream = {});

/// Inverse-CDF draw from the triangular distribution on [lo, hi] with mode `mode`.
double sample_triangular(Rng& rng, double lo, double mode, double hi);

/// Uniform integer on the closed range [lo, hi].
std::uint64_t uniform_integer(Rng& rng, std::uint64_t lo, std::uint64_t hi);

double uniform_real(Rng& rng, double lo, double hi);

}  // namespace tipcast
