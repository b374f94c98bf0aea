#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace trajgan {

using Rng = std::mt19937_64;

/// Derives an independent stream from a root seed, a stream name and an index.
/// Named streams let one root seed drive synth, minibatch, noise and dropout
/// randomness separately.
Rng make_stream(std::uint64_t root_seed, std::string_view name, std::uint64_t index = 0);

}  // namespace trajgan
