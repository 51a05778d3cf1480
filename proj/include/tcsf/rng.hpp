#pragma once

#include <cstdint>
#include <random>

namespace tcsf {

using Rng = std::mt19937_64;

// Decorrelated child seed for stream `stream` of `master` (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

// Uniform on the open interval (0, 1), 53-bit resolution.
double uniform_open(Rng& rng);
double standard_normal(Rng& rng);
// Uniform integer in [0, n).
std::size_t uniform_index(Rng& rng, std::size_t n);

}  // namespace tcsf
