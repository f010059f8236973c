#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace mmvad {

/// Stream ids keep independent draws from one user seed apart.
enum class Stream : std::uint64_t {
  kDirection = 1,
  kStubPrompt = 2,
  kStubBias = 3,
  kSynthLatent = 4,
  kSynthLayout = 5,
  kSynthNoise = 6,
};

/// Deterministic generator for (seed, stream).
std::mt19937_64 make_rng(std::uint64_t seed, Stream stream);

std::vector<double> normal_vector(std::mt19937_64& rng, std::size_t n, double stddev = 1.0);

/// Unit vector in R^dim drawn from the direction stream of `seed`. The
/// synthetic generator shifts anomalies along it and the stub scorer aligns
/// its summary weights with it, so both agree for the same seed.
std::vector<double> seeded_direction(std::uint64_t seed, std::size_t dim);

}  // namespace mmvad
