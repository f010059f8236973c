#include "mmvad/rng.hpp"

#include <cmath>

namespace mmvad {

std::mt19937_64 make_rng(std::uint64_t seed, Stream stream) {
  // splitmix64 finalizer over (seed, stream)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(stream) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return std::mt19937_64(z);
}

std::vector<double> normal_vector(std::mt19937_64& rng, std::size_t n, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

std::vector<double> seeded_direction(std::uint64_t seed, std::size_t dim) {
  auto rng = make_rng(seed, Stream::kDirection);
  std::vector<double> v = normal_vector(rng, dim);
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    v.assign(dim, 0.0);
    if (dim) v[0] = 1.0;
    return v;
  }
  for (auto& x : v) x /= norm;
  return v;
}

}  // namespace mmvad
