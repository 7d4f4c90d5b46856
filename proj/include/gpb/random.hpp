#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace gpb {

using Rng = std::mt19937_64;

// Counter-based seed splitting: derive_seed(root, i) is a pure function, so a
// run's randomness does not depend on how many runs came before it.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t root, std::string_view label);

// FNV-1a over bytes.
std::uint64_t fnv1a(std::string_view bytes);

// Uniform integer in [0, n).
std::size_t uniform_index(Rng& rng, std::size_t n);
double uniform01(Rng& rng);
double normal(Rng& rng);

// Fisher–Yates with uniform_index, so results do not depend on the standard
// library's shuffle.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

// Random permutation of [0, n).
std::vector<std::size_t> permutation(std::size_t n, Rng& rng);

}  // namespace gpb
