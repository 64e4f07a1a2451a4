#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace wpsat {

/// Seeded generator used throughout. Results are reproducible for a given
/// seed on a given standard library.
using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Mixes a master seed with a sequence of coordinates into an independent seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> coords) {
  std::uint64_t h = splitmix64(master);
  for (auto c : coords) h = splitmix64(h ^ splitmix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  std::shuffle(items.begin(), items.end(), rng);
}

}  // namespace wpsat
