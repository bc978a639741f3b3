#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace paraudit::detail {

constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t hash = 0xcbf29ce484222325ull) {
  constexpr std::uint64_t kPrime = 0x00000100000001b3ull;
  for (unsigned char c : data) {
    hash ^= static_cast<std::uint64_t>(c);
    hash *= kPrime;
  }
  return hash;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Derives an independent RNG stream from a root seed plus string/integer
// coordinates. The same coordinates always yield the same stream.
class StreamRng {
 public:
  explicit StreamRng(std::uint64_t seed) : state_(splitmix64(seed)) {}

  StreamRng& mix(std::string_view s) {
    state_ = splitmix64(state_ ^ fnv1a64(s));
    return *this;
  }

  StreamRng& mix(std::uint64_t v) {
    state_ = splitmix64(state_ ^ v);
    return *this;
  }

  std::mt19937_64 engine() const { return std::mt19937_64(state_); }

 private:
  std::uint64_t state_;
};

// Uniform double in [0,1) from the top 53 bits; avoids the
// implementation-defined behavior of std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Weighted draw without replacement. Deterministic for a given engine state:
// cumulative-weight inversion, no library distribution objects.
template <typename T>
std::vector<T> weighted_sample_without_replacement(
    std::vector<std::pair<T, double>> urn, std::size_t k, std::mt19937_64& rng) {
  std::vector<T> out;
  out.reserve(k);
  while (out.size() < k && !urn.empty()) {
    double total = 0.0;
    for (const auto& [item, w] : urn) total += w;
    double target = uniform01(rng) * total;
    std::size_t chosen = urn.size() - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < urn.size(); ++i) {
      acc += urn[i].second;
      if (target < acc) {
        chosen = i;
        break;
      }
    }
    out.push_back(urn[chosen].first);
    urn.erase(urn.begin() + static_cast<std::ptrdiff_t>(chosen));
  }
  return out;
}

}  // namespace paraudit::detail
