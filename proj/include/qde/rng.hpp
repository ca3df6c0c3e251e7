#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace qde {

/// Seedable random stream used for every stochastic decision in the toolkit.
///
/// All consumers draw from an Rng in a documented, fixed order inside a
/// sequential phase, so results are reproducible regardless of how fitness
/// evaluations are later parallelised. Distribution transforms are implemented
/// here (not via std:: distributions) so the produced sequence is identical
/// across standard libraries.
///
/// Draw accounting:
///   - uniform()          one engine step
///   - uniform_int(n)     one engine step
///   - normal(m, s)       exactly two engine steps (Box-Muller, no cached spare)
class Rng {
public:
  explicit Rng(std::uint64_t seed) : root_seed_(seed), engine_(seed) {}

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  /// Uniform integer in [0, n). Requires n >= 1.
  int uniform_int(int n) {
    const auto x = static_cast<unsigned __int128>(engine_());
    return static_cast<int>((x * static_cast<unsigned __int128>(n)) >> 64);
  }

  /// Normal draw via Box-Muller; always consumes two engine steps.
  double normal(double mean, double stddev) {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    return mean + stddev * r * std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

  /// Independent child stream named by `tag`, derived from the root seed.
  /// Splitting does not consume or depend on the parent's draw position.
  Rng split(std::string_view tag) const {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (const char c : tag) {
      h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
      h *= 1099511628211ull;
    }
    return Rng(splitmix(root_seed_ ^ h));
  }

  std::uint64_t root_seed() const { return root_seed_; }

private:
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::uint64_t root_seed_;
  std::mt19937_64 engine_;
};

}  // namespace qde
