#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>

namespace psrlab {

/// Counter-based generator: output i of stream (seed, id) is a fixed hash of
/// (key, i), so streams never interact and can be split freely. The mixer is
/// the SplitMix64 finaliser.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  /// Named streams, so adding a consumer never shifts another's draws.
  enum Stream : std::uint64_t { kModelGen = 1, kEpisode = 2, kAction = 3, kExperiment = 4 };

  CounterRng() : CounterRng(0, 0) {}
  CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(mix(mix(seed) ^ (stream * 0xD1B54A32D192ED03ULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + 0x9E3779B97F4A7C15ULL * ++counter_); }

  /// An independent child stream, e.g. one per episode or per retry.
  CounterRng split(std::uint64_t id) const { return CounterRng(key_, id + 0x100); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe as a log argument.
  double uniform_pos() { return 1.0 - uniform(); }

  /// Index drawn from a probability vector (entries need not sum exactly to 1).
  int categorical(std::span<const double> probs) {
    double total = 0.0;
    for (double p : probs) total += p;
    const double u = uniform() * total;
    double acc = 0.0;
    int last = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] <= 0.0) continue;
      acc += probs[i];
      last = static_cast<int>(i);
      if (u < acc) return last;
    }
    return last;
  }

  /// Uniform integer in [0, n).
  int below(int n) { return static_cast<int>(uniform() * n); }

  /// Dirichlet(1, ..., 1) sample written into `out` (normalised unit
  /// exponentials).
  void dirichlet_flat(std::span<double> out) {
    double total = 0.0;
    for (double& x : out) {
      x = -std::log(uniform_pos());
      total += x;
    }
    for (double& x : out) x /= total;
  }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace psrlab
