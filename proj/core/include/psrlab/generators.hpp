#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "psrlab/pomdp.hpp"
#include "psrlab/structure.hpp"

namespace psrlab {

enum class GeneratorFamily { Lock, RandomRevealing, RandomDecodable, RandomLowRank };

const char* to_string(GeneratorFamily f) noexcept;
/// Throws ParseError on an unknown family name.
GeneratorFamily parse_generator_family(const std::string& name);

struct GeneratorSpec {
  GeneratorFamily family = GeneratorFamily::RandomRevealing;
  int stateCount = 2;
  int obsCount = 2;
  int actCount = 2;
  int horizon = 3;
  int m = 1;
  int dTrans = 1;
  double alpha = 0.1;       // lock only
  double sigmaFloor = 0.0;  // rejection gate on the m-step emission sigma_min
  std::uint64_t seed = 0;
  int maxRetries = 1000;

  /// Throws InvalidModel (InvalidAlpha for the lock) on bad parameters.
  void validate() const;
  bool operator==(const GeneratorSpec&) const = default;
};

/// Observation ids of the lock.
inline constexpr ObsId kLockGood = 0;
inline constexpr ObsId kLockBad = 1;
inline constexpr ObsId kLockDummy = 2;

/// Good-action sequence a_{g,1..H} drawn uniformly from the seed.
std::vector<ActId> lock_good_actions(int actCount, int horizon, std::uint64_t seed);

/// The two-state combinatorial lock with an explicit good-action sequence.
/// Throws InvalidAlpha unless 0 < alpha < 1/(2 sqrt 2).
Pomdp make_lock(double alpha, int actCount, int horizon, const std::vector<ActId>& goodActions);
Pomdp make_lock(double alpha, int actCount, int horizon, std::uint64_t seed);

/// Dirichlet(1) transitions, emissions, mu_1 and uniform [0,1] rewards,
/// resampled until every m-step emission sigma_min reaches the floor.
Pomdp random_pomdp(const GeneratorSpec& spec);

struct LowRankPomdp {
  Pomdp pomdp;
  /// T_h(., a) = psi[h-1] * phi[(h-1)|A| + a]: psi is |S| x d with
  /// distribution columns, phi is d x |S| with distribution columns.
  std::vector<Matrix> psi;
  std::vector<Matrix> phi;
};

LowRankPomdp random_lowrank_pomdp(const GeneratorSpec& spec);

struct DecodablePomdp {
  Pomdp pomdp;
  Decoder decoder;  // as constructed, over every window
};

/// m == 1: block emissions with disjoint supports (needs |O| >= |S|).
/// m >= 2: s_1 fixed and s_{h+1} a random function of a_h, emissions dense.
DecodablePomdp random_decodable(const GeneratorSpec& spec);

/// Dispatch on spec.family.
Pomdp generate(const GeneratorSpec& spec);

}  // namespace psrlab
