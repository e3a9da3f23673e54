#pragma once

#include <vector>

#include "psrlab/linalg.hpp"
#include "psrlab/policy.hpp"
#include "psrlab/psr_model.hpp"
#include "psrlab/types.hpp"

namespace psrlab {

/// Episodic tabular POMDP. Observation id `obsCount` is reserved for the
/// dummy observation emitted after step H.
struct Pomdp {
  int stateCount = 0;
  int obsCount = 0;
  int actCount = 0;
  int horizon = 0;
  /// T_h for h = 1..H-1 at index (h-1)|A| + a; column s holds T_h(. | s, a).
  std::vector<Matrix> transitions;
  /// O_h for h = 1..H; column s holds O_h(. | s).
  std::vector<Matrix> emissions;
  Vector mu1;
  RewardTable rewards;

  const Matrix& trans(int h, ActId a) const {
    return transitions[static_cast<std::size_t>(h - 1) * static_cast<std::size_t>(actCount) + static_cast<std::size_t>(a)];
  }
  Matrix& trans(int h, ActId a) {
    return transitions[static_cast<std::size_t>(h - 1) * static_cast<std::size_t>(actCount) + static_cast<std::size_t>(a)];
  }
  const Matrix& emit(int h) const { return emissions[static_cast<std::size_t>(h - 1)]; }
  Matrix& emit(int h) { return emissions[static_cast<std::size_t>(h - 1)]; }
  ObsId dummy_obs() const noexcept { return obsCount; }

  /// Allocates zeroed arrays of the right shapes.
  static Pomdp zeros(int stateCount, int obsCount, int actCount, int horizon);

  /// Throws InvalidModel unless every distribution is nonnegative and sums to
  /// one within 1e-12, and DimensionMismatch on shape errors.
  void validate() const;

  bool operator==(const Pomdp& o) const;
};

/// P(o_{1:n} | do(a_{1:n-1})) for the first n observations of `tau` by the
/// belief recursion. Steps past H must be dummy observations.
double pomdp_do_prob(const Pomdp& pomdp, const Trajectory& tau, int n);

/// P^pi(tau) for any tau of at most H steps (the policy factor covers every
/// action in tau), by the belief recursion.
double pomdp_traj_prob(const Pomdp& pomdp, const Policy& pi, const Trajectory& tau);

/// The same quantity by an explicit sum over latent state sequences.
double pomdp_traj_prob_paths(const Pomdp& pomdp, const Policy& pi, const Trajectory& tau);

/// P(t | tau) with the test's actions forced, starting at step tau.steps()+1.
/// Zero when tau is unreachable (some conditional below kReachTol). Steps past
/// H follow the dummy convention.
double do_test_prob(const Pomdp& pomdp, const Trajectory& tau, const Test& t);

/// Unnormalised latent belief after tau: entry s is P(o_{1:n}, s_{n+1} = s |
/// do(a_{1:n})) for n = tau.steps() < H.
Vector pomdp_forward(const Pomdp& pomdp, const Trajectory& tau);

/// Exact V^pi by trajectory enumeration.
double pomdp_policy_value(const Pomdp& pomdp, const Policy& pi, std::size_t budget = enumeration_budget());

/// V* by backward induction over the history tree (belief DP).
double pomdp_optimal_value(const Pomdp& pomdp, std::size_t budget = enumeration_budget());

}  // namespace psrlab
