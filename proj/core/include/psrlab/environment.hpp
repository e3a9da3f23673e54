#pragma once

#include <cstdint>

#include "psrlab/policy.hpp"
#include "psrlab/pomdp.hpp"
#include "psrlab/rng.hpp"

namespace psrlab {

struct Episode {
  Trajectory trajectory;
  double reward = 0.0;
};

/// A seeded simulator around a POMDP. Latent dynamics and the policy's
/// action draws use separate streams, so changing the policy does not shift
/// the environment's noise. The latent state is never exposed.
class Environment {
 public:
  Environment(Pomdp pomdp, std::uint64_t seed);

  const Pomdp& pomdp() const noexcept { return pomdp_; }
  int horizon() const noexcept { return pomdp_.horizon; }

  /// Samples o_1 from mu_1 and O_1; the next step() call is step 1.
  ObsId reset();
  /// Records action a at the current step and returns the next observation
  /// (the dummy id once the horizon is passed). Returns the step reward via
  /// `reward`.
  ObsId step(ActId a, double& reward);
  int current_step() const noexcept { return step_; }

  /// One full episode of H steps under pi.
  Episode simulate_episode(const Policy& pi);

 private:
  ObsId emit();

  Pomdp pomdp_;
  CounterRng dynamics_;
  CounterRng actions_;
  int state_ = 0;
  int step_ = 0;
  ObsId lastObs_ = 0;
};

}  // namespace psrlab
