#pragma once

#include <span>
#include <string>

#include "psrlab/policy.hpp"
#include "psrlab/psr_model.hpp"

namespace psrlab {

/// q_{tau_{h-1}} over U_h for a trajectory of h-1 steps, by the normalised
/// forward update. Histories at or beyond L-1 steps return q_{tau_{L-1}}.
/// Throws UnreachableHistory when a normaliser drops below kReachTol.
Vector predictive_state(const PsrModel& model, const Trajectory& tau);

/// b_{tau_h} = M_{o_h,a_h,h} ... M_{o_1,a_1,1} q_0 over U_{h+1}, h <= L-1.
Vector unnormalized_state(const PsrModel& model, const Trajectory& tau);

/// P^pi(tau_H). Values in [-kProbTol, 0) clamp to 0; anything lower throws
/// InvalidModel.
double traj_prob(const PsrModel& model, const Policy& pi, const Trajectory& tau);

/// P(o_{1:H} | do(a_{1:H-1})) without the policy factor or clamping.
double raw_traj_prob(const PsrModel& model, const Trajectory& tau);

/// Exact V^pi by enumerating every full trajectory. Throws BudgetExceeded
/// when (|O||A|)^H exceeds `budget`.
double policy_value(const PsrModel& model, const Policy& pi, std::size_t budget = enumeration_budget());

struct PlanResult {
  Policy policy;
  double value = 0.0;
};

/// Exact backward induction over the history tree. Ties resolve to the lowest
/// action id; unreachable histories get action 0 and value 0.
PlanResult optimal_policy(const PsrModel& model, std::size_t budget = enumeration_budget());

struct ValidationReport {
  bool massOk = true;
  bool nonnegOk = true;
  bool consistencyOk = true;
  /// Total mass under the uniform policy, minus one.
  double massError = 0.0;
  /// Largest |mass - 1| over open-loop action sequences.
  double maxActionMassError = 0.0;
  double minTrajProb = 0.0;
  /// Largest per-action-sequence sum of predictive-state entries.
  double maxGroupMass = 0.0;
  bool valid() const noexcept { return massOk && nonnegOk && consistencyOk; }
  std::string summary() const;
};

ValidationReport validate_psr(const PsrModel& model, double tol = 1e-8, std::size_t budget = enumeration_budget());

/// Replaces every row of M_{o,a,h} by its projection onto col(K_{h-1}).
/// `coreMatrices[h]` is K_h over U_{h+1}; entries 0..L-2 are used.
PsrModel project_parameters(const PsrModel& model, std::span<const Matrix> coreMatrices);

}  // namespace psrlab
