#pragma once

#include <utility>
#include <vector>

#include "psrlab/linalg.hpp"
#include "psrlab/types.hpp"

namespace psrlab {

/// Deterministic rewards r_h(o, a), h = 1..H. Unset entries are zero.
class RewardTable {
 public:
  RewardTable() = default;
  RewardTable(int horizon, int obsCount, int actCount);

  double operator()(int h, ObsId o, ActId a) const { return values_[index(h, o, a)]; }
  void set(int h, ObsId o, ActId a, double r) { values_[index(h, o, a)] = r; }

  int horizon() const noexcept { return horizon_; }
  /// max |r|, used to scale planner tie tolerances.
  double max_abs() const noexcept;
  RewardTable scaled(double factor) const;

  bool operator==(const RewardTable&) const = default;

 private:
  std::size_t index(int h, ObsId o, ActId a) const {
    return (static_cast<std::size_t>(h - 1) * static_cast<std::size_t>(obsCount_) + static_cast<std::size_t>(o)) *
               static_cast<std::size_t>(actCount_) +
           static_cast<std::size_t>(a);
  }

  int horizon_ = 0;
  int obsCount_ = 0;
  int actCount_ = 0;
  std::vector<double> values_;
};

/// Linear PSR parameters {M_{o,a,h}, q_0} over core tests U_1..U_L.
///
/// L (the readout step) may be smaller than the episode horizon H. The last
/// predictive state is read out one-hot: every test covering steps L..H must
/// be a member of U_L, and P(tau_H) is the entry of b_{tau_{L-1}} indexed by
/// the trajectory's suffix. With L == H this is m_{o,H} = e_{o,H}.
class PsrModel {
 public:
  PsrModel() = default;
  /// `ops` holds M_{o,a,h} for h = 1..L-1 at index ((h-1)|O| + o)|A| + a.
  /// Throws DimensionMismatch on shape errors and InvalidModel when the
  /// readout suffixes are missing from U_L.
  PsrModel(int horizon, int obsCount, int actCount, CoreTestSet coreTests, Vector q0, std::vector<Matrix> ops,
           RewardTable rewards);

  int horizon() const noexcept { return horizon_; }
  int obs_count() const noexcept { return obsCount_; }
  int act_count() const noexcept { return actCount_; }
  /// L: the number of steps carrying core tests.
  int readout_step() const noexcept { return coreTests_.steps(); }

  const CoreTestSet& core_tests() const noexcept { return coreTests_; }
  const Vector& q0() const noexcept { return q0_; }
  const Matrix& op(ObsId o, ActId a, int h) const { return ops_[op_index(o, a, h)]; }
  const std::vector<Matrix>& ops() const noexcept { return ops_; }
  const RewardTable& rewards() const noexcept { return rewards_; }
  double reward(int h, ObsId o, ActId a) const { return rewards_(h, o, a); }

  PsrModel with_q0(Vector q0) const;
  PsrModel with_op(ObsId o, ActId a, int h, Matrix m) const;
  PsrModel with_rewards(RewardTable rewards) const;

  /// m_{o,h} for h < L: the coefficient vector with <m_{o,h}, q_{tau_{h-1}}>
  /// = P(o_h = o | tau_{h-1}), obtained by marginalising the operators over
  /// all continuations under uniform actions.
  const Vector& observation_vector(ObsId o, int h) const;

  /// b_{tau_h} from b_{tau_{h-1}}; the identity for h >= L (the state is
  /// frozen at b_{tau_{L-1}} and read out through the suffix).
  Vector advance(const Vector& b, ObsId o, ActId a, int h) const;

  /// P(o_{1:h} | do(a_{1:h-1})) given b = b_{tau_{min(h,L)-1}} and a `tau`
  /// holding at least h observations and h-1 actions.
  double prefix_weight(const Vector& b, const Trajectory& tau, int h) const;

  /// Position in U_L of the trajectory suffix (o_{L:H}, a_{L:H-1}).
  int readout_index(const Trajectory& tau) const;

  std::size_t op_index(ObsId o, ActId a, int h) const {
    return (static_cast<std::size_t>(h - 1) * static_cast<std::size_t>(obsCount_) + static_cast<std::size_t>(o)) *
               static_cast<std::size_t>(actCount_) +
           static_cast<std::size_t>(a);
  }

  /// Parameter equality (operators, q0, core tests, rewards).
  bool same_parameters(const PsrModel& other, double tol = 0.0) const;

 private:
  void build_derived();

  int horizon_ = 0;
  int obsCount_ = 0;
  int actCount_ = 0;
  CoreTestSet coreTests_;
  Vector q0_;
  std::vector<Matrix> ops_;
  RewardTable rewards_;

  // Derived: m_{o,h} for h < L and the readout suffix table at step L.
  std::vector<Vector> obsVectors_;
  std::vector<std::pair<Test, int>> suffixes_;
};

}  // namespace psrlab
