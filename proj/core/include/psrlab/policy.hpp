#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "psrlab/types.hpp"

namespace psrlab {

class Policy;

/// Dense history-indexed action table. Row `history_code(h, tau)` of step h
/// holds pi_h(. | tau_{h-1}, o_h).
class TabularPolicy {
 public:
  TabularPolicy() = default;
  /// All rows start uniform.
  TabularPolicy(int horizon, int obsCount, int actCount);

  int horizon() const noexcept { return horizon_; }
  int obs_count() const noexcept { return obsCount_; }
  int act_count() const noexcept { return actCount_; }

  /// Number of (tau_{h-1}, o_h) histories at step h: (|O||A|)^{h-1}|O|.
  std::size_t rows(int h) const;
  /// Mixed-radix index of (o_1, a_1, ..., a_{h-1}, o_h) read from `history`.
  std::size_t history_code(int h, const Trajectory& history) const;

  std::span<const double> row(int h, std::size_t code) const;
  /// Throws InvalidModel unless `probs` is a distribution within 1e-12.
  void set_row(int h, std::size_t code, std::span<const double> probs);
  void set_deterministic(int h, std::size_t code, ActId a);

 private:
  int horizon_ = 0;
  int obsCount_ = 0;
  int actCount_ = 0;
  std::vector<std::vector<double>> table_;  // per step, rows(h) * actCount
};

struct UniformPolicy {};

/// Plays `actions[i]` at step `startStep + i`; uniform elsewhere.
struct FixedSequencePolicy {
  int startStep = 1;
  ActionSequence actions;
};

/// prefix for steps < uniformStep, Uniform at uniformStep, then `sequence`
/// from uniformStep + 1, Uniform for every later step. uniformStep == 0 means
/// there is neither a prefix nor a uniform step and the sequence starts at 1.
struct CompositePolicy {
  std::shared_ptr<const Policy> prefix;
  int uniformStep = 0;
  ActionSequence sequence;
};

/// A history-conditioned action distribution over a fixed action alphabet.
/// Immutable once built; cheap to copy (composites share their prefix).
class Policy {
 public:
  using Variant = std::variant<TabularPolicy, UniformPolicy, FixedSequencePolicy, CompositePolicy>;

  static Policy uniform(int actCount);
  static Policy tabular(TabularPolicy table);
  static Policy fixed_sequence(int actCount, int startStep, ActionSequence actions);
  static Policy composite(int actCount, std::shared_ptr<const Policy> prefix, int uniformStep,
                          ActionSequence sequence);

  int act_count() const noexcept { return actCount_; }
  const Variant& variant() const noexcept { return impl_; }

  /// Writes pi_h(. | tau_{h-1}, o_h) into `out` (size act_count()). `history`
  /// must hold at least h observations and h-1 actions.
  void distribution(int h, const Trajectory& history, std::span<double> out) const;
  double prob(int h, const Trajectory& history, ActId a) const;
  /// pi(tau) = prod_l pi(a_l | tau_{l-1}, o_l) over every step of `tau`.
  double trajectory_prob(const Trajectory& tau) const;
  /// Same product restricted to steps [from, to].
  double trajectory_prob(const Trajectory& tau, int from, int to) const;

 private:
  Policy(int actCount, Variant v) : actCount_(actCount), impl_(std::move(v)) {}

  int actCount_ = 0;
  Variant impl_;
};

/// pi^k_{1:h-1} o Unif(A) o u. For h == 0 the sequence starts at step 1 with
/// no uniform step.
Policy compose_exploration_policy(std::shared_ptr<const Policy> base, int h, const ActionSequence& u);

}  // namespace psrlab
