#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace psrlab {

using ObsId = int;
using ActId = int;
using ActionSequence = std::vector<ActId>;

/// A sequence of W future observations interleaved with W-1 executed actions.
struct Test {
  std::vector<ObsId> obs;
  std::vector<ActId> act;

  int length() const noexcept { return static_cast<int>(obs.size()); }
  bool well_formed() const noexcept { return !obs.empty() && act.size() + 1 == obs.size(); }

  auto operator<=>(const Test&) const = default;
  bool operator==(const Test&) const = default;
};

std::string to_string(const Test& t);

/// An episode prefix (o_1, a_1, ..., o_h, a_h). Policies also read partial
/// prefixes (tau_{h-1}, o_h) where obs has one more entry than the step's
/// action history.
struct Trajectory {
  std::vector<ObsId> obs;
  std::vector<ActId> act;

  int steps() const noexcept { return static_cast<int>(obs.size()); }
  bool well_formed() const noexcept { return obs.size() == act.size(); }

  /// First h steps (both observations and actions).
  Trajectory prefix(int h) const;

  auto operator<=>(const Trajectory&) const = default;
  bool operator==(const Trajectory&) const = default;
};

/// Core tests U_h for h = 1..L plus derived lookup tables.
class CoreTestSet {
 public:
  CoreTestSet() = default;
  /// `perStep[h-1]` holds U_h. Throws InvalidModel on duplicates or malformed
  /// tests.
  explicit CoreTestSet(std::vector<std::vector<Test>> perStep);

  int steps() const noexcept { return static_cast<int>(tests_.size()); }
  /// U_h, 1-based step.
  const std::vector<Test>& at(int h) const { return tests_.at(static_cast<std::size_t>(h - 1)); }
  int size(int h) const { return static_cast<int>(at(h).size()); }
  /// Position of `t` in U_h, or -1.
  int index_of(int h, const Test& t) const;
  /// Distinct action sequences of U_h in first-appearance order (U_{A,h}).
  const std::vector<ActionSequence>& action_sequences(int h) const {
    return actionSeqs_.at(static_cast<std::size_t>(h - 1));
  }
  /// |U_A| = max_h |U_{A,h}|.
  int max_action_sequences() const noexcept;
  const std::vector<std::vector<Test>>& all() const noexcept { return tests_; }

  bool operator==(const CoreTestSet& o) const { return tests_ == o.tests_; }

 private:
  std::vector<std::vector<Test>> tests_;
  std::vector<std::map<Test, int>> index_;
  std::vector<std::vector<ActionSequence>> actionSeqs_;
};

/// All m-step futures O x (A x O)^{m-1} in canonical order: interleaved
/// (o_1, a_1, o_2, ...) read as a mixed-radix number, most significant first.
std::vector<Test> all_tests_of_length(int length, int obsCount, int actCount);

/// Mixed-radix counter over every trajectory of `steps` (o, a) pairs, in
/// lexicographic order of the interleaved sequence.
class TrajectoryEnumerator {
 public:
  TrajectoryEnumerator(int steps, int obsCount, int actCount);
  const Trajectory& current() const noexcept { return cur_; }
  /// Advances; returns false after the last trajectory.
  bool next();
  static double count(int steps, int obsCount, int actCount);

 private:
  int obsCount_;
  int actCount_;
  Trajectory cur_;
};

}  // namespace psrlab
