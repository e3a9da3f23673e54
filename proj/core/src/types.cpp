#include "psrlab/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "psrlab/errors.hpp"

namespace psrlab {

std::string to_string(const Test& t) {
  std::string s = "(";
  for (std::size_t i = 0; i < t.obs.size(); ++i) {
    if (i > 0) s += ",a" + std::to_string(t.act[i - 1]) + ",";
    s += "o" + std::to_string(t.obs[i]);
  }
  return s + ")";
}

Trajectory Trajectory::prefix(int h) const {
  Trajectory out;
  out.obs.assign(obs.begin(), obs.begin() + h);
  out.act.assign(act.begin(), act.begin() + std::min<std::size_t>(static_cast<std::size_t>(h), act.size()));
  return out;
}

CoreTestSet::CoreTestSet(std::vector<std::vector<Test>> perStep) : tests_(std::move(perStep)) {
  index_.resize(tests_.size());
  actionSeqs_.resize(tests_.size());
  for (std::size_t h = 0; h < tests_.size(); ++h) {
    std::set<ActionSequence> seen;
    for (std::size_t i = 0; i < tests_[h].size(); ++i) {
      const Test& t = tests_[h][i];
      if (!t.well_formed()) {
        throw InvalidModel("core test " + to_string(t) + " at step " + std::to_string(h + 1) +
                           " has mismatched observation/action lengths");
      }
      if (!index_[h].emplace(t, static_cast<int>(i)).second) {
        throw InvalidModel("duplicate core test " + to_string(t) + " at step " + std::to_string(h + 1));
      }
      if (seen.insert(t.act).second) actionSeqs_[h].push_back(t.act);
    }
  }
}

int CoreTestSet::index_of(int h, const Test& t) const {
  const auto& idx = index_.at(static_cast<std::size_t>(h - 1));
  auto it = idx.find(t);
  return it == idx.end() ? -1 : it->second;
}

int CoreTestSet::max_action_sequences() const noexcept {
  std::size_t best = 0;
  for (const auto& s : actionSeqs_) best = std::max(best, s.size());
  return static_cast<int>(best);
}

std::vector<Test> all_tests_of_length(int length, int obsCount, int actCount) {
  std::vector<Test> out;
  if (length <= 0) return out;
  Test t;
  t.obs.assign(static_cast<std::size_t>(length), 0);
  t.act.assign(static_cast<std::size_t>(length - 1), 0);
  while (true) {
    out.push_back(t);
    // Increment the interleaved digit string o1 a1 o2 ... o_W from the right.
    int pos = 2 * length - 2;
    for (; pos >= 0; --pos) {
      const bool isObs = pos % 2 == 0;
      int& digit = isObs ? t.obs[static_cast<std::size_t>(pos / 2)] : t.act[static_cast<std::size_t>(pos / 2)];
      const int radix = isObs ? obsCount : actCount;
      if (++digit < radix) break;
      digit = 0;
    }
    if (pos < 0) break;
  }
  return out;
}

TrajectoryEnumerator::TrajectoryEnumerator(int steps, int obsCount, int actCount)
    : obsCount_(obsCount), actCount_(actCount) {
  cur_.obs.assign(static_cast<std::size_t>(steps), 0);
  cur_.act.assign(static_cast<std::size_t>(steps), 0);
}

bool TrajectoryEnumerator::next() {
  const int steps = cur_.steps();
  for (int pos = 2 * steps - 1; pos >= 0; --pos) {
    const bool isObs = pos % 2 == 0;
    int& digit = isObs ? cur_.obs[static_cast<std::size_t>(pos / 2)] : cur_.act[static_cast<std::size_t>(pos / 2)];
    const int radix = isObs ? obsCount_ : actCount_;
    if (++digit < radix) return true;
    digit = 0;
  }
  return false;
}

double TrajectoryEnumerator::count(int steps, int obsCount, int actCount) {
  return std::pow(static_cast<double>(obsCount) * actCount, steps);
}

}  // namespace psrlab
