#include "psrlab/policy.hpp"

#include <cmath>
#include <string>

#include "psrlab/errors.hpp"

namespace psrlab {

TabularPolicy::TabularPolicy(int horizon, int obsCount, int actCount)
    : horizon_(horizon), obsCount_(obsCount), actCount_(actCount) {
  table_.resize(static_cast<std::size_t>(horizon));
  for (int h = 1; h <= horizon; ++h) {
    table_[static_cast<std::size_t>(h - 1)].assign(rows(h) * static_cast<std::size_t>(actCount),
                                                   1.0 / actCount);
  }
}

std::size_t TabularPolicy::rows(int h) const {
  std::size_t r = static_cast<std::size_t>(obsCount_);
  for (int l = 1; l < h; ++l) r *= static_cast<std::size_t>(obsCount_ * actCount_);
  return r;
}

std::size_t TabularPolicy::history_code(int h, const Trajectory& history) const {
  std::size_t code = 0;
  for (int l = 0; l < h - 1; ++l) {
    code = code * static_cast<std::size_t>(obsCount_) + static_cast<std::size_t>(history.obs[l]);
    code = code * static_cast<std::size_t>(actCount_) + static_cast<std::size_t>(history.act[l]);
  }
  return code * static_cast<std::size_t>(obsCount_) + static_cast<std::size_t>(history.obs[h - 1]);
}

std::span<const double> TabularPolicy::row(int h, std::size_t code) const {
  const auto& t = table_.at(static_cast<std::size_t>(h - 1));
  return {t.data() + code * static_cast<std::size_t>(actCount_), static_cast<std::size_t>(actCount_)};
}

void TabularPolicy::set_row(int h, std::size_t code, std::span<const double> probs) {
  if (probs.size() != static_cast<std::size_t>(actCount_)) {
    throw DimensionMismatch("policy row has " + std::to_string(probs.size()) + " entries, expected " +
                            std::to_string(actCount_));
  }
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw InvalidModel("negative action probability in tabular policy");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw InvalidModel("action distribution at step " + std::to_string(h) + " sums to " + std::to_string(total));
  }
  auto& t = table_.at(static_cast<std::size_t>(h - 1));
  std::copy(probs.begin(), probs.end(), t.begin() + static_cast<std::ptrdiff_t>(code * actCount_));
}

void TabularPolicy::set_deterministic(int h, std::size_t code, ActId a) {
  auto& t = table_.at(static_cast<std::size_t>(h - 1));
  auto first = t.begin() + static_cast<std::ptrdiff_t>(code * actCount_);
  std::fill(first, first + actCount_, 0.0);
  first[a] = 1.0;
}

Policy Policy::uniform(int actCount) { return Policy(actCount, UniformPolicy{}); }

Policy Policy::tabular(TabularPolicy table) {
  const int a = table.act_count();
  return Policy(a, std::move(table));
}

Policy Policy::fixed_sequence(int actCount, int startStep, ActionSequence actions) {
  for (ActId a : actions) {
    if (a < 0 || a >= actCount) throw InvalidModel("fixed-sequence action out of range");
  }
  return Policy(actCount, FixedSequencePolicy{startStep, std::move(actions)});
}

Policy Policy::composite(int actCount, std::shared_ptr<const Policy> prefix, int uniformStep,
                         ActionSequence sequence) {
  if (uniformStep < 0) throw InvalidModel("composite uniform step must be >= 0");
  if (uniformStep > 1 && !prefix) throw InvalidModel("composite policy needs a prefix policy");
  for (ActId a : sequence) {
    if (a < 0 || a >= actCount) throw InvalidModel("composite sequence action out of range");
  }
  return Policy(actCount, CompositePolicy{std::move(prefix), uniformStep, std::move(sequence)});
}

namespace {

void fill_uniform(std::span<double> out) {
  const double p = 1.0 / static_cast<double>(out.size());
  std::fill(out.begin(), out.end(), p);
}

void fill_point(std::span<double> out, ActId a) {
  std::fill(out.begin(), out.end(), 0.0);
  out[static_cast<std::size_t>(a)] = 1.0;
}

}  // namespace

void Policy::distribution(int h, const Trajectory& history, std::span<double> out) const {
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, UniformPolicy>) {
          fill_uniform(out);
        } else if constexpr (std::is_same_v<T, TabularPolicy>) {
          if (h > p.horizon()) {
            fill_uniform(out);
            return;
          }
          auto row = p.row(h, p.history_code(h, history));
          std::copy(row.begin(), row.end(), out.begin());
        } else if constexpr (std::is_same_v<T, FixedSequencePolicy>) {
          const int i = h - p.startStep;
          if (i >= 0 && i < static_cast<int>(p.actions.size())) {
            fill_point(out, p.actions[static_cast<std::size_t>(i)]);
          } else {
            fill_uniform(out);
          }
        } else {
          if (h < p.uniformStep) {
            p.prefix->distribution(h, history, out);
          } else if (h == p.uniformStep) {
            fill_uniform(out);
          } else if (const int i = h - p.uniformStep - 1; i < static_cast<int>(p.sequence.size())) {
            fill_point(out, p.sequence[static_cast<std::size_t>(i)]);
          } else {
            fill_uniform(out);
          }
        }
      },
      impl_);
}

double Policy::prob(int h, const Trajectory& history, ActId a) const {
  // Small alphabets: a stack buffer avoids an allocation per call.
  double buf[16];
  std::vector<double> heap;
  std::span<double> out;
  if (actCount_ <= 16) {
    out = std::span<double>(buf, static_cast<std::size_t>(actCount_));
  } else {
    heap.resize(static_cast<std::size_t>(actCount_));
    out = heap;
  }
  distribution(h, history, out);
  return out[static_cast<std::size_t>(a)];
}

double Policy::trajectory_prob(const Trajectory& tau) const { return trajectory_prob(tau, 1, tau.steps()); }

double Policy::trajectory_prob(const Trajectory& tau, int from, int to) const {
  double p = 1.0;
  for (int h = from; h <= to && p != 0.0; ++h) p *= prob(h, tau, tau.act[static_cast<std::size_t>(h - 1)]);
  return p;
}

Policy compose_exploration_policy(std::shared_ptr<const Policy> base, int h, const ActionSequence& u) {
  const int actCount = base->act_count();
  return Policy::composite(actCount, std::move(base), h, u);
}

}  // namespace psrlab
