#include "psrlab/psr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "psrlab/errors.hpp"

namespace psrlab {

namespace {

Trajectory full_buffer(const PsrModel& model) {
  Trajectory tau;
  tau.obs.assign(static_cast<std::size_t>(model.horizon()), 0);
  tau.act.assign(static_cast<std::size_t>(model.horizon()), 0);
  return tau;
}

double clamp_prob(double p) {
  if (p < -kProbTol) {
    throw InvalidModel("trajectory probability " + std::to_string(p) + " is below -" + std::to_string(kProbTol));
  }
  return p < 0.0 ? 0.0 : p;
}

// Depth-first walk over every full trajectory. At step h, `b` is
// b_{tau_{min(h,L)-1}}; `leaf` receives (tau, P(o_{1:H} | do(a_{1:H-1}))).
template <class Leaf>
void walk_all(const PsrModel& model, Trajectory& tau, int h, const Vector& b, Leaf& leaf) {
  const int H = model.horizon();
  for (int o = 0; o < model.obs_count(); ++o) {
    tau.obs[static_cast<std::size_t>(h - 1)] = o;
    if (h == H) {
      const double raw = b[model.readout_index(tau)];
      for (int a = 0; a < model.act_count(); ++a) {
        tau.act[static_cast<std::size_t>(h - 1)] = a;
        leaf(tau, raw);
      }
      continue;
    }
    for (int a = 0; a < model.act_count(); ++a) {
      tau.act[static_cast<std::size_t>(h - 1)] = a;
      walk_all(model, tau, h + 1, model.advance(b, o, a, h), leaf);
    }
  }
}

}  // namespace

Vector unnormalized_state(const PsrModel& model, const Trajectory& tau) {
  const int h = tau.steps();
  if (h > model.readout_step() - 1) {
    throw DimensionMismatch("unnormalized state requested after " + std::to_string(h) + " steps; core tests stop at " +
                            std::to_string(model.readout_step()));
  }
  Vector b = model.q0();
  for (int l = 1; l <= h; ++l) {
    b = model.op(tau.obs[static_cast<std::size_t>(l - 1)], tau.act[static_cast<std::size_t>(l - 1)], l) * b;
  }
  return b;
}

Vector predictive_state(const PsrModel& model, const Trajectory& tau) {
  const int steps = tau.steps();
  if (steps > model.readout_step() - 1) {
    throw DimensionMismatch("predictive state requested after " + std::to_string(steps) +
                            " steps; core tests stop at " + std::to_string(model.readout_step()));
  }
  Vector q = model.q0();
  for (int l = 1; l <= steps; ++l) {
    const ObsId o = tau.obs[static_cast<std::size_t>(l - 1)];
    const double norm = model.observation_vector(o, l).dot(q);
    if (norm < kReachTol) {
      throw UnreachableHistory("observation " + std::to_string(o) + " at step " + std::to_string(l) +
                               " has conditional probability " + std::to_string(norm));
    }
    q = model.op(o, tau.act[static_cast<std::size_t>(l - 1)], l) * q / norm;
  }
  return q;
}

double raw_traj_prob(const PsrModel& model, const Trajectory& tau) {
  if (tau.steps() != model.horizon() || static_cast<int>(tau.act.size()) < model.horizon() - 1) {
    throw DimensionMismatch("trajectory has " + std::to_string(tau.steps()) + " steps, horizon is " +
                            std::to_string(model.horizon()));
  }
  Vector b = model.q0();
  for (int l = 1; l < model.readout_step(); ++l) {
    b = model.op(tau.obs[static_cast<std::size_t>(l - 1)], tau.act[static_cast<std::size_t>(l - 1)], l) * b;
  }
  return b[model.readout_index(tau)];
}

double traj_prob(const PsrModel& model, const Policy& pi, const Trajectory& tau) {
  if (!tau.well_formed()) throw DimensionMismatch("trajectory observation and action counts differ");
  const double p = pi.trajectory_prob(tau);
  if (p == 0.0) return 0.0;
  return clamp_prob(raw_traj_prob(model, tau) * p);
}

double policy_value(const PsrModel& model, const Policy& pi, std::size_t budget) {
  const int H = model.horizon();
  check_budget(TrajectoryEnumerator::count(H, model.obs_count(), model.act_count()), budget, "policy evaluation");
  double value = 0.0;
  Trajectory tau = full_buffer(model);
  auto leaf = [&](const Trajectory& t, double raw) {
    const double p = pi.trajectory_prob(t);
    if (p == 0.0) return;
    const double prob = clamp_prob(raw * p);
    if (prob == 0.0) return;
    double r = 0.0;
    for (int l = 1; l <= H; ++l) r += model.reward(l, t.obs[static_cast<std::size_t>(l - 1)], t.act[static_cast<std::size_t>(l - 1)]);
    value += prob * r;
  };
  walk_all(model, tau, 1, model.q0(), leaf);
  return value;
}

namespace {

struct Planner {
  const PsrModel& model;
  TabularPolicy table;
  double tieTol;

  // Value of node (tau_{h-1}, o_h); `b` is b_{tau_{min(h,L)-1}} and `weight`
  // is P(o_{1:h} | do(a_{1:h-1})), already known to be reachable.
  double solve(Trajectory& tau, int h, const Vector& b, double weight) {
    const int H = model.horizon();
    const ObsId o = tau.obs[static_cast<std::size_t>(h - 1)];
    double best = -std::numeric_limits<double>::infinity();
    ActId bestA = 0;
    for (int a = 0; a < model.act_count(); ++a) {
      tau.act[static_cast<std::size_t>(h - 1)] = a;
      double q = model.reward(h, o, a);
      if (h < H) {
        const Vector next = model.advance(b, o, a, h);
        for (int o2 = 0; o2 < model.obs_count(); ++o2) {
          tau.obs[static_cast<std::size_t>(h)] = o2;
          const double w2 = model.prefix_weight(next, tau, h + 1);
          const double cond = w2 / weight;
          if (!(cond >= kReachTol)) continue;
          q += cond * solve(tau, h + 1, next, w2);
        }
      }
      if (q > best + tieTol) {
        best = q;
        bestA = a;
      }
    }
    table.set_deterministic(h, table.history_code(h, tau), bestA);
    return best;
  }
};

}  // namespace

PlanResult optimal_policy(const PsrModel& model, std::size_t budget) {
  const int H = model.horizon();
  check_budget(TrajectoryEnumerator::count(H, model.obs_count(), model.act_count()), budget, "planning");
  TabularPolicy table(H, model.obs_count(), model.act_count());
  // Every row defaults to action 0; only reachable rows are overwritten.
  for (int h = 1; h <= H; ++h) {
    for (std::size_t c = 0; c < table.rows(h); ++c) table.set_deterministic(h, c, 0);
  }
  Planner planner{model, std::move(table), 1e-12 * model.rewards().max_abs() * H};
  Trajectory tau = full_buffer(model);
  double value = 0.0;
  for (int o = 0; o < model.obs_count(); ++o) {
    tau.obs[0] = o;
    const double w = model.prefix_weight(model.q0(), tau, 1);
    if (!(w >= kReachTol)) continue;
    value += w * planner.solve(tau, 1, model.q0(), w);
  }
  return PlanResult{Policy::tabular(std::move(planner.table)), value};
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  os << "mass " << (massOk ? "ok" : "FAIL") << " (error " << massError << ", worst action sequence "
     << maxActionMassError << "); nonnegativity " << (nonnegOk ? "ok" : "FAIL") << " (min " << minTrajProb
     << "); consistency " << (consistencyOk ? "ok" : "FAIL") << " (max group mass " << maxGroupMass << ")";
  return os.str();
}

namespace {

struct Validator {
  const PsrModel& model;
  double tol;
  ValidationReport report;
  std::vector<double> massByActions;
  std::vector<std::vector<int>> groupOf;  // per step h (1..L): action-sequence group of each U_h test
  std::vector<int> groupCount;

  void check_state(const Vector& b, double weight, int h) {
    // b over U_h for a history of h-1 steps with do-probability `weight`.
    if (!(weight >= kReachTol)) return;
    std::vector<double> sums(static_cast<std::size_t>(groupCount[static_cast<std::size_t>(h - 1)]), 0.0);
    const auto& g = groupOf[static_cast<std::size_t>(h - 1)];
    for (Eigen::Index i = 0; i < b.size(); ++i) sums[static_cast<std::size_t>(g[static_cast<std::size_t>(i)])] += b[i] / weight;
    for (double s : sums) report.maxGroupMass = std::max(report.maxGroupMass, s);
  }

  void walk(Trajectory& tau, int h, const Vector& b, std::size_t actCode) {
    const int H = model.horizon();
    const int L = model.readout_step();
    for (int o = 0; o < model.obs_count(); ++o) {
      tau.obs[static_cast<std::size_t>(h - 1)] = o;
      if (h == H) {
        const double raw = b[model.readout_index(tau)];
        report.minTrajProb = std::min(report.minTrajProb, raw);
        massByActions[actCode] += raw;
        continue;
      }
      const double weight = model.prefix_weight(b, tau, h);
      for (int a = 0; a < model.act_count(); ++a) {
        tau.act[static_cast<std::size_t>(h - 1)] = a;
        const Vector next = model.advance(b, o, a, h);
        if (h < L) check_state(next, weight, h + 1);
        walk(tau, h + 1, next, actCode * static_cast<std::size_t>(model.act_count()) + static_cast<std::size_t>(a));
      }
    }
  }
};

}  // namespace

ValidationReport validate_psr(const PsrModel& model, double tol, std::size_t budget) {
  const int H = model.horizon();
  const int L = model.readout_step();
  check_budget(TrajectoryEnumerator::count(H, model.obs_count(), model.act_count()), budget, "validation");
  Validator v{model, tol, {}, {}, {}, {}};
  v.report.minTrajProb = std::numeric_limits<double>::infinity();
  std::size_t seqs = 1;
  for (int l = 1; l < H; ++l) seqs *= static_cast<std::size_t>(model.act_count());
  v.massByActions.assign(seqs, 0.0);
  for (int h = 1; h <= L; ++h) {
    std::map<ActionSequence, int> ids;
    std::vector<int> g;
    for (const Test& t : model.core_tests().at(h)) {
      auto [it, _] = ids.emplace(t.act, static_cast<int>(ids.size()));
      g.push_back(it->second);
    }
    v.groupOf.push_back(std::move(g));
    v.groupCount.push_back(static_cast<int>(ids.size()));
  }
  v.check_state(model.q0(), 1.0, 1);
  Trajectory tau = full_buffer(model);
  v.walk(tau, 1, model.q0(), 0);

  ValidationReport& r = v.report;
  double total = 0.0;
  for (double m : v.massByActions) {
    total += m;
    r.maxActionMassError = std::max(r.maxActionMassError, std::abs(m - 1.0));
  }
  r.massError = total / static_cast<double>(seqs) - 1.0;
  r.massOk = std::abs(r.massError) <= tol && r.maxActionMassError <= tol;
  r.nonnegOk = r.minTrajProb >= -tol;
  r.consistencyOk = r.maxGroupMass <= 1.0 + tol;
  return r;
}

PsrModel project_parameters(const PsrModel& model, std::span<const Matrix> coreMatrices) {
  const int L = model.readout_step();
  if (static_cast<int>(coreMatrices.size()) < L - 1) {
    throw DimensionMismatch("need core matrices K_0..K_" + std::to_string(L - 2) + ", got " +
                            std::to_string(coreMatrices.size()));
  }
  std::vector<Matrix> ops = model.ops();
  for (int h = 1; h < L; ++h) {
    const Matrix& k = coreMatrices[static_cast<std::size_t>(h - 1)];
    if (k.rows() != model.core_tests().size(h)) {
      throw DimensionMismatch("K_" + std::to_string(h - 1) + " has " + std::to_string(k.rows()) + " rows, U_" +
                              std::to_string(h) + " has " + std::to_string(model.core_tests().size(h)));
    }
    const Matrix proj = column_space_projector(k);
    for (int o = 0; o < model.obs_count(); ++o) {
      for (int a = 0; a < model.act_count(); ++a) {
        Matrix& m = ops[model.op_index(o, a, h)];
        m = m * proj;
      }
    }
  }
  return PsrModel(model.horizon(), model.obs_count(), model.act_count(), model.core_tests(), model.q0(),
                  std::move(ops), model.rewards());
}

}  // namespace psrlab
