#include "psrlab/crane.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <span>

#include "psrlab/errors.hpp"
#include "psrlab/generators.hpp"
#include "psrlab/rng.hpp"
#include "psrlab/structure.hpp"

namespace psrlab {

ModelClass::ModelClass(std::vector<PsrModel> candidates, std::optional<int> trueIndex)
    : candidates_(std::move(candidates)), trueIndex_(trueIndex) {
  flags_.resize(candidates_.size());
  for (std::size_t i = 1; i < candidates_.size(); ++i) {
    const PsrModel& a = candidates_[0];
    const PsrModel& b = candidates_[i];
    if (a.horizon() != b.horizon() || a.obs_count() != b.obs_count() || a.act_count() != b.act_count() ||
        !(a.core_tests() == b.core_tests())) {
      throw InvalidModel("candidate " + std::to_string(i) + " does not share core tests and horizon with candidate 0");
    }
  }
  if (trueIndex_ && (*trueIndex_ < 0 || *trueIndex_ >= static_cast<int>(candidates_.size()))) {
    throw InvalidModel("true-model index out of range");
  }
}

ModelClass lock_family(double alpha, int actCount, int horizon, const std::vector<ActId>& trueGoodActions) {
  std::vector<PsrModel> models;
  std::optional<int> trueIndex;
  ActionSequence seq(static_cast<std::size_t>(horizon), 0);
  while (true) {
    if (std::equal(seq.begin(), seq.end(), trueGoodActions.begin(), trueGoodActions.begin() + horizon)) {
      trueIndex = static_cast<int>(models.size());
    }
    models.push_back(lift_weakly_revealing_model(make_lock(alpha, actCount, horizon, seq), 1).model);
    int pos = horizon - 1;
    for (; pos >= 0; --pos) {
      if (++seq[static_cast<std::size_t>(pos)] < actCount) break;
      seq[static_cast<std::size_t>(pos)] = 0;
    }
    if (pos < 0) break;
  }
  return ModelClass(std::move(models), trueIndex);
}

ModelClass perturbation_grid(const Pomdp& truth, int m, const std::vector<double>& epsilons, int perEpsilon,
                             std::uint64_t seed) {
  std::vector<PsrModel> models;
  models.push_back(lift_weakly_revealing_model(truth, m).model);
  const CounterRng base(seed, CounterRng::kModelGen);
  std::uint64_t stream = 0;
  auto perturb = [](Matrix& x, double eps, CounterRng& rng) {
    std::vector<double> d(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      rng.dirichlet_flat(d);
      for (Eigen::Index r = 0; r < x.rows(); ++r) x(r, c) = (1.0 - eps) * x(r, c) + eps * d[static_cast<std::size_t>(r)];
    }
  };
  for (double eps : epsilons) {
    for (int i = 0; i < perEpsilon; ++i) {
      CounterRng rng = base.split(stream++);
      Pomdp p = truth;
      for (Matrix& t : p.transitions) perturb(t, eps, rng);
      for (Matrix& e : p.emissions) perturb(e, eps, rng);
      try {
        models.push_back(lift_weakly_revealing_model(p, m).model);
      } catch (const NotWeaklyRevealing&) {
      }
    }
  }
  return ModelClass(std::move(models), 0);
}

ModelClass preprocess_candidates(const ModelClass& cls, const PreprocessOptions& opts) {
  std::vector<PsrModel> kept;
  std::vector<CandidateFlags> flags;
  std::optional<int> trueIndex;
  for (std::size_t i = 0; i < cls.size(); ++i) {
    CandidateFlags f;
    const ValidationReport v = validate_psr(cls[i], opts.validityTol);
    f.passedValidity = v.valid();
    if (!f.passedValidity) {
      f.passedRegularity = false;
      f.note = v.summary();
      continue;
    }
    RegularityResult reg;
    try {
      reg = regularity_alpha(cls[i]);
      f.measuredAlpha = reg.alpha;
      f.passedRegularity = reg.alpha >= opts.alphaFloor;
    } catch (const RankDeficientPool& e) {
      f.passedRegularity = false;
      f.note = e.what();
    }
    if (!f.passedRegularity) continue;
    PsrModel model = cls[i];
    if (opts.project) {
      std::vector<Matrix> ks;
      for (const CoreMatrix& c : reg.cores) ks.push_back(c.k);
      model = project_parameters(model, ks);
    }
    if (cls.true_index() == static_cast<int>(i)) trueIndex = static_cast<int>(kept.size());
    kept.push_back(std::move(model));
    flags.push_back(f);
  }
  if (kept.empty()) throw InvalidModel("no candidate survived validity and regularity checks");
  ModelClass out(std::move(kept), trueIndex);
  out.flags() = std::move(flags);
  return out;
}

int Dataset::add_policy(std::shared_ptr<const Policy> pi) {
  policies_.push_back(std::move(pi));
  return static_cast<int>(policies_.size()) - 1;
}

void Dataset::append(DataRecord rec) {
  if (rec.policyId < 0 || rec.policyId >= static_cast<int>(policies_.size())) {
    throw InvalidModel("dataset record refers to an unknown policy");
  }
  records_.push_back(std::move(rec));
}

bool ConfidenceSet::contains(int i) const { return std::find(members.begin(), members.end(), i) != members.end(); }

double log_likelihood(const PsrModel& f, const Policy& pi, const Trajectory& tau) {
  const double p = traj_prob(f, pi, tau);
  return p <= kProbFloor ? std::log(kProbFloor) : std::log(p);
}

std::vector<double> total_log_likelihoods(const ModelClass& cls, const Dataset& data) {
  std::vector<double> totals(cls.size(), 0.0);
  for (const DataRecord& rec : data.records()) {
    for (std::size_t i = 0; i < cls.size(); ++i) totals[i] += log_likelihood(cls[i], data.policy(rec.policyId), rec.trajectory);
  }
  return totals;
}

ConfidenceSet confidence_set_from_totals(const std::vector<double>& totals, double beta, int iteration) {
  ConfidenceSet set;
  set.iteration = iteration;
  set.beta = beta;
  if (totals.empty()) return set;
  set.maxLogLikelihood = *std::max_element(totals.begin(), totals.end());
  for (std::size_t i = 0; i < totals.size(); ++i) {
    if (totals[i] >= set.maxLogLikelihood - beta) set.members.push_back(static_cast<int>(i));
  }
  return set;
}

ConfidenceSet update_confidence_set(const ModelClass& cls, const Dataset& data, double beta, int iteration) {
  if (beta < 0.0) throw InvalidModel("beta must be nonnegative");
  return confidence_set_from_totals(total_log_likelihoods(cls, data), beta, iteration);
}

double default_beta(double c, std::size_t classSize, int K, int horizon, int uaSize, double delta) {
  return c * std::log(static_cast<double>(classSize) * K * horizon * uaSize / delta);
}

OptimisticChoice optimistic_plan(const ModelClass& cls, const ConfidenceSet& set,
                                 std::vector<std::optional<PlanResult>>* cache) {
  if (set.members.empty()) throw InvalidModel("optimistic planning over an empty confidence set");
  std::optional<OptimisticChoice> best;
  std::vector<int> members = set.members;
  std::sort(members.begin(), members.end());
  for (int i : members) {
    std::optional<PlanResult> local;
    std::optional<PlanResult>* slot = cache ? &(*cache)[static_cast<std::size_t>(i)] : &local;
    if (!*slot) *slot = optimal_policy(cls[static_cast<std::size_t>(i)]);
    const PlanResult& plan = **slot;
    if (!best || plan.value > best->value) best = OptimisticChoice{i, plan.policy, plan.value};
  }
  return *best;
}

double DiagnosticRecord::tv_max() const {
  double m = 0.0;
  for (double x : tv) m = std::max(m, x);
  return m;
}

double DiagnosticRecord::b_error_max() const {
  double m = 0.0;
  for (const auto& row : bError) {
    for (double x : row) m = std::max(m, x);
  }
  return m;
}

DiagnosticRecord diagnostics_tv_and_b(const PsrModel& fk, const PsrModel& fstar, const std::vector<Policy>& policies,
                                      int depth, std::size_t budget) {
  const int H = fstar.horizon();
  const int O = fstar.obs_count();
  const int A = fstar.act_count();
  const int L = fstar.readout_step();
  depth = std::min(depth, L - 1);
  check_budget(TrajectoryEnumerator::count(H, O, A) * static_cast<double>(policies.size()), budget, "diagnostics");
  DiagnosticRecord rec;
  for (const Policy& pi : policies) {
    double tv = 0.0;
    TrajectoryEnumerator it(H, O, A);
    do {
      const Trajectory& tau = it.current();
      const double p = pi.trajectory_prob(tau);
      if (p == 0.0) continue;
      tv += std::abs(raw_traj_prob(fk, tau) - raw_traj_prob(fstar, tau)) * p;
    } while (it.next());
    rec.tv.push_back(tv);

    std::vector<double> err(static_cast<std::size_t>(depth + 1), 0.0);
    std::vector<double> errPrev(static_cast<std::size_t>(depth + 1), 0.0);
    Trajectory tau;
    std::function<void(int, const Vector&, const Vector&, double)> walk = [&](int h, const Vector& bk, const Vector& b,
                                                                              double w) {
      // bk, b are b_{tau_h}; w = pi(tau_{h-1}) for h >= 1.
      const double diff = (bk - b).cwiseAbs().sum();
      if (h == 0) {
        err[0] += diff;
        errPrev[0] += diff;
      } else {
        errPrev[static_cast<std::size_t>(h)] += w * diff;
        err[static_cast<std::size_t>(h)] +=
            w * pi.prob(h, tau, tau.act.back()) * diff;
      }
      if (h == depth) return;
      for (int o = 0; o < O; ++o) {
        for (int a = 0; a < A; ++a) {
          tau.obs.push_back(o);
          tau.act.push_back(a);
          const double wNext = h == 0 ? 1.0 : w * pi.prob(h, tau.prefix(h), tau.act[static_cast<std::size_t>(h - 1)]);
          if (wNext > 0.0) walk(h + 1, fk.op(o, a, h + 1) * bk, fstar.op(o, a, h + 1) * b, wNext);
          tau.obs.pop_back();
          tau.act.pop_back();
        }
      }
    };
    walk(0, fk.q0(), fstar.q0(), 1.0);
    rec.bError.push_back(std::move(err));
    rec.bErrorPrev.push_back(std::move(errPrev));
  }
  return rec;
}

namespace {

double monte_carlo_value(const Pomdp& truth, const Policy& pi, int episodes, std::uint64_t seed, double& stdErr) {
  Environment env(truth, seed);
  double sum = 0.0;
  double sumSq = 0.0;
  for (int i = 0; i < episodes; ++i) {
    const double r = env.simulate_episode(pi).reward;
    sum += r;
    sumSq += r * r;
  }
  const double mean = sum / episodes;
  const double var = std::max(0.0, sumSq / episodes - mean * mean);
  stdErr = std::sqrt(var / episodes);
  return mean;
}

}  // namespace

RegretTrace crane_run(const Pomdp& truth, const ModelClass& cls, const CraneOptions& opts) {
  RegretTrace trace;
  if (opts.K <= 0) return trace;
  if (cls.empty()) throw InvalidModel("empty model class");
  const std::optional<int> star = cls.true_index();
  const CoreTestSet& core = cls.core_tests();
  const int L = cls[0].readout_step();
  const double enumCount = TrajectoryEnumerator::count(truth.horizon, truth.obsCount, truth.actCount);
  const bool exact = enumCount <= static_cast<double>(opts.budget);

  double vStar = 0.0;
  if (star) {
    vStar = optimal_policy(cls[static_cast<std::size_t>(*star)], opts.budget).value;
  } else {
    vStar = pomdp_optimal_value(truth, opts.budget);
  }

  Environment env(truth, opts.seed);
  Dataset data;
  std::vector<double> totals(cls.size(), 0.0);
  std::vector<std::optional<PlanResult>> plans(cls.size());
  std::vector<std::optional<double>> trueValues(cls.size());
  ConfidenceSet set = confidence_set_from_totals(totals, opts.beta, 1);
  double cumRegret = 0.0;

  for (int k = 1; k <= opts.K; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    TraceRow row;
    row.k = k;
    row.vStar = vStar;
    row.confSetSize = static_cast<int>(set.members.size());
    row.fstarInSet = star && set.contains(*star);

    const OptimisticChoice choice = optimistic_plan(cls, set, &plans);
    row.candidate = choice.candidate;
    row.vOptimistic = choice.value;
    auto& cached = trueValues[static_cast<std::size_t>(choice.candidate)];
    if (!cached) {
      if (star) {
        cached = policy_value(cls[static_cast<std::size_t>(*star)], choice.policy, opts.budget);
      } else if (exact) {
        cached = pomdp_policy_value(truth, choice.policy, opts.budget);
      }
    }
    if (cached) {
      row.vTrue = *cached;
    } else {
      double se = 0.0;
      const CounterRng mc(opts.seed, CounterRng::kExperiment);
      row.vTrue = monte_carlo_value(truth, choice.policy, opts.monteCarloEpisodes, mc.split(static_cast<std::uint64_t>(k))(), se);
      row.vTrueStdErr = se;
    }
    cumRegret += vStar - row.vTrue;
    row.cumRegret = cumRegret;

    // Exploration: one episode per (h, u in U_{A,h+1}).
    auto base = std::make_shared<const Policy>(choice.policy);
    std::vector<Policy> collectors;
    const std::size_t firstNew = data.size();
    for (int h = 0; h < L; ++h) {
      for (const ActionSequence& u : core.action_sequences(h + 1)) {
        auto pi = std::make_shared<const Policy>(compose_exploration_policy(base, h, u));
        const int id = data.add_policy(pi);
        Episode ep = env.simulate_episode(*pi);
        data.append(DataRecord{id, std::move(ep.trajectory), k, h, u});
        if (opts.diagnostics) collectors.push_back(*pi);
      }
    }
    for (std::size_t r = firstNew; r < data.size(); ++r) {
      const DataRecord& rec = data.records()[r];
      for (std::size_t i = 0; i < cls.size(); ++i) totals[i] += log_likelihood(cls[i], data.policy(rec.policyId), rec.trajectory);
    }

    if (opts.diagnostics && star) {
      const DiagnosticRecord d = diagnostics_tv_and_b(cls[static_cast<std::size_t>(choice.candidate)],
                                                      cls[static_cast<std::size_t>(*star)], collectors, L - 1, opts.budget);
      row.tvMax = d.tv_max();
      row.bErrMax = d.b_error_max();
    }

    set = confidence_set_from_totals(totals, opts.beta, k + 1);
    if (opts.timing) {
      row.wallMs = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
    trace.rows.push_back(row);
    trace.policies.push_back(choice.policy);
  }
  trace.datasetSize = data.size();
  return trace;
}

double mixture_policy_eval(const std::vector<Policy>& policies, const PsrModel& trueModel, std::size_t budget) {
  if (policies.empty()) throw InvalidModel("mixture of zero policies");
  double total = 0.0;
  for (const Policy& pi : policies) total += policy_value(trueModel, pi, budget);
  return total / static_cast<double>(policies.size());
}

}  // namespace psrlab
