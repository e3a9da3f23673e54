#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "psrlab/environment.hpp"
#include "psrlab/lift.hpp"
#include "psrlab/psr.hpp"

namespace psrlab {

struct CandidateFlags {
  bool passedValidity = true;
  bool passedRegularity = true;
  double measuredAlpha = 0.0;
  std::string note;
};

/// A finite class of PSR candidates sharing core tests and horizon.
class ModelClass {
 public:
  ModelClass() = default;
  /// Throws InvalidModel when candidates disagree on core tests, horizon or
  /// alphabets.
  explicit ModelClass(std::vector<PsrModel> candidates, std::optional<int> trueIndex = std::nullopt);

  std::size_t size() const noexcept { return candidates_.size(); }
  bool empty() const noexcept { return candidates_.empty(); }
  const PsrModel& operator[](std::size_t i) const { return candidates_.at(i); }
  const std::vector<PsrModel>& candidates() const noexcept { return candidates_; }
  std::vector<CandidateFlags>& flags() noexcept { return flags_; }
  const std::vector<CandidateFlags>& flags() const noexcept { return flags_; }
  /// Index of f* when the true model is a known member.
  std::optional<int> true_index() const noexcept { return trueIndex_; }
  bool realizable() const noexcept { return trueIndex_.has_value(); }

  const CoreTestSet& core_tests() const { return candidates_.at(0).core_tests(); }
  int horizon() const { return candidates_.at(0).horizon(); }

 private:
  std::vector<PsrModel> candidates_;
  std::vector<CandidateFlags> flags_;
  std::optional<int> trueIndex_;
};

/// Every lock sharing alpha, |A| and H, one per good-action sequence over all
/// H steps in lexicographic order, lifted with m = 1. The last good action
/// never influences the process, so candidates come in identical pairs.
ModelClass lock_family(double alpha, int actCount, int horizon, const std::vector<ActId>& trueGoodActions);

/// The lifted truth (index 0) plus `perEpsilon` perturbations for each
/// epsilon: every transition and emission column becomes (1-eps) x + eps d
/// with d ~ Dirichlet(1). Perturbations that fail the lift are skipped.
ModelClass perturbation_grid(const Pomdp& truth, int m, const std::vector<double>& epsilons, int perEpsilon,
                             std::uint64_t seed);

struct PreprocessOptions {
  double validityTol = 1e-8;
  double alphaFloor = 0.0;
  bool project = true;
};

/// Validity check, then regularity (alpha >= floor), then projection onto
/// the measured core-matrix column spaces. Failing candidates are dropped;
/// the returned class keeps f* only if it survives.
ModelClass preprocess_candidates(const ModelClass& cls, const PreprocessOptions& opts = {});

struct DataRecord {
  int policyId = 0;
  Trajectory trajectory;
  int iteration = 0;
  int step = 0;  // h in the exploration policy
  ActionSequence sequence;
};

/// Append-only log of trajectories together with their collecting policies.
class Dataset {
 public:
  int add_policy(std::shared_ptr<const Policy> pi);
  void append(DataRecord rec);
  const std::vector<DataRecord>& records() const noexcept { return records_; }
  const Policy& policy(int id) const { return *policies_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const noexcept { return records_.size(); }

 private:
  std::vector<std::shared_ptr<const Policy>> policies_;
  std::vector<DataRecord> records_;
};

struct ConfidenceSet {
  int iteration = 0;
  std::vector<int> members;
  double beta = 0.0;
  double maxLogLikelihood = 0.0;

  bool contains(int i) const;
};

/// log P^pi_f(tau), with log(kProbFloor) for probabilities at or below the
/// floor.
double log_likelihood(const PsrModel& f, const Policy& pi, const Trajectory& tau);

/// Total log-likelihood of every candidate over the dataset.
std::vector<double> total_log_likelihoods(const ModelClass& cls, const Dataset& data);

/// Members: candidates within beta of the best total. An infinite beta keeps
/// everything.
ConfidenceSet confidence_set_from_totals(const std::vector<double>& totals, double beta, int iteration = 0);
ConfidenceSet update_confidence_set(const ModelClass& cls, const Dataset& data, double beta, int iteration = 0);

/// beta = c log(|F| K H |U_A| / delta).
double default_beta(double c, std::size_t classSize, int K, int horizon, int uaSize, double delta);

struct OptimisticChoice {
  int candidate = 0;
  Policy policy = Policy::uniform(1);
  double value = 0.0;
};

/// Plans on every member and returns the highest value; ties go to the
/// lowest candidate index. `cache`, when given, memoises per-candidate plans.
OptimisticChoice optimistic_plan(const ModelClass& cls, const ConfidenceSet& set,
                                 std::vector<std::optional<PlanResult>>* cache = nullptr);

struct DiagnosticRecord {
  std::vector<double> tv;  // per policy
  /// Per policy and step h = 0..depth: sum over tau_h of pi(tau_h) ||b^k - b||_1.
  std::vector<std::vector<double>> bError;
  /// Same with the weight pi(tau_{h-1}), i.e. without the step-h action.
  std::vector<std::vector<double>> bErrorPrev;
  double tv_max() const;
  double b_error_max() const;
};

DiagnosticRecord diagnostics_tv_and_b(const PsrModel& fk, const PsrModel& fstar, const std::vector<Policy>& policies,
                                      int depth, std::size_t budget = enumeration_budget());

struct TraceRow {
  int k = 0;
  double vStar = 0.0;
  double vTrue = 0.0;
  double vTrueStdErr = 0.0;  // nonzero only for the Monte Carlo fallback
  double vOptimistic = 0.0;
  int confSetSize = 0;
  bool fstarInSet = false;
  double cumRegret = 0.0;
  std::optional<double> tvMax;
  std::optional<double> bErrMax;
  double wallMs = 0.0;
  int candidate = 0;
};

struct RegretTrace {
  std::vector<TraceRow> rows;
  std::vector<Policy> policies;  // pi^k
  std::size_t datasetSize = 0;
};

struct CraneOptions {
  int K = 0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  bool diagnostics = false;
  /// Wall-clock timing makes traces nondeterministic; off by default.
  bool timing = false;
  std::size_t budget = enumeration_budget();
  int monteCarloEpisodes = 10000;
};

/// The CRANE loop against a ground-truth POMDP. Episodes come from an
/// Environment seeded with opts.seed.
RegretTrace crane_run(const Pomdp& truth, const ModelClass& cls, const CraneOptions& opts);

/// (1/K) sum_k V^{pi^k} on the true model.
double mixture_policy_eval(const std::vector<Policy>& policies, const PsrModel& trueModel,
                           std::size_t budget = enumeration_budget());

}  // namespace psrlab
