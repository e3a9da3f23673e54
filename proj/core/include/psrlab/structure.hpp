#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "psrlab/pomdp.hpp"
#include "psrlab/psr_model.hpp"

namespace psrlab {

/// Row vector over latent states: entry s is P(t | s_h = s, do(t.act)), with
/// the dummy convention past H.
Vector state_test_vector(const Pomdp& pomdp, int h, const Test& t);

/// The m-step emission matrix at step h: rows are the m-step futures in
/// canonical order, columns latent states.
Matrix m_step_emission(const Pomdp& pomdp, int h, int m);

/// sigma_min of m_step_emission(h, m) for h = 1..H-m+1.
std::vector<double> weakly_revealing_sigma(const Pomdp& pomdp, int m);

/// Every test of `length` starting at step `start`, in canonical order, with
/// positions past H carrying only the dummy observation.
std::vector<Test> tests_starting_at(const Pomdp& pomdp, int start, int length);

struct SystemDynamicsMatrix {
  int step = 0;  // histories have `step` (o, a) pairs
  std::vector<Test> tests;
  std::vector<Trajectory> histories;
  Matrix values;  // tests x histories, entries P(t | tau)
};

/// Tests of length 1..maxTestLen starting at step h+1 (only the dummy id past
/// H) against all histories of h steps. Throws BudgetExceeded.
SystemDynamicsMatrix system_dynamics_matrix(const Pomdp& pomdp, int h, int maxTestLen,
                                            std::size_t budget = enumeration_budget());

int psr_rank(const SystemDynamicsMatrix& d, double svdTol = kSvdTol);

/// d_PSR,h for h = 0..H-1 using every test that fits before the horizon.
std::vector<int> psr_rank_profile(const Pomdp& pomdp, std::size_t budget = enumeration_budget());

enum class RegularityMode { Exhaustive, Greedy, Auto };

struct CoreMatrix {
  int step = 0;  // K_h: histories of h steps, rows over U_{h+1}
  Matrix k;
  std::vector<Trajectory> histories;
  double pinvNorm = 0.0;  // ||K^+||_{1->1}
};

struct RegularityResult {
  std::vector<CoreMatrix> cores;  // one per assessed step, h = 0, 1, ...
  double alpha = 0.0;
  int poolDepth = 0;
  RegularityMode modeUsed = RegularityMode::Exhaustive;
};

/// Subset searches larger than this fall back to greedy in Auto mode.
inline constexpr double kExhaustiveSubsetCap = 20000;

/// Chooses core histories per step among reachable histories of steps
/// 0..min(poolDepth, L-1) (negative depth: all), minimising ||K_h^+||, and
/// returns alpha = min_h 1/||K_h^+||. Throws RankDeficientPool if a pool has
/// rank 0.
RegularityResult regularity_alpha(const PsrModel& model, int poolDepth = -1,
                                  RegularityMode mode = RegularityMode::Auto,
                                  std::size_t budget = enumeration_budget());

/// Columns of `pool` indexed by `chosen`, with their pseudoinverse norm.
double core_pinv_norm(const Matrix& pool, const std::vector<int>& chosen);

/// Exhaustive minimum of ||K^+||_{1->1} over size-d column subsets of rank d.
std::pair<std::vector<int>, double> min_norm_subset_exhaustive(const Matrix& pool, int d);
/// Pivoted selection on the largest smallest singular value, then swaps.
std::pair<std::vector<int>, double> min_norm_subset_greedy(const Matrix& pool, int d);

/// Deterministic window-to-state map for an m-step decodable POMDP. A
/// window at step h is (o_s, a_s, ..., a_{h-1}, o_h) with s = max(h-m+1, 1).
struct Decoder {
  int m = 1;
  std::map<std::pair<int, std::vector<int>>, int> states;

  std::optional<int> decode(int step, const std::vector<int>& window) const;
  bool operator==(const Decoder&) const = default;
};

/// The window ending at step h read out of `tau` (which covers step h).
std::vector<int> decoding_window(const Trajectory& tau, int h, int m);

struct DecodabilityResult {
  bool decodable = false;
  std::optional<Decoder> decoder;
  int failingStep = 0;  // first step with an ambiguous window when not decodable
};

/// Forward enumeration of reachable (window, state) pairs.
DecodabilityResult decodability_check(const Pomdp& pomdp, int m, std::size_t budget = enumeration_budget());

}  // namespace psrlab
