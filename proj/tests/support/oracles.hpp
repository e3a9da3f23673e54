#pragma once

// Brute-force reference implementations. They deliberately share no code
// with the library's recursions: probabilities come from explicit sums over
// latent state paths, ranks from LU, pseudoinverses from normal equations.

#include <cstdint>
#include <random>
#include <vector>

#include "psrlab/generators.hpp"
#include "psrlab/linalg.hpp"
#include "psrlab/policy.hpp"
#include "psrlab/pomdp.hpp"
#include "psrlab/psr_model.hpp"

namespace oracle {

using psrlab::Matrix;
using psrlab::Policy;
using psrlab::Pomdp;
using psrlab::Trajectory;
using psrlab::Test;
using psrlab::Vector;

/// P(o_1..o_n | do(a_1..a_{n-1})) as a sum over every latent path. Steps
/// past H emit the dummy observation (id obsCount) with probability one.
double do_prob(const Pomdp& p, const std::vector<int>& obs, const std::vector<int>& act);

/// P^pi(tau) = do_prob * prod_h pi(a_h | ...), with the policy evaluated
/// step by step from its distribution.
double traj_prob(const Pomdp& p, const Policy& pi, const Trajectory& tau);

/// P(t | tau) = do_prob(tau, t) / do_prob(tau); 0 when the history has
/// probability below 1e-12.
double test_prob(const Pomdp& p, const Trajectory& tau, const Test& t);

/// sum_tau P^pi(tau) sum_h r_h(o_h, a_h) by enumerating every trajectory.
double policy_value(const Pomdp& p, const Policy& pi);

/// Maximum of policy_value over every deterministic tabular policy.
double best_deterministic_value(const Pomdp& p);

/// Same two quantities on a PSR, with probabilities from explicit operator
/// products (no normalisation, no caching).
double psr_do_prob(const psrlab::PsrModel& f, const Trajectory& tau);
double psr_policy_value(const psrlab::PsrModel& f, const Policy& pi);
double psr_best_deterministic_value(const psrlab::PsrModel& f);

/// Numerical rank by full-pivot LU with a relative threshold.
int lu_rank(const Matrix& m, double relTol = 1e-8);

/// ||K^+||_{1->1} via (K^T K)^{-1} K^T; +inf if K^T K is singular.
double normal_eq_pinv_norm(const Matrix& k);

/// min over size-d column subsets of the pool of normal_eq_pinv_norm.
double min_subset_pinv_norm(const Matrix& pool, int d);

/// sum over tau_{j1:j2} of ||M_{o_j2,a_j2,j2} ... M_{o_j1,a_j1,j1} x||_1
/// weighted by the uniform policy (1/A)^(j2-j1+1).
double norm_bound_lhs(const psrlab::PsrModel& f, const Vector& x, int j1, int j2);

/// Spearman rank correlation with average ranks for ties; NaN when either
/// input is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Random tabular policy with Dirichlet(1)-like rows drawn from `rng`.
Policy random_tabular(int H, int O, int A, std::mt19937_64& rng, bool deterministic = false);

/// Random POMDP from the library generator (tests of the generator itself
/// check its statistics separately).
Pomdp random_revealing(int S, int O, int A, int H, double floor, std::uint64_t seed);

/// Every trajectory of n steps with n observations and `actsPerStep`
/// actions (n or n-1).
std::vector<Trajectory> all_trajectories(int n, int O, int A, bool trailingAction = true);

}  // namespace oracle
