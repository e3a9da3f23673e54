#include <doctest.h>

#include <cmath>

#include "psrlab/errors.hpp"
#include "psrlab/generators.hpp"
#include "psrlab/pomdp.hpp"
#include "support/oracles.hpp"

using namespace psrlab;

TEST_SUITE("pomdp") {
  TEST_CASE("single-state POMDP is a product of emissions and policy") {
    Pomdp p = Pomdp::zeros(1, 2, 2, 3);
    p.mu1[0] = 1.0;
    const double e[3][2] = {{0.3, 0.7}, {0.9, 0.1}, {0.5, 0.5}};
    for (int h = 1; h <= 3; ++h) {
      p.emit(h)(0, 0) = e[h - 1][0];
      p.emit(h)(1, 0) = e[h - 1][1];
      if (h < 3) {
        for (int a = 0; a < 2; ++a) p.trans(h, a)(0, 0) = 1.0;
      }
    }
    std::mt19937_64 rng(1);
    const Policy pi = oracle::random_tabular(3, 2, 2, rng);
    for (const Trajectory& tau : oracle::all_trajectories(3, 2, 2)) {
      double expected = pi.trajectory_prob(tau);
      for (int h = 1; h <= 3; ++h) expected *= e[h - 1][tau.obs[static_cast<std::size_t>(h - 1)]];
      CHECK(std::abs(pomdp_traj_prob(p, pi, tau) - expected) < 1e-15);
    }
  }

  TEST_CASE("lock dummy prefix under good actions") {
    for (double alpha : {0.05, 0.1, 0.2}) {
      const double c = std::sqrt(2.0) * alpha;
      for (int A : {2, 3}) {
        const std::vector<int> good{A - 1, 0, 1};
        const Pomdp lock = make_lock(alpha, A, 3, good);
        const Trajectory tau{{kLockDummy, kLockDummy}, {good[0], good[1]}};
        const double expected = (1 - c) * (1 - c) / (A * A);
        CHECK(std::abs(pomdp_traj_prob(lock, Policy::uniform(A), tau) - expected) < 1e-15);
        CHECK(std::abs(oracle::traj_prob(lock, Policy::uniform(A), tau) - expected) < 1e-15);
      }
    }
  }

  TEST_CASE("belief recursion and path sum agree") {
    std::mt19937_64 rng(2);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Pomdp p = oracle::random_revealing(3, 2, 2, 3, 0.0, seed);
      const Policy pi = oracle::random_tabular(3, 2, 2, rng, true);
      for (const Trajectory& tau : oracle::all_trajectories(3, 2, 2)) {
        const double a = pomdp_traj_prob(p, pi, tau);
        CHECK(std::abs(a - pomdp_traj_prob_paths(p, pi, tau)) < 1e-12);
        CHECK(std::abs(a - oracle::traj_prob(p, pi, tau)) < 1e-12);
      }
    }
  }

  TEST_CASE("test probabilities") {
    SUBCASE("unreachable history") {
      const Pomdp lock = make_lock(0.1, 2, 3, std::vector<int>{0, 0, 0});
      CHECK(do_test_prob(lock, Trajectory{{kLockBad}, {0}}, Test{{kLockDummy}, {}}) == 0.0);
    }
    SUBCASE("one-step test from the empty history") {
      const Pomdp p = oracle::random_revealing(3, 3, 2, 2, 0.0, 4);
      for (int o = 0; o < 3; ++o) {
        double expected = 0.0;
        for (int s = 0; s < 3; ++s) expected += p.mu1[s] * p.emit(1)(o, s);
        CHECK(std::abs(do_test_prob(p, Trajectory{}, Test{{o}, {}}) - expected) < 1e-15);
      }
    }
    SUBCASE("two-step tests after one step match the path oracle") {
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Pomdp p = oracle::random_revealing(2, 3, 2, 4, 0.0, 40 + seed);
        for (const Trajectory& tau : oracle::all_trajectories(1, 3, 2)) {
          for (const Test& t : all_tests_of_length(2, 3, 2)) {
            CHECK(std::abs(do_test_prob(p, tau, t) - oracle::test_prob(p, tau, t)) < 1e-12);
          }
        }
      }
    }
    SUBCASE("dummy convention past the horizon") {
      const Pomdp p = oracle::random_revealing(2, 2, 2, 3, 0.0, 9);
      const int dummy = p.dummy_obs();
      for (const Trajectory& tau : oracle::all_trajectories(2, 2, 2)) {
        for (int o = 0; o < 2; ++o) {
          const double truncated = do_test_prob(p, tau, Test{{o}, {}});
          for (int a = 0; a < 2; ++a) {
            CHECK(std::abs(do_test_prob(p, tau, Test{{o, dummy}, {a}}) - truncated) < 1e-15);
            CHECK(do_test_prob(p, tau, Test{{o, 0}, {a}}) == 0.0);
          }
        }
      }
    }
  }

  TEST_CASE("values") {
    SUBCASE("lock optimum is one") {
      CHECK(std::abs(pomdp_optimal_value(make_lock(0.1, 3, 4, 5)) - 1.0) < 1e-12);
    }
    SUBCASE("policy value and optimum against enumeration") {
      std::mt19937_64 rng(3);
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const Pomdp p = oracle::random_revealing(2, 2, 2, 2, 0.0, 70 + seed);
        const Policy pi = oracle::random_tabular(2, 2, 2, rng);
        CHECK(std::abs(pomdp_policy_value(p, pi) - oracle::policy_value(p, pi)) < 1e-12);
        CHECK(std::abs(pomdp_optimal_value(p) - oracle::best_deterministic_value(p)) < 1e-10);
      }
    }
  }

  TEST_CASE("validation") {
    Pomdp p = oracle::random_revealing(2, 2, 2, 2, 0.0, 1);
    CHECK_NOTHROW(p.validate());
    p.mu1[0] += 1e-6;
    CHECK_THROWS_AS(p.validate(), InvalidModel);
  }
}
