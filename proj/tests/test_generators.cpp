#include <doctest.h>

#include <cmath>
#include <map>

#include <boost/math/distributions/chi_squared.hpp>

#include "psrlab/environment.hpp"
#include "psrlab/errors.hpp"
#include "psrlab/generators.hpp"
#include "psrlab/lift.hpp"
#include "psrlab/linalg.hpp"
#include "psrlab/psr.hpp"
#include "psrlab/structure.hpp"
#include "support/oracles.hpp"

using namespace psrlab;

TEST_SUITE("generators") {
  TEST_CASE("lock emissions") {
    const Pomdp lock = make_lock(0.1, 2, 3, std::uint64_t{7});
    for (int h = 1; h < 3; ++h) {
      CHECK(std::abs(lock.emit(h)(kLockGood, 0) - 0.1414214) < 1e-7);
      CHECK(std::abs(lock.emit(h)(kLockDummy, 0) - 0.8585786) < 1e-7);
      CHECK(std::abs(lock.emit(h)(kLockBad, 1) - 0.1414214) < 1e-7);
      CHECK(std::abs(lock.emit(h)(kLockDummy, 1) - 0.8585786) < 1e-7);
    }
    CHECK_NOTHROW(lock.validate());
  }

  TEST_CASE("lock optimum and lifted q0") {
    for (double alpha : {0.01, 0.1, 0.3}) {
      for (int A : {1, 2, 3}) {
        for (int H : {1, 2, 4}) {
          const Pomdp lock = make_lock(alpha, A, H, static_cast<std::uint64_t>(A * 10 + H));
          CHECK(std::abs(pomdp_optimal_value(lock) - 1.0) < 1e-12);
          const PsrModel f = lift_weakly_revealing_model(lock, 1).model;
          CHECK(std::abs(optimal_policy(f).value - 1.0) < 1e-12);
          const double c = std::sqrt(2.0) * alpha;
          if (H > 1) {
            CHECK(f.q0()[0] == c);
            CHECK(f.q0()[1] == 0.0);
            CHECK(f.q0()[2] == 1.0 - c);
          }
        }
      }
    }
  }

  TEST_CASE("lock alpha range") {
    CHECK_THROWS_AS(make_lock(0.0, 2, 3, std::uint64_t{1}), InvalidAlpha);
    CHECK_THROWS_AS(make_lock(1.0 / (2.0 * std::sqrt(2.0)), 2, 3, std::uint64_t{1}), InvalidAlpha);
    CHECK_THROWS_AS(make_lock(-0.1, 2, 3, std::uint64_t{1}), InvalidAlpha);
  }

  TEST_CASE("lock structure") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const double alpha = 0.02 + 0.03 * static_cast<double>(seed % 9);
      const int H = 2 + static_cast<int>(seed % 3);
      const Pomdp lock = make_lock(alpha, 2, H, seed);
      const DecodabilityResult d = decodability_check(lock, 1);
      if (H == 2) {
        // The last step reveals the state exactly and step 1 has one state.
        CHECK(d.decodable);
      } else {
        CHECK_FALSE(d.decodable);
        CHECK(d.failingStep < H);
      }
      const auto sig = weakly_revealing_sigma(lock, 1);
      for (int h = 0; h < H - 1; ++h) CHECK(sig[static_cast<std::size_t>(h)] >= std::sqrt(2.0) * alpha - 1e-12);
    }
  }

  TEST_CASE("random POMDPs") {
    SUBCASE("single state passes any feasible gate; sigma is the column norm") {
      GeneratorSpec spec;
      spec.stateCount = 1;
      spec.obsCount = 3;
      spec.horizon = 3;
      spec.sigmaFloor = 0.5;
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        spec.seed = seed;
        const Pomdp p = random_pomdp(spec);
        const auto sig = weakly_revealing_sigma(p, 1);
        for (int h = 1; h <= 3; ++h) CHECK(std::abs(sig[static_cast<std::size_t>(h - 1)] - p.emit(h).col(0).norm()) < 1e-12);
      }
    }
    SUBCASE("reproducible") {
      GeneratorSpec spec;
      spec.stateCount = 2;
      spec.obsCount = 3;
      spec.sigmaFloor = 0.2;
      spec.seed = 42;
      CHECK(random_pomdp(spec) == random_pomdp(spec));
      spec.seed = 43;
      const Pomdp other = random_pomdp(spec);
      spec.seed = 42;
      CHECK_FALSE(random_pomdp(spec) == other);
    }
    SUBCASE("impossible gate") {
      GeneratorSpec spec;
      spec.sigmaFloor = 1.01;
      spec.maxRetries = 50;
      CHECK_THROWS_AS(random_pomdp(spec), GenerationFailed);
    }
    SUBCASE("gate is honoured") {
      GeneratorSpec spec;
      spec.stateCount = 3;
      spec.obsCount = 3;
      spec.sigmaFloor = 0.15;
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        spec.seed = seed;
        for (double s : weakly_revealing_sigma(random_pomdp(spec), 1)) CHECK(s >= 0.15);
      }
    }
  }

  TEST_CASE("low-rank POMDPs") {
    GeneratorSpec spec;
    spec.family = GeneratorFamily::RandomLowRank;
    spec.stateCount = 5;
    spec.obsCount = 3;
    spec.horizon = 3;
    SUBCASE("rank one transitions share one next-state law per step") {
      spec.dTrans = 1;
      const LowRankPomdp g = random_lowrank_pomdp(spec);
      for (int h = 1; h < 3; ++h) {
        const Vector first = g.pomdp.trans(h, 0).col(0);
        for (int a = 0; a < 2; ++a) {
          for (int s = 0; s < 5; ++s) CHECK((g.pomdp.trans(h, a).col(s) - first).lpNorm<Eigen::Infinity>() < 1e-15);
        }
      }
      for (int r : psr_rank_profile(g.pomdp)) CHECK(r <= 1);
    }
    SUBCASE("rank two") {
      spec.dTrans = 2;
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        spec.seed = seed;
        const LowRankPomdp g = random_lowrank_pomdp(spec);
        CHECK_NOTHROW(g.pomdp.validate());
        for (int r : psr_rank_profile(g.pomdp)) CHECK(r <= 2);
      }
    }
    SUBCASE("same seed twice") {
      spec.dTrans = 2;
      spec.seed = 9;
      CHECK(random_lowrank_pomdp(spec).pomdp == random_lowrank_pomdp(spec).pomdp);
    }
  }

  TEST_CASE("decodable generator") {
    GeneratorSpec spec;
    spec.family = GeneratorFamily::RandomDecodable;
    spec.stateCount = 3;
    spec.obsCount = 3;
    spec.horizon = 3;
    spec.m = 1;
    const DecodablePomdp g = random_decodable(spec);
    CHECK_NOTHROW(g.pomdp.validate());
    CHECK(decodability_check(g.pomdp, 1).decodable);
    CHECK(random_decodable(spec).pomdp == g.pomdp);
    spec.obsCount = 2;
    CHECK_THROWS_AS(random_decodable(spec), GenerationFailed);
  }

  TEST_CASE("family names") {
    for (GeneratorFamily f : {GeneratorFamily::Lock, GeneratorFamily::RandomRevealing, GeneratorFamily::RandomDecodable,
                              GeneratorFamily::RandomLowRank}) {
      CHECK(parse_generator_family(to_string(f)) == f);
    }
    CHECK_THROWS_AS(parse_generator_family("lockk"), ParseError);
  }
}

TEST_SUITE("environment") {
  TEST_CASE("deterministic POMDP and policy give one trajectory") {
    Pomdp p = Pomdp::zeros(2, 2, 2, 3);
    p.mu1[1] = 1.0;
    for (int h = 1; h <= 3; ++h) p.emit(h) = Matrix::Identity(2, 2);
    for (int h = 1; h < 3; ++h) {
      for (int a = 0; a < 2; ++a) {
        p.trans(h, a)(0, 0) = 1.0;
        p.trans(h, a)(0, 1) = 1.0;
      }
    }
    p.rewards.set(3, 0, 1, 2.0);
    Environment env(p, 5);
    const Policy pi = Policy::fixed_sequence(2, 1, {1, 0, 1});
    for (int i = 0; i < 20; ++i) {
      const Episode e = env.simulate_episode(pi);
      CHECK(e.trajectory == Trajectory{{1, 0, 0}, {1, 0, 1}});
      CHECK(e.reward == 2.0);
    }
  }

  TEST_CASE("lock good policy always earns one") {
    const std::vector<int> good{1, 0, 1, 1};
    Environment env(make_lock(0.05, 2, 4, good), 3);
    const Policy pi = Policy::fixed_sequence(2, 1, good);
    for (int i = 0; i < 1000; ++i) CHECK(env.simulate_episode(pi).reward == 1.0);
  }

  TEST_CASE("step interface") {
    Environment env(make_lock(0.1, 2, 2, std::vector<int>{0, 0}), 1);
    const ObsId o1 = env.reset();
    CHECK((o1 == kLockGood || o1 == kLockDummy));
    double r = 0.0;
    const ObsId o2 = env.step(0, r);
    CHECK(r == 0.0);
    CHECK(o2 == kLockGood);
    CHECK(env.step(1, r) == env.pomdp().dummy_obs());
    CHECK(r == 1.0);
  }

  TEST_CASE("episode streams are seed-deterministic") {
    const Pomdp p = oracle::random_revealing(3, 2, 3, 4, 0.0, 2);
    Environment a(p, 77), b(p, 77), c(p, 78);
    bool differs = false;
    for (int i = 0; i < 50; ++i) {
      const Episode ea = a.simulate_episode(Policy::uniform(3));
      CHECK(ea.trajectory == b.simulate_episode(Policy::uniform(3)).trajectory);
      differs = differs || !(ea.trajectory == c.simulate_episode(Policy::uniform(3)).trajectory);
    }
    CHECK(differs);
  }

  TEST_CASE("empirical law matches the trajectory probabilities") {
    const Pomdp p = oracle::random_revealing(2, 2, 2, 3, 0.0, 123);
    const Policy pi = Policy::uniform(2);
    const int n = 200000;
    std::map<Trajectory, int> counts;
    Environment env(p, 2024);
    for (int i = 0; i < n; ++i) ++counts[env.simulate_episode(pi).trajectory];
    double chi2 = 0.0;
    int cells = 0;
    for (const Trajectory& tau : oracle::all_trajectories(3, 2, 2)) {
      const double prob = pomdp_traj_prob(p, pi, tau);
      const double observed = counts.count(tau) ? counts[tau] : 0.0;
      const double expected = n * prob;
      if (prob >= 0.001) {
        const double sd = std::sqrt(n * prob * (1 - prob));
        CHECK(std::abs(observed - expected) <= 4.0 * sd);
      }
      if (expected > 0.0) {
        chi2 += (observed - expected) * (observed - expected) / expected;
        ++cells;
      }
    }
    const boost::math::chi_squared dist(cells - 1);
    CHECK(boost::math::cdf(boost::math::complement(dist, chi2)) > 0.001);
  }
}
