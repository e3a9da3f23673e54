#include <doctest.h>

#include <cmath>

#include "psrlab/errors.hpp"
#include "psrlab/generators.hpp"
#include "psrlab/lift.hpp"
#include "psrlab/psr.hpp"
#include "support/oracles.hpp"

using namespace psrlab;

namespace {

// Largest |<m_{t,h}, q_tau> - P(t | tau)| over reachable tau of h-1 steps and
// every test of the given lengths, with P from the path oracle.
double oracle_residual(const Lifting& lift, int h, int maxLen) {
  const Pomdp& p = lift.pomdp;
  double worst = 0.0;
  for (const Trajectory& tau : oracle::all_trajectories(h - 1, p.obsCount, p.actCount)) {
    if (oracle::do_prob(p, tau.obs, tau.act) < 1e-12) continue;
    const Vector q = predictive_state(lift.model, tau);
    for (int len = 1; len <= maxLen && h + len - 1 <= p.horizon; ++len) {
      for (const Test& t : all_tests_of_length(len, p.obsCount, p.actCount)) {
        worst = std::max(worst, std::abs(lift.test_coefficients(h, t).dot(q) - oracle::test_prob(p, tau, t)));
      }
    }
  }
  return worst;
}

}  // namespace

TEST_SUITE("lift") {
  TEST_CASE("fully observed lift recovers the transitions") {
    Pomdp p = oracle::random_revealing(3, 3, 2, 3, 0.0, 12);
    for (int h = 1; h <= 3; ++h) p.emit(h) = Matrix::Identity(3, 3);
    const PsrModel f = lift_weakly_revealing_model(p, 1).model;
    for (int h = 1; h < 3; ++h) {
      for (int o = 0; o < 3; ++o) {
        for (int a = 0; a < 2; ++a) {
          const Matrix& m = f.op(o, a, h);
          for (int u = 0; u < 3; ++u) {
            for (int c = 0; c < 3; ++c) {
              const double expected = c == o ? p.trans(h, a)(u, o) : 0.0;
              CHECK(std::abs(m(u, c) - expected) < 1e-12);
            }
          }
        }
      }
    }
  }

  TEST_CASE("lock lift") {
    for (double alpha : {0.05, 0.1, 0.2}) {
      const LiftReport r = lift_weakly_revealing(make_lock(alpha, 2, 3, 11), 1);
      const double c = std::sqrt(2.0) * alpha;
      for (std::size_t h = 0; h + 1 < r.sigmaMin.size(); ++h) CHECK(r.sigmaMin[h] >= c - 1e-12);
      CHECK(r.model.q0()[kLockGood] == c);
      CHECK(r.model.q0()[kLockBad] == 0.0);
      CHECK(r.model.q0()[kLockDummy] == 1.0 - c);
    }
  }

  TEST_CASE("linearity on random revealing POMDPs") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      const Pomdp p = oracle::random_revealing(2, 3, 2, 3, 0.15, 1000 + seed);
      const Lifting lift = lift_weakly_revealing_model(p, 1);
      for (int h = 1; h <= lift.model.readout_step(); ++h) {
        CHECK(oracle_residual(lift, h, 2) < 1e-8);
        CHECK(linearity_residual(lift, h, 2) < 1e-8);
      }
    }
  }

  TEST_CASE("m = 2 weakly revealing lift") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      GeneratorSpec spec;
      spec.stateCount = 3;
      spec.obsCount = 2;
      spec.actCount = 2;
      spec.horizon = 4;
      spec.m = 2;
      spec.sigmaFloor = 0.05;
      spec.seed = seed;
      const Pomdp p = random_pomdp(spec);
      const Lifting lift = lift_weakly_revealing_model(p, 2);
      CHECK(lift.model.readout_step() == 3);
      for (int h = 1; h <= 3; ++h) CHECK(oracle_residual(lift, h, 2) < 1e-8);
      std::mt19937_64 rng(seed);
      const Policy pi = oracle::random_tabular(4, 2, 2, rng);
      for (const Trajectory& tau : oracle::all_trajectories(4, 2, 2)) {
        CHECK(std::abs(traj_prob(lift.model, pi, tau) - oracle::traj_prob(p, pi, tau)) < 1e-8);
      }
    }
  }

  TEST_CASE("decodable lifts") {
    SUBCASE("block MDP with one-step windows") {
      GeneratorSpec spec;
      spec.family = GeneratorFamily::RandomDecodable;
      spec.stateCount = 2;
      spec.obsCount = 4;
      spec.actCount = 2;
      spec.horizon = 3;
      spec.m = 1;
      spec.seed = 3;
      const DecodablePomdp g = random_decodable(spec);
      const Lifting lift = lift_decodable_model(g.pomdp, 1, g.decoder);
      for (int h = 1; h <= 3; ++h) {
        for (int o = 0; o < 4; ++o) {
          const Vector m = lift.test_coefficients(h, Test{{o}, {}});
          Vector e = Vector::Zero(m.size());
          e[lift.model.core_tests().index_of(h, Test{{o}, {}})] = 1.0;
          CHECK(m == e);
        }
        CHECK(oracle_residual(lift, h, 2) < 1e-8);
      }
    }
    SUBCASE("two-step decodable instance") {
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        GeneratorSpec spec;
        spec.family = GeneratorFamily::RandomDecodable;
        spec.stateCount = 2;
        spec.obsCount = 2;
        spec.actCount = 2;
        spec.horizon = 4;
        spec.m = 2;
        spec.seed = 20 + seed;
        const DecodablePomdp g = random_decodable(spec);
        const Lifting lift = lift_decodable_model(g.pomdp, 2);
        for (int h = 1; h <= lift.model.readout_step(); ++h) {
          CHECK(linearity_residual(lift, h, 3) < 1e-8);
          CHECK(oracle_residual(lift, h, 3) < 1e-8);
        }
        std::mt19937_64 rng(seed);
        const Policy pi = oracle::random_tabular(4, 2, 2, rng);
        for (const Trajectory& tau : oracle::all_trajectories(4, 2, 2)) {
          CHECK(std::abs(traj_prob(lift.model, pi, tau) - oracle::traj_prob(g.pomdp, pi, tau)) < 1e-8);
        }
      }
    }
    SUBCASE("ambiguous windows") {
      Pomdp p = oracle::random_revealing(2, 2, 2, 3, 0.0, 6);
      for (int h = 1; h <= 3; ++h) p.emit(h).col(1) = p.emit(h).col(0);
      CHECK_THROWS_AS(lift_decodable(p, 1), NotDecodable);
    }
  }

  TEST_CASE("lift report") {
    const LiftReport r = lift_weakly_revealing(oracle::random_revealing(2, 2, 2, 3, 0.15, 4), 1);
    CHECK(r.residuals.size() == 3);
    CHECK(r.dPsr.size() == 3);
    for (const auto& x : r.residuals) {
      REQUIRE(x);
      CHECK(*x < 1e-8);
    }
    for (const auto& d : r.dPsr) {
      REQUIRE(d);
      CHECK(*d <= 2);
    }
    REQUIRE(r.alpha);
    CHECK(*r.alpha > 0.0);
    CHECK(validate_psr(r.model).valid());
  }
}
