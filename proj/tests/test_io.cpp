#include <doctest.h>

#include "psrlab/errors.hpp"
#include "psrlab/generators.hpp"
#include "psrlab/io.hpp"
#include "psrlab/lift.hpp"
#include "psrlab/psr.hpp"
#include "support/oracles.hpp"

using namespace psrlab;

TEST_SUITE("io") {
  TEST_CASE("PSR round trip") {
    const PsrModel f = lift_weakly_revealing_model(oracle::random_revealing(2, 3, 2, 4, 0.15, 3), 2).model;
    const Json j = psr_to_json(f);
    const PsrModel g = psr_from_json(parse_json_text(j.dump(), "test"));
    CHECK(g.same_parameters(f));
    CHECK(psr_to_json(g).dump() == j.dump());
  }

  TEST_CASE("PSR parse errors") {
    Json j = psr_to_json(lift_weakly_revealing_model(make_lock(0.1, 2, 3, 1), 1).model);
    SUBCASE("unknown key") {
      j["extra"] = 1;
      CHECK_THROWS_WITH_AS(psr_from_json(j), doctest::Contains("extra"), ParseError);
    }
    SUBCASE("missing operator") {
      j["ops"].erase("1,0,0");
      CHECK_THROWS_AS(psr_from_json(j), ParseError);
    }
    SUBCASE("malformed operator key") {
      j["ops"]["9,0,0"] = j["ops"]["1,0,0"];
      CHECK_THROWS_AS(psr_from_json(j), ParseError);
    }
    SUBCASE("wrong q0 length") {
      j["q0"].push_back(0.0);
      CHECK_THROWS_AS(psr_from_json(j), DimensionMismatch);
    }
    SUBCASE("wrong type") {
      j["H"] = "three";
      CHECK_THROWS_AS(psr_from_json(j), ParseError);
    }
  }

  TEST_CASE("POMDP round trip") {
    const Pomdp p = oracle::random_revealing(3, 2, 2, 3, 0.0, 8);
    const Json j = pomdp_to_json(p);
    CHECK(j["T"].size() == 2);
    CHECK(j["Omission"].size() == 3);
    CHECK(pomdp_from_json(parse_json_text(j.dump(), "test")) == p);
    SUBCASE("a trailing transition step is accepted") {
      Json k = j;
      k["T"].push_back(k["T"][0]);
      CHECK(pomdp_from_json(k) == p);
    }
    SUBCASE("row layout is [s][s'] and [s][o]") {
      CHECK(j["T"][0][1][0][2].get<double>() == p.trans(1, 1)(2, 0));
      CHECK(j["Omission"][2][1][0].get<double>() == p.emit(3)(0, 1));
    }
    SUBCASE("non-stochastic input") {
      Json k = j;
      k["mu1"][0] = 2.0;
      CHECK_THROWS_AS(pomdp_from_json(k), InvalidModel);
    }
    SUBCASE("unknown key") {
      Json k = j;
      k["Emission"] = 0;
      CHECK_THROWS_WITH_AS(pomdp_from_json(k), doctest::Contains("Emission"), ParseError);
    }
  }

  TEST_CASE("generator spec round trip") {
    GeneratorSpec s;
    s.family = GeneratorFamily::RandomLowRank;
    s.stateCount = 5;
    s.dTrans = 2;
    s.seed = 1234567890123ULL;
    s.sigmaFloor = 0.125;
    CHECK(generator_spec_from_json(generator_spec_to_json(s)) == s);
    CHECK_THROWS_AS(generator_spec_from_json(Json{{"family", "lock"}, {"alpah", 0.1}}), ParseError);
    const GeneratorSpec lock = generator_spec_from_json(Json{{"family", "lock"}, {"alpha", 0.2}});
    CHECK(lock.stateCount == 2);
    CHECK(lock.obsCount == 3);
  }

  TEST_CASE("trace CSV round trip") {
    RegretTrace t;
    for (int k = 1; k <= 3; ++k) {
      TraceRow r;
      r.k = k;
      r.vStar = 1.0;
      r.vTrue = 0.1 * k;
      r.vOptimistic = 1.0 / 3.0;
      r.confSetSize = 4 - k;
      r.fstarInSet = k != 2;
      r.cumRegret = 0.9 * k;
      if (k == 3) {
        r.tvMax = 1e-17;
        r.bErrMax = 0.5;
      }
      t.rows.push_back(r);
    }
    const std::string csv = trace_csv(t);
    CHECK(csv.rfind("k,V_star,V_pik_true,V_pik_optimistic,conf_set_size,fstar_in_set,cum_regret,tv_max,b_err_max,wall_ms\n", 0) == 0);
    const auto rows = read_trace_csv(csv);
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(rows[i].k == t.rows[i].k);
      CHECK(rows[i].vTrue == t.rows[i].vTrue);
      CHECK(rows[i].vOptimistic == t.rows[i].vOptimistic);
      CHECK(rows[i].fstarInSet == t.rows[i].fstarInSet);
      CHECK(rows[i].tvMax == t.rows[i].tvMax);
      CHECK(rows[i].bErrMax == t.rows[i].bErrMax);
    }
    CHECK_THROWS_AS(read_trace_csv("k,V_star\n1,2\n"), ParseError);
  }

  TEST_CASE("format_real round-trips doubles") {
    for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0}) CHECK(std::stod(format_real(x)) == x);
  }
}
