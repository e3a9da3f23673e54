#include <doctest.h>

#include <filesystem>

#include "psrlab/errors.hpp"
#include "psrlab/experiment.hpp"
#include "psrlab/generators.hpp"
#include "psrlab/io.hpp"
#include "psrlab/lift.hpp"
#include "support/oracles.hpp"

using namespace psrlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("psrlab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Json minimal_config() {
  return Json::parse(R"({
    "environment": {"generator": {"family": "lock", "alpha": 0.2, "A": 2, "H": 3}},
    "modelClass": {"kind": "lock-family"},
    "K": 4,
    "seeds": [1, 2, 3]
  })");
}

std::vector<fs::path> csv_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".csv") out.push_back(e.path().filename());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("config defaults") {
    const ExperimentConfig cfg = parse_config_json(minimal_config());
    CHECK(cfg.betaC == 1.0);
    CHECK(cfg.delta == 0.05);
    CHECK_FALSE(cfg.diagnostics);
    CHECK(cfg.alphaFloor == 0.0);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2, 3});
  }

  TEST_CASE("config strictness") {
    SUBCASE("misspelled key") {
      Json j = minimal_config();
      j["betta"] = 2.0;
      CHECK_THROWS_WITH_AS(parse_config_json(j), doctest::Contains("betta"), ParseError);
    }
    SUBCASE("nested misspelling") {
      Json j = minimal_config();
      j["modelClass"]["dri"] = "x";
      CHECK_THROWS_WITH_AS(parse_config_json(j), doctest::Contains("dri"), ParseError);
    }
    SUBCASE("empty seed list") {
      Json j = minimal_config();
      j["seeds"] = Json::array();
      CHECK_THROWS_AS(parse_config_json(j), ParseError);
    }
    SUBCASE("delta outside (0, 1]") {
      Json j = minimal_config();
      j["delta"] = 0.0;
      CHECK_THROWS_AS(parse_config_json(j), ParseError);
      j["delta"] = 1.5;
      CHECK_THROWS_AS(parse_config_json(j), ParseError);
    }
    SUBCASE("both environment kinds") {
      Json j = minimal_config();
      j["environment"]["file"] = "x.json";
      CHECK_THROWS_AS(parse_config_json(j), ParseError);
    }
    SUBCASE("file parsing") {
      const fs::path dir = scratch("badjson");
      write_text_file(dir / "c.json", "{\"K\": 3,");
      CHECK_THROWS_AS(parse_config(dir / "c.json"), ParseError);
      CHECK_THROWS_AS(parse_config(dir / "missing.json"), ParseError);
    }
  }

  TEST_CASE("config round trip") {
    const ExperimentConfig acceptance = parse_config(fs::path(PSRLAB_SOURCE_DIR) / "configs" / "acceptance_lock.json");
    CHECK(parse_config_json(serialize_config(acceptance)) == acceptance);
    CHECK(serialize_config(parse_config_json(serialize_config(acceptance))).dump() == serialize_config(acceptance).dump());
    ExperimentConfig grid = acceptance;
    grid.modelClass.kind = ClassKind::PerturbationGrid;
    grid.modelClass.epsilons = {0.05, 0.1};
    grid.modelClass.perEpsilon = 3;
    grid.modelClass.seed = 17;
    CHECK(parse_config_json(serialize_config(grid)) == grid);
    CHECK(config_hash(grid) != config_hash(acceptance));
    ExperimentConfig moved = acceptance;
    moved.outputDir = "elsewhere";
    moved.workers = 7;
    CHECK(config_hash(moved) == config_hash(acceptance));
  }

  TEST_CASE("zero iterations") {
    const fs::path dir = scratch("k0");
    ExperimentConfig cfg = parse_config_json(minimal_config());
    cfg.K = 0;
    cfg.seeds = {5};
    cfg.outputDir = dir.string();
    const SummaryReport r = run_experiment(cfg);
    REQUIRE(r.seeds.size() == 1);
    CHECK(r.seeds[0].iterations == 0);
    CHECK(r.failures.empty());
    CHECK(read_trace_csv(read_text_file(dir / trace_file_name(5))).empty());
  }

  TEST_CASE("determinism across runs and worker counts") {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    ExperimentConfig cfg = parse_config_json(minimal_config());
    cfg.diagnostics = true;
    cfg.outputDir = a.string();
    cfg.workers = 1;
    const SummaryReport ra = run_experiment(cfg);
    cfg.outputDir = b.string();
    cfg.workers = 3;
    const SummaryReport rb = run_experiment(cfg);
    const auto files = csv_files(a);
    REQUIRE(files.size() == 3);
    CHECK(files == csv_files(b));
    for (const auto& f : files) CHECK(read_text_file(a / f) == read_text_file(b / f));
    CHECK(read_text_file(a / "summary.json") == read_text_file(b / "summary.json"));
    CHECK(summary_to_json(ra).dump() == summary_to_json(rb).dump());
  }

  TEST_CASE("summaries are recomputable from the traces") {
    const fs::path dir = scratch("summ");
    ExperimentConfig cfg = parse_config_json(minimal_config());
    cfg.outputDir = dir.string();
    const std::string before = summary_to_json(run_experiment(cfg)).dump(2) + "\n";
    CHECK(read_text_file(dir / "summary.json") == before);
    fs::remove(dir / "summary.json");
    CHECK(summary_to_json(summarize(dir)).dump(2) + "\n" == before);
    CHECK(read_text_file(dir / "summary.json") == before);
  }

  TEST_CASE("failures are recorded and other seeds survive") {
    const fs::path dir = scratch("fail");
    const fs::path models = dir / "models";
    fs::create_directories(models);
    // A class whose horizon disagrees with the environment fails inside the run.
    write_text_file(models / "a.json", psr_to_json(lift_weakly_revealing_model(make_lock(0.2, 2, 2, 1), 1).model).dump());
    ExperimentConfig cfg = parse_config_json(minimal_config());
    cfg.modelClass.kind = ClassKind::Files;
    cfg.modelClass.dir = models.string();
    cfg.outputDir = (dir / "out").string();
    const SummaryReport r = run_experiment(cfg);
    CHECK(r.seeds.empty());
    CHECK(r.failures.size() == 3);
    const Json f = parse_json_text(read_text_file(dir / "out" / "failures.json"), "failures");
    CHECK(f.size() == 3);
  }

  TEST_CASE("quartiles") {
    const Quartiles q = quartiles({4.0, 1.0, 3.0, 2.0, 5.0});
    CHECK(q.median == 3.0);
    CHECK(q.q1 == 2.0);
    CHECK(q.q3 == 4.0);
    CHECK(q.iqr() == 2.0);
    CHECK(quartiles({}).median == 0.0);
    CHECK(quartiles({1.0, 2.0}).median == 1.5);
  }

  TEST_CASE("diagnose") {
    const fs::path dir = scratch("diag");
    SUBCASE("lock file") {
      write_text_file(dir / "lock.json", pomdp_to_json(make_lock(0.1, 2, 3, 3)).dump());
      const Json r = diagnose_model(dir / "lock.json", 1);
      CHECK(r["dPsrMax"].get<int>() == 2);
      const auto sig = r["sigmaMin"].get<std::vector<double>>();
      for (std::size_t h = 0; h + 1 < sig.size(); ++h) CHECK(sig[h] >= 0.1414);
      CHECK(r["alpha"].get<double>() >= 0.1);
      CHECK(r["validity"]["valid"].get<bool>());
    }
    SUBCASE("single state") {
      write_text_file(dir / "one.json", pomdp_to_json(oracle::random_revealing(1, 3, 2, 3, 0.0, 4)).dump());
      const Json r = diagnose_model(dir / "one.json", 1);
      CHECK(r["dPsrMax"].get<int>() == 1);
      CHECK(r["alpha"].get<double>() > 0.0);
    }
    SUBCASE("invalid PSR file") {
      const PsrModel f = lift_weakly_revealing_model(make_lock(0.1, 2, 3, 3), 1).model;
      write_text_file(dir / "bad.json", psr_to_json(f.with_q0(f.q0() * 1.01)).dump());
      const Json r = diagnose_model(dir / "bad.json", 1);
      CHECK_FALSE(r["validity"]["valid"].get<bool>());
      CHECK(std::abs(r["validity"]["massError"].get<double>() - 0.01) < 1e-9);
    }
    SUBCASE("not JSON") {
      write_text_file(dir / "x.json", "nope");
      CHECK_THROWS_AS(diagnose_model(dir / "x.json", 1), ParseError);
    }
  }
}
