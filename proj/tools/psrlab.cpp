// psrlab command-line front end. Every subcommand prints JSON (or CSV for
// traces) to --out or stdout.

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "psrlab/crane.hpp"
#include "psrlab/environment.hpp"
#include "psrlab/errors.hpp"
#include "psrlab/experiment.hpp"
#include "psrlab/generators.hpp"
#include "psrlab/io.hpp"
#include "psrlab/lift.hpp"
#include "psrlab/structure.hpp"

using namespace psrlab;

namespace {

enum Exit { kOk = 0, kOther = 1, kParse = 2, kBudget = 3, kModel = 4 };

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::ParseError:
    case ErrorKind::InvalidAlpha:  // a bad parameter value, like a bad flag
      return kParse;
    case ErrorKind::BudgetExceeded: return kBudget;
    case ErrorKind::InvalidModel:
    case ErrorKind::NotWeaklyRevealing:
    case ErrorKind::NotDecodable:
    case ErrorKind::UnreachableHistory:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::RankDeficientPool:
      return kModel;
    default: return kOther;
  }
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_text_file(out, text);
  }
}

Json load_json(const std::string& path) { return parse_json_text(read_text_file(path), path); }

Pomdp load_pomdp(const std::string& path) { return pomdp_from_json(load_json(path)); }

std::vector<int> parse_id_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::logic_error&) {
      throw ParseError("bad integer \"" + item + "\" in list \"" + s + "\"");
    }
  }
  return out;
}

// Model class named on the command line: a directory of PSR files, the word
// "lock-family", or a JSON file holding a modelClass object.
ModelClassSpec class_spec_from_arg(const std::string& arg) {
  ModelClassSpec spec;
  if (arg == "lock-family") {
    spec.kind = ClassKind::LockFamily;
  } else if (std::filesystem::is_directory(arg)) {
    spec.kind = ClassKind::Files;
    spec.dir = arg;
  } else {
    Json j = load_json(arg);
    if (j.contains("family")) {
      if (generator_spec_from_json(j).family != GeneratorFamily::Lock) {
        throw ParseError("only the lock generator names a model class");
      }
      spec.kind = ClassKind::LockFamily;
    } else {
      Json cfg{{"environment", {{"file", "-"}}}, {"modelClass", j}, {"K", 0}, {"seeds", {0}}};
      spec = parse_config_json(cfg).modelClass;
    }
  }
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predictive state representations: lifting, diagnostics and optimistic MLE learning"};
  app.require_subcommand(1);
  std::string out;
  std::function<void()> action;

  // lift
  auto* lift = app.add_subcommand("lift", "Lift a POMDP to a PSR and report structural checks");
  std::string liftPomdp, liftKind = "auto";
  int liftM = 1;
  lift->add_option("--pomdp", liftPomdp, "POMDP JSON file")->required();
  lift->add_option("--m", liftM, "Window length")->check(CLI::PositiveNumber);
  lift->add_option("--kind", liftKind, "auto, weakly-revealing or decodable")
      ->check(CLI::IsMember({"auto", "weakly-revealing", "decodable"}));
  lift->add_option("--out", out, "Output file");
  lift->callback([&] {
    action = [&] {
      const Pomdp p = load_pomdp(liftPomdp);
      LiftReport r;
      if (liftKind == "decodable") {
        r = lift_decodable(p, liftM);
      } else if (liftKind == "weakly-revealing") {
        r = lift_weakly_revealing(p, liftM);
      } else {
        try {
          r = lift_weakly_revealing(p, liftM);
        } catch (const NotWeaklyRevealing&) {
          r = lift_decodable(p, liftM);
        }
      }
      emit(out, lift_report_to_json(r).dump(2) + "\n");
    };
  });

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "Structural report for a POMDP or PSR file");
  std::string diagModel;
  int diagM = 1, diagDepth = -1;
  diag->add_option("--model", diagModel, "POMDP or PSR JSON file")->required();
  diag->add_option("--m", diagM, "Window length")->check(CLI::PositiveNumber);
  diag->add_option("--depth", diagDepth, "History pool depth (negative: all)");
  diag->add_option("--out", out, "Output file");
  diag->callback([&] { action = [&] { emit(out, diagnose_model(diagModel, diagM, diagDepth).dump(2) + "\n"); }; });

  // make-lock
  auto* lock = app.add_subcommand("make-lock", "Write a combinatorial lock POMDP");
  double lockAlpha = 0.1;
  int lockA = 2, lockH = 3;
  std::uint64_t lockSeed = 0;
  std::string lockGood;
  lock->add_option("--alpha", lockAlpha, "Revealing parameter in (0, 1/(2 sqrt 2))");
  lock->add_option("--actions", lockA, "Number of actions")->check(CLI::PositiveNumber);
  lock->add_option("--horizon", lockH, "Horizon")->check(CLI::PositiveNumber);
  lock->add_option("--seed", lockSeed, "Seed drawing the good actions");
  lock->add_option("--good", lockGood, "Explicit good actions, comma separated");
  lock->add_option("--out", out, "Output file");
  lock->callback([&] {
    action = [&] {
      const Pomdp p = lockGood.empty() ? make_lock(lockAlpha, lockA, lockH, lockSeed)
                                       : make_lock(lockAlpha, lockA, lockH, parse_id_list(lockGood));
      emit(out, pomdp_to_json(p).dump(2) + "\n");
    };
  });

  // make-random
  auto* rnd = app.add_subcommand("make-random", "Write a random POMDP from a generator spec");
  GeneratorSpec gen;
  std::string genFamily = "random-revealing", genSpecFile;
  rnd->add_option("--spec", genSpecFile, "Generator spec JSON (other options are ignored)");
  rnd->add_option("--family", genFamily, "random-revealing, random-decodable, random-lowrank or lock");
  rnd->add_option("--states", gen.stateCount, "|S|");
  rnd->add_option("--obs", gen.obsCount, "|O|");
  rnd->add_option("--actions", gen.actCount, "|A|");
  rnd->add_option("--horizon", gen.horizon, "H");
  rnd->add_option("--m", gen.m, "Window length for the sigma gate");
  rnd->add_option("--d-trans", gen.dTrans, "Transition rank (random-lowrank)");
  rnd->add_option("--alpha", gen.alpha, "Lock alpha");
  rnd->add_option("--sigma-floor", gen.sigmaFloor, "Reject draws whose m-step emission sigma_min is below this");
  rnd->add_option("--seed", gen.seed, "Generator seed");
  rnd->add_option("--max-retries", gen.maxRetries, "Rejection sampling attempts");
  rnd->add_option("--out", out, "Output file");
  rnd->callback([&] {
    action = [&] {
      GeneratorSpec spec = gen;
      if (!genSpecFile.empty()) {
        spec = generator_spec_from_json(load_json(genSpecFile));
      } else {
        spec.family = parse_generator_family(genFamily);
        if (spec.family == GeneratorFamily::Lock) {
          spec.stateCount = 2;
          spec.obsCount = 3;
        }
      }
      emit(out, pomdp_to_json(generate(spec)).dump(2) + "\n");
    };
  });

  // simulate
  auto* sim = app.add_subcommand("simulate", "Stream episodes as JSON lines");
  std::string simPomdp, simActions;
  int simEpisodes = 1;
  std::uint64_t simSeed = 0;
  sim->add_option("--pomdp", simPomdp, "POMDP JSON file")->required();
  sim->add_option("--episodes", simEpisodes, "Number of episodes")->check(CLI::NonNegativeNumber);
  sim->add_option("--seed", simSeed, "Environment seed");
  sim->add_option("--actions", simActions, "Open-loop action sequence; uniform when omitted");
  sim->add_option("--out", out, "Output file");
  sim->callback([&] {
    action = [&] {
      Environment env(load_pomdp(simPomdp), simSeed);
      const int A = env.pomdp().actCount;
      const Policy pi = simActions.empty() ? Policy::uniform(A) : Policy::fixed_sequence(A, 1, parse_id_list(simActions));
      std::string text;
      for (int i = 0; i < simEpisodes; ++i) {
        const Episode e = env.simulate_episode(pi);
        text += Json{{"obs", e.trajectory.obs}, {"act", e.trajectory.act}, {"reward", e.reward}}.dump() + "\n";
      }
      emit(out, text);
    };
  });

  // plan
  auto* plan = app.add_subcommand("plan", "Optimal policy and value of a PSR (or lifted POMDP)");
  std::string planModel;
  int planM = 1;
  plan->add_option("--model", planModel, "PSR or POMDP JSON file")->required();
  plan->add_option("--m", planM, "Window length when lifting a POMDP")->check(CLI::PositiveNumber);
  plan->add_option("--out", out, "Output file");
  plan->callback([&] {
    action = [&] {
      const Json j = load_json(planModel);
      const PsrModel model = j.contains("S") ? lift_weakly_revealing_model(pomdp_from_json(j), planM).model : psr_from_json(j);
      const PlanResult r = optimal_policy(model);
      emit(out, Json{{"value", r.value}, {"policy", policy_to_json(r.policy, model.horizon(), model.obs_count())}}.dump(2) + "\n");
    };
  });

  // run-crane
  auto* crane = app.add_subcommand("run-crane", "One optimistic-MLE learning run; writes the trace CSV");
  std::string craneEnv, craneClass;
  CraneOptions craneOpts;
  double craneC = 1.0, craneDelta = 0.05, craneFloor = 0.0;
  crane->add_option("--env", craneEnv, "Ground-truth POMDP JSON file")->required();
  crane->add_option("--class", craneClass, "Directory of PSR files, \"lock-family\", or a class/generator spec JSON")
      ->required();
  crane->add_option("--K", craneOpts.K, "Iterations")->required()->check(CLI::NonNegativeNumber);
  crane->add_option("--beta-c", craneC, "Confidence radius constant c");
  crane->add_option("--delta", craneDelta, "Failure probability")->check(CLI::Range(1e-300, 1.0));
  crane->add_option("--alpha-floor", craneFloor, "Drop candidates with measured alpha below this");
  crane->add_option("--seed", craneOpts.seed, "Run seed");
  crane->add_flag("--diagnostics", craneOpts.diagnostics, "Fill tv_max and b_err_max");
  crane->add_flag("--timing", craneOpts.timing, "Record wall_ms (makes traces nondeterministic)");
  crane->add_option("--out", out, "Trace CSV file");
  crane->callback([&] {
    action = [&] {
      ExperimentConfig cfg;
      cfg.environment.file = craneEnv;
      cfg.modelClass = class_spec_from_arg(craneClass);
      cfg.alphaFloor = craneFloor;
      cfg.K = craneOpts.K;
      const SeedSetup setup = build_seed_setup(cfg, craneOpts.seed);
      craneOpts.beta = default_beta(craneC, setup.cls.size(), std::max(craneOpts.K, 1), setup.cls.horizon(),
                                    setup.cls.core_tests().max_action_sequences(), craneDelta);
      emit(out, trace_csv(crane_run(setup.truth, setup.cls, craneOpts)));
    };
  });

  // run-experiment
  auto* exp = app.add_subcommand("run-experiment", "Multi-seed sweep from a JSON config");
  std::string expConfig, expOut;
  int expWorkers = -1;
  exp->add_option("--config", expConfig, "Experiment config JSON")->required();
  exp->add_option("--out", expOut, "Override the output directory");
  exp->add_option("--workers", expWorkers, "Override the worker count")->check(CLI::NonNegativeNumber);
  exp->callback([&] {
    action = [&] {
      ExperimentConfig cfg = parse_config(expConfig);
      if (!expOut.empty()) cfg.outputDir = expOut;
      if (expWorkers >= 0) cfg.workers = expWorkers;
      const SummaryReport r = run_experiment(cfg);
      std::cout << summary_to_json(r).dump(2) << "\n";
      if (!r.failures.empty()) {
        std::cerr << r.failures.size() << " seed(s) failed; see failures.json\n";
      }
    };
  });

  // summarize
  auto* summ = app.add_subcommand("summarize", "Recompute summary.json from an output directory");
  std::string summDir;
  summ->add_option("--dir", summDir, "Experiment output directory")->required();
  summ->callback([&] { action = [&] { std::cout << summary_to_json(summarize(summDir)).dump(2) << "\n"; }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kParse;
  }

  try {
    action();
  } catch (const Error& e) {
    std::cerr << "psrlab: " << e.what() << "\n";
    return exit_code(e);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "psrlab: ParseError: " << e.what() << "\n";
    return kParse;
  } catch (const std::exception& e) {
    std::cerr << "psrlab: " << e.what() << "\n";
    return kOther;
  }
  return kOk;
}
