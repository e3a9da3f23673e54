#include "psrlab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>
#include <tuple>

#include "psrlab/errors.hpp"
#include "psrlab/structure.hpp"

namespace psrlab {

const char* to_string(ClassKind k) noexcept {
  switch (k) {
    case ClassKind::LockFamily: return "lock-family";
    case ClassKind::Files: return "files";
    case ClassKind::PerturbationGrid: return "perturbation-grid";
  }
  return "unknown";
}

namespace {

ClassKind parse_class_kind(const std::string& s) {
  for (ClassKind k : {ClassKind::LockFamily, ClassKind::Files, ClassKind::PerturbationGrid}) {
    if (s == to_string(k)) return k;
  }
  throw ParseError("modelClass.kind: unknown class kind \"" + s + "\"");
}

const Json& need(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ParseError(where + ": missing key \"" + key + "\"");
  return j.at(key);
}

int as_int(const Json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ParseError(where + ": expected an integer");
  return v.get<int>();
}

double as_real(const Json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  return v.get<double>();
}

std::uint64_t as_seed(const Json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  throw ParseError(where + ": expected a nonnegative integer seed");
}

bool as_bool(const Json& v, const std::string& where) {
  if (!v.is_boolean()) throw ParseError(where + ": expected true or false");
  return v.get<bool>();
}

std::string as_string(const Json& v, const std::string& where) {
  if (!v.is_string()) throw ParseError(where + ": expected a string");
  return v.get<std::string>();
}

std::string error_text(const std::exception& e) { return e.what(); }

// Good actions and alpha of a lock POMDP, read back from its parameters.
std::pair<double, std::vector<ActId>> lock_parameters(const Pomdp& p) {
  if (p.stateCount != 2 || p.obsCount != 3 || p.horizon < 1) {
    throw InvalidModel("lock-family class needs a lock environment (2 states, 3 observations)");
  }
  const double c = p.horizon > 1 ? p.emit(1)(kLockGood, 0) : 0.5;
  std::vector<ActId> good;
  for (int h = 1; h < p.horizon; ++h) {
    int found = -1;
    for (int a = 0; a < p.actCount; ++a) {
      if (p.trans(h, a)(0, 0) == 1.0) {
        if (found >= 0) throw InvalidModel("lock environment has two good actions at one step");
        found = a;
      }
    }
    if (found < 0) throw InvalidModel("lock environment has no good action at some step");
    good.push_back(found);
  }
  good.push_back(0);  // the last action never matters
  return {c / std::sqrt(2.0), good};
}

std::vector<std::filesystem::path> json_files(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ParseError("model class directory " + dir.string() + " not found");
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw ParseError("model class directory " + dir.string() + " holds no .json files");
  return out;
}

double median_of(std::vector<double> xs) { return quartiles(std::move(xs)).median; }

Json quartiles_json(const Quartiles& q) {
  return Json{{"median", q.median}, {"q1", q.q1}, {"q3", q.q3}, {"iqr", q.iqr()}};
}

}  // namespace

ExperimentConfig parse_config_json(const Json& j) {
  require_known_keys(j, {"environment", "modelClass", "K", "betaC", "delta", "alphaFloor", "seeds", "diagnostics",
                         "outputDir", "workers"},
                     "config");
  ExperimentConfig cfg;

  const Json& env = need(j, "environment", "config");
  require_known_keys(env, {"file", "generator"}, "environment");
  if (env.contains("file") == env.contains("generator")) {
    throw ParseError("environment: give exactly one of \"file\" and \"generator\"");
  }
  if (env.contains("file")) cfg.environment.file = as_string(env.at("file"), "environment.file");
  if (env.contains("generator")) cfg.environment.generator = generator_spec_from_json(env.at("generator"));

  const Json& mc = need(j, "modelClass", "config");
  if (!mc.is_object()) throw ParseError("modelClass: expected a JSON object");
  cfg.modelClass.kind = parse_class_kind(as_string(need(mc, "kind", "modelClass"), "modelClass.kind"));
  switch (cfg.modelClass.kind) {
    case ClassKind::LockFamily:
      require_known_keys(mc, {"kind"}, "modelClass");
      break;
    case ClassKind::Files:
      require_known_keys(mc, {"kind", "dir", "trueIndex"}, "modelClass");
      cfg.modelClass.dir = as_string(need(mc, "dir", "modelClass"), "modelClass.dir");
      if (mc.contains("trueIndex")) cfg.modelClass.trueIndex = as_int(mc.at("trueIndex"), "modelClass.trueIndex");
      break;
    case ClassKind::PerturbationGrid:
      require_known_keys(mc, {"kind", "m", "epsilons", "perEpsilon", "seed"}, "modelClass");
      if (mc.contains("m")) cfg.modelClass.m = as_int(mc.at("m"), "modelClass.m");
      for (const Json& e : need(mc, "epsilons", "modelClass")) cfg.modelClass.epsilons.push_back(as_real(e, "modelClass.epsilons"));
      if (mc.contains("perEpsilon")) cfg.modelClass.perEpsilon = as_int(mc.at("perEpsilon"), "modelClass.perEpsilon");
      if (mc.contains("seed")) cfg.modelClass.seed = as_seed(mc.at("seed"), "modelClass.seed");
      break;
  }

  cfg.K = as_int(need(j, "K", "config"), "K");
  if (j.contains("betaC")) cfg.betaC = as_real(j.at("betaC"), "betaC");
  if (j.contains("delta")) cfg.delta = as_real(j.at("delta"), "delta");
  if (j.contains("alphaFloor")) cfg.alphaFloor = as_real(j.at("alphaFloor"), "alphaFloor");
  const Json& seeds = need(j, "seeds", "config");
  if (!seeds.is_array()) throw ParseError("seeds: expected an array");
  for (const Json& s : seeds) cfg.seeds.push_back(as_seed(s, "seeds"));
  if (j.contains("diagnostics")) cfg.diagnostics = as_bool(j.at("diagnostics"), "diagnostics");
  if (j.contains("outputDir")) cfg.outputDir = as_string(j.at("outputDir"), "outputDir");
  if (j.contains("workers")) cfg.workers = as_int(j.at("workers"), "workers");

  if (cfg.seeds.empty()) throw ParseError("seeds: the seed list must be nonempty");
  if (!(cfg.delta > 0.0 && cfg.delta <= 1.0)) throw ParseError("delta: must lie in (0, 1]");
  if (cfg.K < 0) throw ParseError("K: must be nonnegative");
  if (cfg.betaC < 0.0) throw ParseError("betaC: must be nonnegative");
  if (cfg.alphaFloor < 0.0) throw ParseError("alphaFloor: must be nonnegative");
  if (cfg.workers < 0) throw ParseError("workers: must be nonnegative");
  if (cfg.outputDir.empty()) throw ParseError("outputDir: must be nonempty");
  if (cfg.modelClass.kind == ClassKind::PerturbationGrid &&
      (cfg.modelClass.m < 1 || cfg.modelClass.perEpsilon < 0)) {
    throw ParseError("modelClass: m must be positive and perEpsilon nonnegative");
  }
  return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  return parse_config_json(parse_json_text(read_text_file(path), path.string()));
}

Json serialize_config(const ExperimentConfig& cfg) {
  Json j;
  Json env = Json::object();
  if (cfg.environment.file) env["file"] = *cfg.environment.file;
  if (cfg.environment.generator) env["generator"] = generator_spec_to_json(*cfg.environment.generator);
  j["environment"] = std::move(env);
  Json mc;
  mc["kind"] = to_string(cfg.modelClass.kind);
  if (cfg.modelClass.kind == ClassKind::Files) {
    mc["dir"] = cfg.modelClass.dir;
    if (cfg.modelClass.trueIndex) mc["trueIndex"] = *cfg.modelClass.trueIndex;
  } else if (cfg.modelClass.kind == ClassKind::PerturbationGrid) {
    mc["m"] = cfg.modelClass.m;
    mc["epsilons"] = cfg.modelClass.epsilons;
    mc["perEpsilon"] = cfg.modelClass.perEpsilon;
    mc["seed"] = cfg.modelClass.seed;
  }
  j["modelClass"] = std::move(mc);
  j["K"] = cfg.K;
  j["betaC"] = cfg.betaC;
  j["delta"] = cfg.delta;
  j["alphaFloor"] = cfg.alphaFloor;
  j["seeds"] = cfg.seeds;
  j["diagnostics"] = cfg.diagnostics;
  j["outputDir"] = cfg.outputDir;
  j["workers"] = cfg.workers;
  return j;
}

std::string config_hash(const ExperimentConfig& cfg) {
  Json j = serialize_config(cfg);
  j.erase("outputDir");
  j.erase("workers");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Quartiles quartiles(std::vector<double> xs) {
  Quartiles q;
  if (xs.empty()) return q;
  std::sort(xs.begin(), xs.end());
  auto at = [&](double p) {
    const double pos = p * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, xs.size() - 1);
    return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
  };
  q.median = at(0.5);
  q.q1 = at(0.25);
  q.q3 = at(0.75);
  return q;
}

SeedSummary summarize_trace(std::uint64_t seed, const std::vector<TraceRow>& rows) {
  SeedSummary s;
  s.seed = seed;
  s.iterations = static_cast<int>(rows.size());
  if (rows.empty()) return s;
  s.vStar = rows.front().vStar;
  s.finalRegret = rows.back().cumRegret;
  double value = 0.0;
  int members = 0;
  for (const TraceRow& r : rows) {
    value += r.vTrue;
    members += r.fstarInSet ? 1 : 0;
  }
  s.mixtureValue = value / static_cast<double>(rows.size());
  s.membershipRate = static_cast<double>(members) / static_cast<double>(rows.size());
  std::vector<double> late;
  for (std::size_t i = rows.size() > 50 ? rows.size() - 50 : 0; i < rows.size(); ++i) {
    late.push_back(rows[i].vStar - rows[i].vTrue);
  }
  s.lateMedianRegret = median_of(std::move(late));
  return s;
}

void aggregate(SummaryReport& report) {
  std::vector<double> regret, mixture, member, late;
  for (const SeedSummary& s : report.seeds) {
    regret.push_back(s.finalRegret);
    mixture.push_back(s.mixtureValue);
    member.push_back(s.membershipRate);
    late.push_back(s.lateMedianRegret);
  }
  report.finalRegret = quartiles(regret);
  report.mixtureValue = quartiles(mixture);
  report.membershipRate = quartiles(member);
  report.lateMedianRegret = quartiles(late);
}

Json summary_to_json(const SummaryReport& r) {
  Json j;
  j["version"] = r.version;
  j["configHash"] = r.configHash;
  Json seeds = Json::array();
  for (const SeedSummary& s : r.seeds) {
    seeds.push_back(Json{{"seed", s.seed},
                         {"iterations", s.iterations},
                         {"vStar", s.vStar},
                         {"finalRegret", s.finalRegret},
                         {"mixtureValue", s.mixtureValue},
                         {"membershipRate", s.membershipRate},
                         {"lateMedianRegret", s.lateMedianRegret},
                         {"trace", trace_file_name(s.seed)}});
  }
  j["seeds"] = std::move(seeds);
  j["aggregate"] = Json{{"finalRegret", quartiles_json(r.finalRegret)},
                        {"mixtureValue", quartiles_json(r.mixtureValue)},
                        {"membershipRate", quartiles_json(r.membershipRate)},
                        {"lateMedianRegret", quartiles_json(r.lateMedianRegret)}};
  j["failures"] = static_cast<int>(r.failures.size());
  return j;
}

namespace {

Json failures_to_json(const std::vector<RunFailure>& failures) {
  Json out = Json::array();
  for (const RunFailure& f : failures) out.push_back(Json{{"seed", f.seed}, {"error", f.error}});
  return out;
}

std::vector<RunFailure> failures_from_json(const Json& j) {
  std::vector<RunFailure> out;
  if (!j.is_array()) throw ParseError("failures.json: expected an array");
  for (const Json& f : j) {
    require_known_keys(f, {"seed", "error"}, "failures.json");
    out.push_back(RunFailure{as_seed(need(f, "seed", "failures.json"), "failures.json.seed"),
                             as_string(need(f, "error", "failures.json"), "failures.json.error")});
  }
  return out;
}

}  // namespace

std::string trace_file_name(std::uint64_t seed) { return "trace_seed" + std::to_string(seed) + ".csv"; }

SeedSetup build_seed_setup(const ExperimentConfig& cfg, std::uint64_t seed) {
  Pomdp truth;
  std::optional<GeneratorSpec> spec = cfg.environment.generator;
  if (spec) {
    spec->seed += seed;
    truth = generate(*spec);
  } else {
    truth = pomdp_from_json(parse_json_text(read_text_file(*cfg.environment.file), *cfg.environment.file));
  }

  ModelClass raw;
  switch (cfg.modelClass.kind) {
    case ClassKind::LockFamily: {
      std::vector<ActId> good;
      double alpha = 0.0;
      if (spec && spec->family == GeneratorFamily::Lock) {
        alpha = spec->alpha;
        good = lock_good_actions(spec->actCount, spec->horizon, spec->seed);
      } else {
        std::tie(alpha, good) = lock_parameters(truth);
      }
      raw = lock_family(alpha, truth.actCount, truth.horizon, good);
      break;
    }
    case ClassKind::Files: {
      std::vector<PsrModel> models;
      for (const auto& f : json_files(cfg.modelClass.dir)) {
        models.push_back(psr_from_json(parse_json_text(read_text_file(f), f.string())));
      }
      const auto& ti = cfg.modelClass.trueIndex;
      if (ti && (*ti < 0 || *ti >= static_cast<int>(models.size()))) throw ParseError("modelClass.trueIndex out of range");
      raw = ModelClass(std::move(models), ti);
      break;
    }
    case ClassKind::PerturbationGrid:
      raw = perturbation_grid(truth, cfg.modelClass.m, cfg.modelClass.epsilons, cfg.modelClass.perEpsilon,
                              cfg.modelClass.seed + seed);
      break;
  }
  if (raw.empty() || raw.horizon() != truth.horizon || raw[0].obs_count() != truth.obsCount ||
      raw[0].act_count() != truth.actCount) {
    throw InvalidModel("model class does not match the environment's horizon and alphabets");
  }
  PreprocessOptions pre;
  pre.alphaFloor = cfg.alphaFloor;
  return SeedSetup{std::move(truth), preprocess_candidates(raw, pre)};
}

SummaryReport run_experiment(const ExperimentConfig& cfg) {
  const std::filesystem::path out(cfg.outputDir);
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec || !std::filesystem::is_directory(out)) throw ParseError("output directory " + out.string() + " is not writable");
  write_text_file(out / "config.json", serialize_config(cfg).dump(2) + "\n");

  const std::size_t n = cfg.seeds.size();
  std::vector<std::optional<SeedSummary>> results(n);
  std::vector<std::optional<std::string>> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const std::uint64_t seed = cfg.seeds[i];
      const auto path = out / trace_file_name(seed);
      try {
        SeedSetup setup = build_seed_setup(cfg, seed);
        CraneOptions opts;
        opts.K = cfg.K;
        opts.seed = seed;
        opts.diagnostics = cfg.diagnostics;
        opts.beta = default_beta(cfg.betaC, setup.cls.size(), std::max(cfg.K, 1), setup.cls.horizon(),
                                 static_cast<int>(setup.cls.core_tests().max_action_sequences()), cfg.delta);
        const RegretTrace trace = crane_run(setup.truth, setup.cls, opts);
        write_text_file(path, trace_csv(trace));
        results[i] = summarize_trace(seed, trace.rows);
      } catch (const std::exception& e) {
        std::filesystem::remove(path, ec);
        errors[i] = error_text(e);
      }
    }
  };
  int workers = cfg.workers > 0 ? cfg.workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), n));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  SummaryReport report;
  report.configHash = config_hash(cfg);
  for (std::size_t i = 0; i < n; ++i) {
    if (results[i]) report.seeds.push_back(*results[i]);
    if (errors[i]) report.failures.push_back(RunFailure{cfg.seeds[i], *errors[i]});
  }
  aggregate(report);
  write_text_file(out / "summary.json", summary_to_json(report).dump(2) + "\n");
  write_text_file(out / "failures.json", failures_to_json(report.failures).dump(2) + "\n");
  return report;
}

SummaryReport summarize(const std::filesystem::path& dir) {
  const ExperimentConfig cfg = parse_config(dir / "config.json");
  SummaryReport report;
  report.configHash = config_hash(cfg);
  if (std::filesystem::exists(dir / "failures.json")) {
    report.failures = failures_from_json(parse_json_text(read_text_file(dir / "failures.json"), "failures.json"));
  }
  for (std::uint64_t seed : cfg.seeds) {
    const auto path = dir / trace_file_name(seed);
    if (!std::filesystem::exists(path)) continue;
    report.seeds.push_back(summarize_trace(seed, read_trace_csv(read_text_file(path))));
  }
  aggregate(report);
  write_text_file(dir / "summary.json", summary_to_json(report).dump(2) + "\n");
  return report;
}

Json diagnose_model(const std::filesystem::path& path, int m, int depth) {
  if (m < 1) throw ParseError("m must be positive");
  const Json j = parse_json_text(read_text_file(path), path.string());
  if (!j.is_object()) throw ParseError(path.string() + ": expected a JSON object");
  Json out;
  std::optional<PsrModel> model;
  if (j.contains("S")) {
    const Pomdp p = pomdp_from_json(j);
    if (m > p.horizon) throw ParseError("m exceeds the horizon");
    out["input"] = "pomdp";
    out["m"] = m;
    const std::vector<int> ranks = psr_rank_profile(p);
    out["dPsr"] = ranks;
    out["dPsrMax"] = ranks.empty() ? 0 : *std::max_element(ranks.begin(), ranks.end());
    const std::vector<double> sig = weakly_revealing_sigma(p, m);
    out["sigmaMin"] = sig;
    const DecodabilityResult dec = decodability_check(p, m);
    out["decodable"] = dec.decodable;
    out["decodableFailingStep"] = dec.decodable ? Json(nullptr) : Json(dec.failingStep);
    try {
      model = lift_weakly_revealing_model(p, m).model;
      out["lift"] = to_string(LiftKind::WeaklyRevealing);
    } catch (const NotWeaklyRevealing&) {
      if (dec.decodable) {
        model = lift_decodable_model(p, m, dec.decoder).model;
        out["lift"] = to_string(LiftKind::Decodable);
      } else {
        out["lift"] = nullptr;
      }
    }
  } else {
    model = psr_from_json(j);
    out["input"] = "psr";
    out["m"] = nullptr;
  }
  if (model) {
    try {
      const RegularityResult reg = regularity_alpha(*model, depth);
      out["alpha"] = reg.alpha;
      out["poolDepth"] = reg.poolDepth;
      Json poolRank = Json::array();
      for (const CoreMatrix& c : reg.cores) poolRank.push_back(static_cast<int>(c.k.cols()));
      out["poolRank"] = std::move(poolRank);
    } catch (const RankDeficientPool& e) {
      out["alpha"] = nullptr;
      out["alphaError"] = e.what();
    }
    out["validity"] = validation_to_json(validate_psr(*model));
  } else {
    out["alpha"] = nullptr;
    out["validity"] = nullptr;
  }
  return out;
}

}  // namespace psrlab
