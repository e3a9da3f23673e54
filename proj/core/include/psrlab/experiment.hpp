#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "psrlab/crane.hpp"
#include "psrlab/generators.hpp"
#include "psrlab/io.hpp"

namespace psrlab {

inline constexpr const char* kVersion = "0.1.0";

/// Either a POMDP file or a generator spec. For generated environments the
/// run seed is added to spec.seed, so each seed sees its own instance.
struct EnvironmentSpec {
  std::optional<std::string> file;
  std::optional<GeneratorSpec> generator;
  bool operator==(const EnvironmentSpec&) const = default;
};

enum class ClassKind { LockFamily, Files, PerturbationGrid };
const char* to_string(ClassKind k) noexcept;

struct ModelClassSpec {
  ClassKind kind = ClassKind::LockFamily;
  std::string dir;                  // files: every *.json in name order
  std::optional<int> trueIndex;     // files: index of f*, when known
  int m = 1;                        // perturbation grid
  std::vector<double> epsilons;     // perturbation grid
  int perEpsilon = 1;               // perturbation grid
  std::uint64_t seed = 0;           // perturbation grid, added to the run seed
  bool operator==(const ModelClassSpec&) const = default;
};

struct ExperimentConfig {
  EnvironmentSpec environment;
  ModelClassSpec modelClass;
  int K = 0;
  double betaC = 1.0;
  double delta = 0.05;
  double alphaFloor = 0.0;
  std::vector<std::uint64_t> seeds;
  bool diagnostics = false;
  std::string outputDir = "out";
  /// Concurrent seed runs; 0 picks the hardware concurrency. Outputs never
  /// depend on it.
  int workers = 0;
  bool operator==(const ExperimentConfig&) const = default;
};

/// Strict: unknown keys anywhere are ParseErrors naming the key.
ExperimentConfig parse_config_json(const Json& j);
ExperimentConfig parse_config(const std::filesystem::path& path);
Json serialize_config(const ExperimentConfig& cfg);

/// FNV-1a 64 over the compact serialization, without outputDir and workers.
std::string config_hash(const ExperimentConfig& cfg);

struct SeedSummary {
  std::uint64_t seed = 0;
  int iterations = 0;
  double vStar = 0.0;
  double finalRegret = 0.0;  // cumulative regret after the last iteration
  double mixtureValue = 0.0;
  double membershipRate = 0.0;
  /// Median per-episode regret over the last min(50, K) iterations.
  double lateMedianRegret = 0.0;
};

struct Quartiles {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr() const { return q3 - q1; }
};

/// Linear-interpolation quantiles; zeros for an empty sample.
Quartiles quartiles(std::vector<double> xs);

struct RunFailure {
  std::uint64_t seed = 0;
  std::string error;
};

struct SummaryReport {
  std::string configHash;
  std::string version = kVersion;
  std::vector<SeedSummary> seeds;  // seed order; failed seeds are absent
  std::vector<RunFailure> failures;
  Quartiles finalRegret;
  Quartiles mixtureValue;
  Quartiles membershipRate;
  Quartiles lateMedianRegret;
};

SeedSummary summarize_trace(std::uint64_t seed, const std::vector<TraceRow>& rows);
/// Fills the aggregates from the per-seed rows.
void aggregate(SummaryReport& report);
Json summary_to_json(const SummaryReport& report);

/// The environment and preprocessed class a given seed runs against.
struct SeedSetup {
  Pomdp truth;
  ModelClass cls;
};
SeedSetup build_seed_setup(const ExperimentConfig& cfg, std::uint64_t seed);

std::string trace_file_name(std::uint64_t seed);

/// One crane_run per seed, seeds spread over worker threads. Writes
/// config.json, trace_seed<S>.csv, summary.json and failures.json into
/// cfg.outputDir.
SummaryReport run_experiment(const ExperimentConfig& cfg);

/// Rebuilds the summary of an output directory from config.json and the
/// trace files, and rewrites summary.json.
SummaryReport summarize(const std::filesystem::path& dir);

/// Structural report for a POMDP or PSR file.
Json diagnose_model(const std::filesystem::path& path, int m, int depth = -1);

}  // namespace psrlab
