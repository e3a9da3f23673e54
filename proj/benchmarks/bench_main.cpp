#include <benchmark/benchmark.h>

#include "psrlab/crane.hpp"
#include "psrlab/generators.hpp"
#include "psrlab/lift.hpp"
#include "psrlab/psr.hpp"
#include "psrlab/structure.hpp"

using namespace psrlab;

namespace {

Pomdp revealing(int S, int O, int H) {
  GeneratorSpec spec;
  spec.stateCount = S;
  spec.obsCount = O;
  spec.horizon = H;
  spec.sigmaFloor = 0.01;
  spec.seed = 1;
  return random_pomdp(spec);
}

void BM_TrajProb(benchmark::State& state) {
  const int H = static_cast<int>(state.range(0));
  const PsrModel f = lift_weakly_revealing_model(revealing(3, 3, H), 1).model;
  const Policy pi = Policy::uniform(2);
  Trajectory tau;
  for (int h = 0; h < H; ++h) {
    tau.obs.push_back(h % 3);
    tau.act.push_back(h % 2);
  }
  for (auto _ : state) benchmark::DoNotOptimize(traj_prob(f, pi, tau));
}
BENCHMARK(BM_TrajProb)->Arg(4)->Arg(8)->Arg(16);

void BM_OptimalPolicy(benchmark::State& state) {
  const PsrModel f = lift_weakly_revealing_model(revealing(3, 3, static_cast<int>(state.range(0))), 1).model;
  for (auto _ : state) benchmark::DoNotOptimize(optimal_policy(f).value);
}
BENCHMARK(BM_OptimalPolicy)->Arg(3)->Arg(4)->Arg(5);

void BM_LiftWeaklyRevealing(benchmark::State& state) {
  const Pomdp p = revealing(3, 3, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(lift_weakly_revealing_model(p, 1).model.q0()[0]);
}
BENCHMARK(BM_LiftWeaklyRevealing)->Arg(4)->Arg(8);

void BM_RegularityAlpha(benchmark::State& state) {
  const PsrModel f = lift_weakly_revealing_model(revealing(3, 3, 4), 1).model;
  for (auto _ : state) benchmark::DoNotOptimize(regularity_alpha(f).alpha);
}
BENCHMARK(BM_RegularityAlpha);

// K iterations of the loop on the lock with its 8-model class.
void BM_CraneLock(benchmark::State& state) {
  const std::vector<int> good{1, 0, 1};
  const Pomdp truth = make_lock(0.2, 2, 3, good);
  const ModelClass cls = preprocess_candidates(lock_family(0.2, 2, 3, good));
  CraneOptions opts;
  opts.K = static_cast<int>(state.range(0));
  opts.beta = default_beta(1.0, cls.size(), opts.K, 3, cls.core_tests().max_action_sequences(), 0.05);
  for (auto _ : state) {
    ++opts.seed;
    benchmark::DoNotOptimize(crane_run(truth, cls, opts).rows.back().cumRegret);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CraneLock)->Arg(1)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
