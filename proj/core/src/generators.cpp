#include "psrlab/generators.hpp"

#include <algorithm>
#include <cmath>
#include <span>

#include "psrlab/errors.hpp"
#include "psrlab/rng.hpp"

namespace psrlab {

const char* to_string(GeneratorFamily f) noexcept {
  switch (f) {
    case GeneratorFamily::Lock: return "lock";
    case GeneratorFamily::RandomRevealing: return "random-revealing";
    case GeneratorFamily::RandomDecodable: return "random-decodable";
    case GeneratorFamily::RandomLowRank: return "random-lowrank";
  }
  return "unknown";
}

GeneratorFamily parse_generator_family(const std::string& name) {
  for (GeneratorFamily f : {GeneratorFamily::Lock, GeneratorFamily::RandomRevealing, GeneratorFamily::RandomDecodable,
                            GeneratorFamily::RandomLowRank}) {
    if (name == to_string(f)) return f;
  }
  throw ParseError("unknown generator family \"" + name + "\"");
}

namespace {

bool valid_lock_alpha(double alpha) { return alpha > 0.0 && alpha < 1.0 / (2.0 * std::sqrt(2.0)); }

void fill_dirichlet_columns(Matrix& m, CounterRng& rng) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    rng.dirichlet_flat(std::span<double>(m.col(c).data(), static_cast<std::size_t>(m.rows())));
  }
}

void fill_random_rewards(Pomdp& p, CounterRng& rng) {
  for (int h = 1; h <= p.horizon; ++h) {
    for (int o = 0; o < p.obsCount; ++o) {
      for (int a = 0; a < p.actCount; ++a) p.rewards.set(h, o, a, rng.uniform());
    }
  }
}

bool passes_gate(const Pomdp& p, int m, double floor) {
  if (floor <= 0.0) return true;
  for (double s : weakly_revealing_sigma(p, m)) {
    if (s < floor) return false;
  }
  return true;
}

}  // namespace

void GeneratorSpec::validate() const {
  if (stateCount < 1 || obsCount < 1 || actCount < 1 || horizon < 1) {
    throw InvalidModel("generator sizes must be positive");
  }
  if (m < 1 || m > horizon) throw InvalidModel("generator window m must lie in [1, H]");
  if (maxRetries < 1) throw InvalidModel("maxRetries must be positive");
  if (family == GeneratorFamily::Lock && !valid_lock_alpha(alpha)) {
    throw InvalidAlpha("lock alpha " + std::to_string(alpha) + " outside (0, 1/(2 sqrt 2))");
  }
  if (family == GeneratorFamily::RandomLowRank && (dTrans < 1 || dTrans > stateCount)) {
    throw InvalidModel("d_trans must lie in [1, |S|]");
  }
}

std::vector<ActId> lock_good_actions(int actCount, int horizon, std::uint64_t seed) {
  CounterRng rng(seed, CounterRng::kModelGen);
  std::vector<ActId> out;
  for (int h = 0; h < horizon; ++h) out.push_back(rng.below(actCount));
  return out;
}

Pomdp make_lock(double alpha, int actCount, int horizon, const std::vector<ActId>& goodActions) {
  if (!valid_lock_alpha(alpha)) {
    throw InvalidAlpha("lock alpha " + std::to_string(alpha) + " outside (0, 1/(2 sqrt 2))");
  }
  if (actCount < 1 || horizon < 1 || static_cast<int>(goodActions.size()) < horizon - 1) {
    throw InvalidModel("lock needs positive sizes and a good action for every step before H");
  }
  constexpr int kGoodState = 0;
  constexpr int kBadState = 1;
  const double c = std::sqrt(2.0) * alpha;
  Pomdp p = Pomdp::zeros(2, 3, actCount, horizon);
  for (int h = 1; h < horizon; ++h) {
    Matrix& e = p.emit(h);
    e(kLockGood, kGoodState) = c;
    e(kLockDummy, kGoodState) = 1.0 - c;
    e(kLockBad, kBadState) = c;
    e(kLockDummy, kBadState) = 1.0 - c;
    for (int a = 0; a < actCount; ++a) {
      Matrix& t = p.trans(h, a);
      t(a == goodActions[static_cast<std::size_t>(h - 1)] ? kGoodState : kBadState, kGoodState) = 1.0;
      t(kBadState, kBadState) = 1.0;
    }
  }
  p.emit(horizon)(kLockGood, kGoodState) = 1.0;
  p.emit(horizon)(kLockBad, kBadState) = 1.0;
  p.mu1[kGoodState] = 1.0;
  for (int a = 0; a < actCount; ++a) p.rewards.set(horizon, kLockGood, a, 1.0);
  return p;
}

Pomdp make_lock(double alpha, int actCount, int horizon, std::uint64_t seed) {
  return make_lock(alpha, actCount, horizon, lock_good_actions(actCount, horizon, seed));
}

Pomdp random_pomdp(const GeneratorSpec& spec) {
  spec.validate();
  const CounterRng base(spec.seed, CounterRng::kModelGen);
  for (int attempt = 0; attempt < spec.maxRetries; ++attempt) {
    CounterRng rng = base.split(static_cast<std::uint64_t>(attempt));
    Pomdp p = Pomdp::zeros(spec.stateCount, spec.obsCount, spec.actCount, spec.horizon);
    for (Matrix& t : p.transitions) fill_dirichlet_columns(t, rng);
    for (Matrix& e : p.emissions) fill_dirichlet_columns(e, rng);
    Matrix mu(spec.stateCount, 1);
    fill_dirichlet_columns(mu, rng);
    p.mu1 = mu.col(0);
    fill_random_rewards(p, rng);
    if (passes_gate(p, spec.m, spec.sigmaFloor)) return p;
  }
  throw GenerationFailed("no POMDP met sigma_min >= " + std::to_string(spec.sigmaFloor) + " in " +
                         std::to_string(spec.maxRetries) + " attempts");
}

LowRankPomdp random_lowrank_pomdp(const GeneratorSpec& spec) {
  spec.validate();
  if (spec.dTrans < 1 || spec.dTrans > spec.stateCount) throw GenerationFailed("d_trans must lie in [1, |S|]");
  const CounterRng base(spec.seed, CounterRng::kModelGen);
  for (int attempt = 0; attempt < spec.maxRetries; ++attempt) {
    CounterRng rng = base.split(static_cast<std::uint64_t>(attempt));
    LowRankPomdp out;
    Pomdp& p = out.pomdp;
    p = Pomdp::zeros(spec.stateCount, spec.obsCount, spec.actCount, spec.horizon);
    for (int h = 1; h < spec.horizon; ++h) {
      Matrix psi(spec.stateCount, spec.dTrans);
      fill_dirichlet_columns(psi, rng);
      for (int a = 0; a < spec.actCount; ++a) {
        Matrix phi(spec.dTrans, spec.stateCount);
        fill_dirichlet_columns(phi, rng);
        p.trans(h, a) = psi * phi;
        out.phi.push_back(std::move(phi));
      }
      out.psi.push_back(std::move(psi));
    }
    for (Matrix& e : p.emissions) fill_dirichlet_columns(e, rng);
    Matrix mu(spec.stateCount, 1);
    fill_dirichlet_columns(mu, rng);
    p.mu1 = mu.col(0);
    fill_random_rewards(p, rng);
    if (passes_gate(p, spec.m, spec.sigmaFloor)) return out;
  }
  throw GenerationFailed("no low-rank POMDP met the sigma_min floor in " + std::to_string(spec.maxRetries) +
                         " attempts");
}

DecodablePomdp random_decodable(const GeneratorSpec& spec) {
  spec.validate();
  const int S = spec.stateCount;
  const int O = spec.obsCount;
  const int A = spec.actCount;
  const int H = spec.horizon;
  if (spec.m == 1 && O < S) throw GenerationFailed("block emissions need |O| >= |S|");
  const CounterRng base(spec.seed, CounterRng::kModelGen);
  for (int attempt = 0; attempt < spec.maxRetries; ++attempt) {
    CounterRng rng = base.split(static_cast<std::uint64_t>(attempt));
    DecodablePomdp out;
    Pomdp& p = out.pomdp;
    p = Pomdp::zeros(S, O, A, H);
    out.decoder.m = spec.m;
    if (spec.m == 1) {
      auto owner = [&](int o) { return static_cast<int>(static_cast<long>(o) * S / O); };
      for (Matrix& e : p.emissions) {
        for (int s = 0; s < S; ++s) {
          std::vector<double> block;
          for (int o = 0; o < O; ++o) {
            if (owner(o) == s) block.push_back(0.0);
          }
          rng.dirichlet_flat(block);
          std::size_t i = 0;
          for (int o = 0; o < O; ++o) {
            if (owner(o) == s) e(o, s) = block[i++];
          }
        }
      }
      for (Matrix& t : p.transitions) fill_dirichlet_columns(t, rng);
      Matrix mu(S, 1);
      fill_dirichlet_columns(mu, rng);
      p.mu1 = mu.col(0);
      for (int h = 1; h <= H; ++h) {
        for (int o = 0; o < O; ++o) out.decoder.states[{h, {o}}] = owner(o);
      }
    } else {
      const int s1 = rng.below(S);
      p.mu1[s1] = 1.0;
      std::vector<std::vector<int>> next(static_cast<std::size_t>(H));
      for (int h = 1; h < H; ++h) {
        for (int a = 0; a < A; ++a) {
          const int s2 = rng.below(S);
          next[static_cast<std::size_t>(h)].push_back(s2);
          for (int s = 0; s < S; ++s) p.trans(h, a)(s2, s) = 1.0;
        }
      }
      for (Matrix& e : p.emissions) fill_dirichlet_columns(e, rng);
      for (int h = 1; h <= H; ++h) {
        const int k = std::min(h, spec.m);
        for (const Test& t : all_tests_of_length(k, O, A)) {
          std::vector<int> w;
          for (int i = 0; i < k; ++i) {
            if (i > 0) w.push_back(t.act[static_cast<std::size_t>(i - 1)]);
            w.push_back(t.obs[static_cast<std::size_t>(i)]);
          }
          out.decoder.states[{h, w}] = h == 1 ? s1 : next[static_cast<std::size_t>(h - 1)][static_cast<std::size_t>(t.act.back())];
        }
      }
    }
    fill_random_rewards(p, rng);
    if (passes_gate(p, spec.m, spec.sigmaFloor)) return out;
  }
  throw GenerationFailed("no decodable POMDP met the sigma_min floor in " + std::to_string(spec.maxRetries) +
                         " attempts");
}

Pomdp generate(const GeneratorSpec& spec) {
  spec.validate();
  switch (spec.family) {
    case GeneratorFamily::Lock: return make_lock(spec.alpha, spec.actCount, spec.horizon, spec.seed);
    case GeneratorFamily::RandomRevealing: return random_pomdp(spec);
    case GeneratorFamily::RandomDecodable: return random_decodable(spec).pomdp;
    case GeneratorFamily::RandomLowRank: return random_lowrank_pomdp(spec).pomdp;
  }
  throw InvalidModel("unknown generator family");
}

}  // namespace psrlab
