#include "psrlab/structure.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <string>

#include "psrlab/errors.hpp"
#include "psrlab/psr.hpp"

namespace psrlab {

Vector state_test_vector(const Pomdp& pomdp, int h, const Test& t) {
  const int H = pomdp.horizon;
  Vector v = Vector::Ones(pomdp.stateCount);
  for (int i = t.length() - 1; i >= 0; --i) {
    const int l = h + i;
    const ObsId o = t.obs[static_cast<std::size_t>(i)];
    if (l > H) {
      if (o != pomdp.dummy_obs()) return Vector::Zero(pomdp.stateCount);
      continue;
    }
    if (o < 0 || o >= pomdp.obsCount) return Vector::Zero(pomdp.stateCount);
    if (i + 1 < t.length() && l < H) v = pomdp.trans(l, t.act[static_cast<std::size_t>(i)]).transpose() * v;
    v = v.cwiseProduct(pomdp.emit(l).row(o).transpose());
  }
  return v;
}

Matrix m_step_emission(const Pomdp& pomdp, int h, int m) {
  const std::vector<Test> tests = all_tests_of_length(m, pomdp.obsCount, pomdp.actCount);
  Matrix out(static_cast<Eigen::Index>(tests.size()), pomdp.stateCount);
  for (std::size_t i = 0; i < tests.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = state_test_vector(pomdp, h, tests[i]).transpose();
  }
  return out;
}

std::vector<double> weakly_revealing_sigma(const Pomdp& pomdp, int m) {
  if (m < 1 || m > pomdp.horizon) throw DimensionMismatch("window m must be in [1, H]");
  std::vector<double> out;
  for (int h = 1; h <= pomdp.horizon - m + 1; ++h) out.push_back(smallest_singular_value(m_step_emission(pomdp, h, m)));
  return out;
}

std::vector<Test> tests_starting_at(const Pomdp& pomdp, int start, int length) {
  std::vector<Test> out;
  Test t;
  t.obs.assign(static_cast<std::size_t>(length), 0);
  t.act.assign(static_cast<std::size_t>(length - 1), 0);
  auto obsRadix = [&](int i) { return start + i > pomdp.horizon ? 1 : pomdp.obsCount; };
  while (true) {
    Test emitted = t;
    for (int i = 0; i < length; ++i) {
      if (start + i > pomdp.horizon) emitted.obs[static_cast<std::size_t>(i)] = pomdp.dummy_obs();
    }
    out.push_back(std::move(emitted));
    int pos = 2 * length - 2;
    for (; pos >= 0; --pos) {
      const bool isObs = pos % 2 == 0;
      int& digit = isObs ? t.obs[static_cast<std::size_t>(pos / 2)] : t.act[static_cast<std::size_t>(pos / 2)];
      const int radix = isObs ? obsRadix(pos / 2) : pomdp.actCount;
      if (++digit < radix) break;
      digit = 0;
    }
    if (pos < 0) break;
  }
  return out;
}

SystemDynamicsMatrix system_dynamics_matrix(const Pomdp& pomdp, int h, int maxTestLen, std::size_t budget) {
  if (h < 0 || h >= pomdp.horizon || maxTestLen < 1) throw DimensionMismatch("system dynamics matrix step out of range");
  SystemDynamicsMatrix d;
  d.step = h;
  for (int w = 1; w <= maxTestLen; ++w) {
    for (Test& t : tests_starting_at(pomdp, h + 1, w)) d.tests.push_back(std::move(t));
  }
  const double cols = TrajectoryEnumerator::count(h, pomdp.obsCount, pomdp.actCount);
  check_budget(cols * static_cast<double>(d.tests.size()), budget, "system dynamics matrix");
  TrajectoryEnumerator it(h, pomdp.obsCount, pomdp.actCount);
  do {
    d.histories.push_back(it.current());
  } while (it.next());
  d.values.resize(static_cast<Eigen::Index>(d.tests.size()), static_cast<Eigen::Index>(d.histories.size()));
  for (std::size_t c = 0; c < d.histories.size(); ++c) {
    for (std::size_t r = 0; r < d.tests.size(); ++r) {
      d.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = do_test_prob(pomdp, d.histories[c], d.tests[r]);
    }
  }
  return d;
}

int psr_rank(const SystemDynamicsMatrix& d, double svdTol) { return numerical_rank(d.values, svdTol); }

std::vector<int> psr_rank_profile(const Pomdp& pomdp, std::size_t budget) {
  std::vector<int> out;
  for (int h = 0; h < pomdp.horizon; ++h) out.push_back(psr_rank(system_dynamics_matrix(pomdp, h, pomdp.horizon - h, budget)));
  return out;
}

double core_pinv_norm(const Matrix& pool, const std::vector<int>& chosen) {
  Matrix k(pool.rows(), static_cast<Eigen::Index>(chosen.size()));
  for (std::size_t i = 0; i < chosen.size(); ++i) k.col(static_cast<Eigen::Index>(i)) = pool.col(chosen[i]);
  return norm_1to1(pseudo_inverse(k));
}

namespace {

Matrix gather(const Matrix& pool, const std::vector<int>& chosen) {
  Matrix k(pool.rows(), static_cast<Eigen::Index>(chosen.size()));
  for (std::size_t i = 0; i < chosen.size(); ++i) k.col(static_cast<Eigen::Index>(i)) = pool.col(chosen[i]);
  return k;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

std::pair<std::vector<int>, double> min_norm_subset_exhaustive(const Matrix& pool, int d) {
  const int n = static_cast<int>(pool.cols());
  std::vector<int> idx(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::vector<int> best;
  double bestNorm = std::numeric_limits<double>::infinity();
  while (true) {
    const Matrix k = gather(pool, idx);
    if (numerical_rank(k) == d) {
      const double norm = norm_1to1(pseudo_inverse(k));
      if (norm < bestNorm) {
        bestNorm = norm;
        best = idx;
      }
    }
    int i = d - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - d + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < d; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  return {best, bestNorm};
}

std::pair<std::vector<int>, double> min_norm_subset_greedy(const Matrix& pool, int d) {
  const int n = static_cast<int>(pool.cols());
  std::vector<int> chosen;
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (int k = 0; k < d; ++k) {
    int pick = -1;
    double bestSigma = -1.0;
    for (int j = 0; j < n; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      std::vector<int> trial = chosen;
      trial.push_back(j);
      const Vector sv = singular_values(gather(pool, trial));
      const double sigma = sv[static_cast<Eigen::Index>(k)];
      if (sigma > bestSigma) {
        bestSigma = sigma;
        pick = j;
      }
    }
    chosen.push_back(pick);
    used[static_cast<std::size_t>(pick)] = true;
  }
  double bestNorm = core_pinv_norm(pool, chosen);
  // Single swaps until no swap lowers the norm.
  for (int round = 0; round < 100; ++round) {
    bool improved = false;
    for (int i = 0; i < d && !improved; ++i) {
      for (int j = 0; j < n && !improved; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        std::vector<int> trial = chosen;
        trial[static_cast<std::size_t>(i)] = j;
        const Matrix k = gather(pool, trial);
        if (numerical_rank(k) != d) continue;
        const double norm = norm_1to1(pseudo_inverse(k));
        if (norm < bestNorm * (1.0 - 1e-12)) {
          used[static_cast<std::size_t>(chosen[static_cast<std::size_t>(i)])] = false;
          used[static_cast<std::size_t>(j)] = true;
          chosen = std::move(trial);
          bestNorm = norm;
          improved = true;
        }
      }
    }
    if (!improved) break;
  }
  return {chosen, bestNorm};
}

RegularityResult regularity_alpha(const PsrModel& model, int poolDepth, RegularityMode mode, std::size_t budget) {
  const int L = model.readout_step();
  const int depth = poolDepth < 0 ? L - 1 : std::min(poolDepth, L - 1);
  check_budget(TrajectoryEnumerator::count(depth, model.obs_count(), model.act_count()), budget, "history pool");

  // Reachable predictive states per step, deduplicated within 1e-12.
  std::vector<std::vector<Vector>> pools(static_cast<std::size_t>(depth + 1));
  std::vector<std::vector<Trajectory>> owners(static_cast<std::size_t>(depth + 1));
  auto add = [&](int h, const Vector& q, const Trajectory& tau) {
    auto& pool = pools[static_cast<std::size_t>(h)];
    for (const Vector& p : pool) {
      if ((p - q).cwiseAbs().maxCoeff() <= 1e-12) return;
    }
    pool.push_back(q);
    owners[static_cast<std::size_t>(h)].push_back(tau);
  };
  Trajectory tau;
  std::function<void(int, const Vector&)> walk = [&](int h, const Vector& q) {
    add(h, q, tau);
    if (h == depth) return;
    for (int o = 0; o < model.obs_count(); ++o) {
      const double norm = model.observation_vector(o, h + 1).dot(q);
      if (!(norm >= kReachTol)) continue;
      for (int a = 0; a < model.act_count(); ++a) {
        tau.obs.push_back(o);
        tau.act.push_back(a);
        walk(h + 1, model.op(o, a, h + 1) * q / norm);
        tau.obs.pop_back();
        tau.act.pop_back();
      }
    }
  };
  walk(0, model.q0());

  RegularityResult result;
  result.poolDepth = depth;
  result.alpha = std::numeric_limits<double>::infinity();
  result.modeUsed = RegularityMode::Exhaustive;
  for (int h = 0; h <= depth; ++h) {
    const auto& cols = pools[static_cast<std::size_t>(h)];
    Matrix pool(model.core_tests().size(h + 1), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) pool.col(static_cast<Eigen::Index>(i)) = cols[i];
    const int d = numerical_rank(pool);
    if (d == 0) throw RankDeficientPool("history pool at step " + std::to_string(h) + " has rank 0");
    const bool exhaustive =
        mode == RegularityMode::Exhaustive ||
        (mode == RegularityMode::Auto && binomial(static_cast<int>(cols.size()), d) <= kExhaustiveSubsetCap);
    if (!exhaustive) result.modeUsed = RegularityMode::Greedy;
    auto [chosen, norm] = exhaustive ? min_norm_subset_exhaustive(pool, d) : min_norm_subset_greedy(pool, d);
    CoreMatrix core;
    core.step = h;
    core.k = gather(pool, chosen);
    for (int c : chosen) core.histories.push_back(owners[static_cast<std::size_t>(h)][static_cast<std::size_t>(c)]);
    core.pinvNorm = norm;
    result.alpha = std::min(result.alpha, 1.0 / norm);
    result.cores.push_back(std::move(core));
  }
  return result;
}

std::optional<int> Decoder::decode(int step, const std::vector<int>& window) const {
  auto it = states.find({step, window});
  if (it == states.end()) return std::nullopt;
  return it->second;
}

std::vector<int> decoding_window(const Trajectory& tau, int h, int m) {
  std::vector<int> w;
  for (int l = std::max(h - m + 1, 1); l <= h; ++l) {
    if (l > std::max(h - m + 1, 1)) w.push_back(tau.act[static_cast<std::size_t>(l - 2)]);
    w.push_back(tau.obs[static_cast<std::size_t>(l - 1)]);
  }
  return w;
}

DecodabilityResult decodability_check(const Pomdp& pomdp, int m, std::size_t budget) {
  if (m < 1) throw DimensionMismatch("window m must be positive");
  const int S = pomdp.stateCount;
  DecodabilityResult result;
  Decoder decoder;
  decoder.m = m;
  std::set<std::pair<std::vector<int>, int>> current;
  for (int s = 0; s < S; ++s) {
    if (pomdp.mu1[s] <= 0.0) continue;
    for (int o = 0; o < pomdp.obsCount; ++o) {
      if (pomdp.emit(1)(o, s) > 0.0) current.insert({{o}, s});
    }
  }
  double work = 0.0;
  for (int h = 1;; ++h) {
    for (const auto& [w, s] : current) {
      auto [it, inserted] = decoder.states.emplace(std::make_pair(h, w), s);
      if (!inserted && it->second != s) {
        result.decodable = false;
        result.failingStep = h;
        return result;
      }
    }
    if (h == pomdp.horizon) break;
    std::set<std::pair<std::vector<int>, int>> next;
    for (const auto& [w, s] : current) {
      for (int a = 0; a < pomdp.actCount; ++a) {
        for (int s2 = 0; s2 < S; ++s2) {
          if (pomdp.trans(h, a)(s2, s) <= 0.0) continue;
          for (int o = 0; o < pomdp.obsCount; ++o) {
            if (pomdp.emit(h + 1)(o, s2) <= 0.0) continue;
            std::vector<int> w2 = w;
            w2.push_back(a);
            w2.push_back(o);
            if (static_cast<int>(w2.size()) > 2 * m - 1) w2.erase(w2.begin(), w2.begin() + 2);
            next.insert({std::move(w2), s2});
          }
        }
      }
    }
    work += static_cast<double>(next.size());
    check_budget(work, budget, "decodability enumeration");
    current = std::move(next);
  }
  result.decodable = true;
  result.decoder = std::move(decoder);
  return result;
}

}  // namespace psrlab
