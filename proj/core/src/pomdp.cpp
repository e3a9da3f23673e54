#include "psrlab/pomdp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "psrlab/errors.hpp"

namespace psrlab {

namespace {

constexpr double kStochTol = 1e-12;

void check_columns(const Matrix& m, const std::string& what) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if ((m.col(c).array() < 0.0).any()) throw InvalidModel(what + " has a negative entry in column " + std::to_string(c));
    const double s = m.col(c).sum();
    if (std::abs(s - 1.0) > kStochTol) {
      throw InvalidModel(what + " column " + std::to_string(c) + " sums to " + std::to_string(s));
    }
  }
}

}  // namespace

Pomdp Pomdp::zeros(int stateCount, int obsCount, int actCount, int horizon) {
  Pomdp p;
  p.stateCount = stateCount;
  p.obsCount = obsCount;
  p.actCount = actCount;
  p.horizon = horizon;
  p.transitions.assign(static_cast<std::size_t>(std::max(horizon - 1, 0)) * static_cast<std::size_t>(actCount),
                       Matrix::Zero(stateCount, stateCount));
  p.emissions.assign(static_cast<std::size_t>(horizon), Matrix::Zero(obsCount, stateCount));
  p.mu1 = Vector::Zero(stateCount);
  p.rewards = RewardTable(horizon, obsCount, actCount);
  return p;
}

void Pomdp::validate() const {
  if (stateCount < 1 || obsCount < 1 || actCount < 1 || horizon < 1) {
    throw DimensionMismatch("POMDP sizes must be positive");
  }
  if (transitions.size() != static_cast<std::size_t>(horizon - 1) * static_cast<std::size_t>(actCount)) {
    throw DimensionMismatch("expected " + std::to_string((horizon - 1) * actCount) + " transition matrices");
  }
  if (emissions.size() != static_cast<std::size_t>(horizon)) {
    throw DimensionMismatch("expected " + std::to_string(horizon) + " emission matrices");
  }
  if (mu1.size() != stateCount) throw DimensionMismatch("mu1 has the wrong length");
  if (rewards.horizon() != horizon) throw DimensionMismatch("reward table horizon differs from POMDP horizon");
  for (int h = 1; h < horizon; ++h) {
    for (int a = 0; a < actCount; ++a) {
      const Matrix& t = trans(h, a);
      if (t.rows() != stateCount || t.cols() != stateCount) throw DimensionMismatch("transition matrix shape");
      check_columns(t, "T_" + std::to_string(h) + "(a=" + std::to_string(a) + ")");
    }
  }
  for (int h = 1; h <= horizon; ++h) {
    const Matrix& e = emit(h);
    if (e.rows() != obsCount || e.cols() != stateCount) throw DimensionMismatch("emission matrix shape");
    check_columns(e, "O_" + std::to_string(h));
  }
  Matrix m = mu1;
  check_columns(m, "mu1");
}

bool Pomdp::operator==(const Pomdp& o) const {
  if (stateCount != o.stateCount || obsCount != o.obsCount || actCount != o.actCount || horizon != o.horizon) {
    return false;
  }
  if (mu1 != o.mu1 || !(rewards == o.rewards)) return false;
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    if (transitions[i] != o.transitions[i]) return false;
  }
  for (std::size_t i = 0; i < emissions.size(); ++i) {
    if (emissions[i] != o.emissions[i]) return false;
  }
  return true;
}

Vector pomdp_forward(const Pomdp& pomdp, const Trajectory& tau) {
  Vector b = pomdp.mu1;
  for (int l = 1; l <= tau.steps(); ++l) {
    b = b.cwiseProduct(pomdp.emit(l).row(tau.obs[static_cast<std::size_t>(l - 1)]).transpose());
    if (l < pomdp.horizon) b = pomdp.trans(l, tau.act[static_cast<std::size_t>(l - 1)]) * b;
  }
  return b;
}

double pomdp_do_prob(const Pomdp& pomdp, const Trajectory& tau, int n) {
  const int H = pomdp.horizon;
  Vector b = pomdp.mu1;
  for (int l = 1; l <= std::min(n, H); ++l) {
    const ObsId o = tau.obs[static_cast<std::size_t>(l - 1)];
    if (o < 0 || o >= pomdp.obsCount) return 0.0;
    b = b.cwiseProduct(pomdp.emit(l).row(o).transpose());
    if (l < H && l < n) b = pomdp.trans(l, tau.act[static_cast<std::size_t>(l - 1)]) * b;
  }
  for (int l = H + 1; l <= n; ++l) {
    if (tau.obs[static_cast<std::size_t>(l - 1)] != pomdp.dummy_obs()) return 0.0;
  }
  return b.sum();
}

double pomdp_traj_prob(const Pomdp& pomdp, const Policy& pi, const Trajectory& tau) {
  const double p = pi.trajectory_prob(tau);
  if (p == 0.0) return 0.0;
  return pomdp_do_prob(pomdp, tau, tau.steps()) * p;
}

double pomdp_traj_prob_paths(const Pomdp& pomdp, const Policy& pi, const Trajectory& tau) {
  const int n = tau.steps();
  const double p = pi.trajectory_prob(tau);
  if (p == 0.0 || n == 0) return p;
  const int S = pomdp.stateCount;
  std::vector<int> path(static_cast<std::size_t>(n), 0);
  double total = 0.0;
  while (true) {
    double w = pomdp.mu1[path[0]];
    for (int l = 1; l <= n && w != 0.0; ++l) {
      const int s = path[static_cast<std::size_t>(l - 1)];
      w *= pomdp.emit(l)(tau.obs[static_cast<std::size_t>(l - 1)], s);
      if (l < n) w *= pomdp.trans(l, tau.act[static_cast<std::size_t>(l - 1)])(path[static_cast<std::size_t>(l)], s);
    }
    total += w;
    int pos = n - 1;
    for (; pos >= 0; --pos) {
      if (++path[static_cast<std::size_t>(pos)] < S) break;
      path[static_cast<std::size_t>(pos)] = 0;
    }
    if (pos < 0) break;
  }
  return total * p;
}

double do_test_prob(const Pomdp& pomdp, const Trajectory& tau, const Test& t) {
  const int H = pomdp.horizon;
  const int start = tau.steps() + 1;
  // Normalised belief over s_start, with the reachability rule applied per step.
  Vector b = pomdp.mu1;
  for (int l = 1; l < start; ++l) {
    if (l > H) {
      if (tau.obs[static_cast<std::size_t>(l - 1)] != pomdp.dummy_obs()) return 0.0;
      continue;
    }
    const ObsId o = tau.obs[static_cast<std::size_t>(l - 1)];
    if (o < 0 || o >= pomdp.obsCount) return 0.0;
    Vector post = b.cwiseProduct(pomdp.emit(l).row(o).transpose());
    const double c = post.sum();
    if (!(c >= kReachTol)) return 0.0;
    post /= c;
    b = l < H ? Vector(pomdp.trans(l, tau.act[static_cast<std::size_t>(l - 1)]) * post) : post;
  }
  for (int i = 0; i < t.length(); ++i) {
    const int l = start + i;
    const ObsId o = t.obs[static_cast<std::size_t>(i)];
    if (l > H) {
      if (o != pomdp.dummy_obs()) return 0.0;
      continue;
    }
    if (o < 0 || o >= pomdp.obsCount) return 0.0;
    b = b.cwiseProduct(pomdp.emit(l).row(o).transpose());
    if (i + 1 < t.length() && l < H) b = pomdp.trans(l, t.act[static_cast<std::size_t>(i)]) * b;
  }
  return b.sum();
}

double pomdp_policy_value(const Pomdp& pomdp, const Policy& pi, std::size_t budget) {
  const int H = pomdp.horizon;
  check_budget(TrajectoryEnumerator::count(H, pomdp.obsCount, pomdp.actCount), budget, "POMDP policy evaluation");
  Trajectory tau;
  tau.obs.assign(static_cast<std::size_t>(H), 0);
  tau.act.assign(static_cast<std::size_t>(H), 0);
  // Walk with the unnormalised belief and the running policy weight.
  double value = 0.0;
  std::function<void(int, const Vector&, double, double)> walk = [&](int h, const Vector& b, double piW, double r) {
    std::vector<double> dist(static_cast<std::size_t>(pomdp.actCount));
    for (int o = 0; o < pomdp.obsCount; ++o) {
      tau.obs[static_cast<std::size_t>(h - 1)] = o;
      const Vector bo = b.cwiseProduct(pomdp.emit(h).row(o).transpose());
      const double mass = bo.sum();
      if (mass == 0.0) continue;
      pi.distribution(h, tau, dist);
      for (int a = 0; a < pomdp.actCount; ++a) {
        const double pa = dist[static_cast<std::size_t>(a)];
        if (pa == 0.0) continue;
        tau.act[static_cast<std::size_t>(h - 1)] = a;
        const double r2 = r + pomdp.rewards(h, o, a);
        if (h == H) {
          value += mass * piW * pa * r2;
        } else {
          walk(h + 1, pomdp.trans(h, a) * bo, piW * pa, r2);
        }
      }
    }
  };
  walk(1, pomdp.mu1, 1.0, 0.0);
  return value;
}

double pomdp_optimal_value(const Pomdp& pomdp, std::size_t budget) {
  const int H = pomdp.horizon;
  check_budget(TrajectoryEnumerator::count(H, pomdp.obsCount, pomdp.actCount), budget, "POMDP planning");
  // With unnormalised beliefs the value of a history is linear in b.
  std::function<double(int, const Vector&)> solve = [&](int h, const Vector& b) {
    double v = 0.0;
    for (int o = 0; o < pomdp.obsCount; ++o) {
      const Vector bo = b.cwiseProduct(pomdp.emit(h).row(o).transpose());
      const double mass = bo.sum();
      if (mass == 0.0) continue;
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < pomdp.actCount; ++a) {
        double q = mass * pomdp.rewards(h, o, a);
        if (h < H) q += solve(h + 1, pomdp.trans(h, a) * bo);
        best = std::max(best, q);
      }
      v += best;
    }
    return v;
  };
  return solve(1, pomdp.mu1);
}

}  // namespace psrlab
