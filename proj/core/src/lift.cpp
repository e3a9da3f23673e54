#include "psrlab/lift.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "psrlab/errors.hpp"
#include "psrlab/psr.hpp"

namespace psrlab {

const char* to_string(LiftKind kind) noexcept {
  return kind == LiftKind::WeaklyRevealing ? "weakly-revealing" : "decodable";
}

namespace {

void check_window(const Pomdp& pomdp, int m) {
  pomdp.validate();
  if (m < 1 || m > pomdp.horizon) {
    throw DimensionMismatch("window m = " + std::to_string(m) + " must lie in [1, " + std::to_string(pomdp.horizon) + "]");
  }
}

CoreTestSet m_step_core_tests(const Pomdp& pomdp, int m) {
  const int L = pomdp.horizon - m + 1;
  const std::vector<Test> tests = all_tests_of_length(m, pomdp.obsCount, pomdp.actCount);
  return CoreTestSet(std::vector<std::vector<Test>>(static_cast<std::size_t>(L), tests));
}

Test concat(ObsId o, ActId a, const Test& u) {
  Test t;
  t.obs.push_back(o);
  t.obs.insert(t.obs.end(), u.obs.begin(), u.obs.end());
  t.act.push_back(a);
  t.act.insert(t.act.end(), u.act.begin(), u.act.end());
  return t;
}

}  // namespace

Vector Lifting::test_coefficients(int h, const Test& t) const {
  const int L = model.readout_step();
  if (h < 1 || h > L) throw DimensionMismatch("test coefficients requested at step " + std::to_string(h));
  const std::vector<Test>& core = model.core_tests().at(h);
  Vector coef = Vector::Zero(static_cast<Eigen::Index>(core.size()));
  if (kind == LiftKind::WeaklyRevealing) {
    return emissionPinv[static_cast<std::size_t>(h - 1)].transpose() * state_test_vector(pomdp, h, t);
  }

  const int w = t.length();
  if (w <= m) {
    // Sum the core tests extending t, with unused trailing actions fixed to 0.
    for (std::size_t i = 0; i < core.size(); ++i) {
      const Test& u = core[i];
      bool match = std::equal(t.obs.begin(), t.obs.end(), u.obs.begin()) &&
                   std::equal(t.act.begin(), t.act.end(), u.act.begin());
      for (std::size_t j = t.act.size(); match && j < u.act.size(); ++j) match = u.act[j] == 0;
      if (match) coef[static_cast<Eigen::Index>(i)] = 1.0;
    }
    return coef;
  }

  Test head;
  head.obs.assign(t.obs.begin(), t.obs.begin() + m);
  head.act.assign(t.act.begin(), t.act.begin() + (m - 1));
  const int idx = model.core_tests().index_of(h, head);
  if (idx < 0) return coef;
  // The head fills the whole decoding window at its last step.
  std::vector<int> window;
  for (int i = 0; i < m; ++i) {
    if (i > 0) window.push_back(head.act[static_cast<std::size_t>(i - 1)]);
    window.push_back(head.obs[static_cast<std::size_t>(i)]);
  }
  const int last = h + m - 1;
  const std::optional<int> s = decoder->decode(last, window);
  if (!s) return coef;  // the head is unreachable, so any coefficient works

  Test rest;
  rest.obs.assign(t.obs.begin() + m, t.obs.end());
  rest.act.assign(t.act.begin() + m, t.act.end());
  const Vector v = state_test_vector(pomdp, last + 1, rest);
  const ActId a = t.act[static_cast<std::size_t>(m - 1)];
  const double cont = last < pomdp.horizon ? pomdp.trans(last, a).col(*s).dot(v) : v[*s];
  coef[idx] = cont;
  return coef;
}

Lifting lift_weakly_revealing_model(const Pomdp& pomdp, int m) {
  check_window(pomdp, m);
  const int L = pomdp.horizon - m + 1;
  Lifting out;
  out.kind = LiftKind::WeaklyRevealing;
  out.m = m;
  out.pomdp = pomdp;
  std::vector<Matrix> emission;
  for (int h = 1; h <= L; ++h) {
    Matrix e = m_step_emission(pomdp, h, m);
    const double sigma = smallest_singular_value(e);
    if (!(sigma > kSvdTol)) throw NotWeaklyRevealing(h, sigma);
    out.emissionPinv.push_back(pseudo_inverse(e));
    emission.push_back(std::move(e));
  }
  Vector q0 = emission[0] * pomdp.mu1;
  std::vector<Matrix> ops(static_cast<std::size_t>(L - 1) * static_cast<std::size_t>(pomdp.obsCount) *
                          static_cast<std::size_t>(pomdp.actCount));
  for (int h = 1; h < L; ++h) {
    const Matrix& observe = emission[static_cast<std::size_t>(h)];
    for (int o = 0; o < pomdp.obsCount; ++o) {
      for (int a = 0; a < pomdp.actCount; ++a) {
        const std::size_t i = (static_cast<std::size_t>(h - 1) * static_cast<std::size_t>(pomdp.obsCount) +
                               static_cast<std::size_t>(o)) *
                                  static_cast<std::size_t>(pomdp.actCount) +
                              static_cast<std::size_t>(a);
        ops[i] = observe * pomdp.trans(h, a) * pomdp.emit(h).row(o).transpose().asDiagonal() *
                 out.emissionPinv[static_cast<std::size_t>(h - 1)];
      }
    }
  }
  out.model = PsrModel(pomdp.horizon, pomdp.obsCount, pomdp.actCount, m_step_core_tests(pomdp, m), std::move(q0),
                       std::move(ops), pomdp.rewards);
  return out;
}

Lifting lift_decodable_model(const Pomdp& pomdp, int m, const std::optional<Decoder>& decoder) {
  check_window(pomdp, m);
  DecodabilityResult check = decodability_check(pomdp, m);
  if (!check.decodable) {
    throw NotDecodable("two latent states share a window of length " + std::to_string(m) + " at step " +
                       std::to_string(check.failingStep));
  }
  if (decoder) {
    for (const auto& [key, s] : check.decoder->states) {
      if (decoder->decode(key.first, key.second) != s) {
        throw NotDecodable("supplied decoder disagrees with the POMDP at step " + std::to_string(key.first));
      }
    }
  }
  const int L = pomdp.horizon - m + 1;
  Lifting out;
  out.kind = LiftKind::Decodable;
  out.m = m;
  out.pomdp = pomdp;
  out.decoder = std::move(check.decoder);
  CoreTestSet core = m_step_core_tests(pomdp, m);
  // A placeholder model gives test_coefficients access to the core tests.
  {
    std::vector<Matrix> ops;
    for (int h = 1; h < L; ++h) {
      for (int i = 0; i < pomdp.obsCount * pomdp.actCount; ++i) ops.push_back(Matrix::Zero(core.size(h + 1), core.size(h)));
    }
    out.model = PsrModel(pomdp.horizon, pomdp.obsCount, pomdp.actCount, core, Vector::Zero(core.size(1)),
                         std::move(ops), pomdp.rewards);
  }
  Vector q0(core.size(1));
  for (int i = 0; i < core.size(1); ++i) q0[i] = do_test_prob(pomdp, Trajectory{}, core.at(1)[static_cast<std::size_t>(i)]);
  std::vector<Matrix> ops;
  for (int h = 1; h < L; ++h) {
    for (int o = 0; o < pomdp.obsCount; ++o) {
      for (int a = 0; a < pomdp.actCount; ++a) {
        Matrix mat(core.size(h + 1), core.size(h));
        const auto& next = core.at(h + 1);
        for (std::size_t r = 0; r < next.size(); ++r) {
          mat.row(static_cast<Eigen::Index>(r)) = out.test_coefficients(h, concat(o, a, next[r])).transpose();
        }
        ops.push_back(std::move(mat));
      }
    }
  }
  out.model = PsrModel(pomdp.horizon, pomdp.obsCount, pomdp.actCount, std::move(core), std::move(q0), std::move(ops),
                       pomdp.rewards);
  return out;
}

double linearity_residual(const Lifting& lifting, int h, int maxTestLen) {
  const Pomdp& pomdp = lifting.pomdp;
  std::vector<Test> tests;
  for (int w = 1; w <= maxTestLen; ++w) {
    for (Test& t : tests_starting_at(pomdp, h, w)) tests.push_back(std::move(t));
  }
  std::vector<Vector> coefs;
  for (const Test& t : tests) coefs.push_back(lifting.test_coefficients(h, t));
  double worst = 0.0;
  TrajectoryEnumerator it(h - 1, pomdp.obsCount, pomdp.actCount);
  do {
    const Trajectory& tau = it.current();
    Vector q;
    try {
      q = predictive_state(lifting.model, tau);
    } catch (const UnreachableHistory&) {
      continue;
    }
    for (std::size_t i = 0; i < tests.size(); ++i) {
      worst = std::max(worst, std::abs(coefs[i].dot(q) - do_test_prob(pomdp, tau, tests[i])));
    }
  } while (it.next());
  return worst;
}

LiftReport make_lift_report(const Lifting& lifting, std::size_t budget) {
  const Pomdp& pomdp = lifting.pomdp;
  const int L = lifting.model.readout_step();
  LiftReport r;
  r.kind = lifting.kind;
  r.m = lifting.m;
  r.model = lifting.model;
  for (int h = 1; h <= L; ++h) {
    double tests = 0.0;
    for (int w = 1; w <= lifting.m + 1; ++w) tests += std::pow(pomdp.obsCount, w) * std::pow(pomdp.actCount, w - 1);
    const double work = tests * TrajectoryEnumerator::count(h - 1, pomdp.obsCount, pomdp.actCount);
    if (work > static_cast<double>(budget)) {
      r.residuals.emplace_back(std::nullopt);
    } else {
      r.residuals.emplace_back(linearity_residual(lifting, h, lifting.m + 1));
    }
  }
  for (int h = 0; h < pomdp.horizon; ++h) {
    try {
      r.dPsr.emplace_back(psr_rank(system_dynamics_matrix(pomdp, h, pomdp.horizon - h, budget)));
    } catch (const BudgetExceeded&) {
      r.dPsr.emplace_back(std::nullopt);
    }
  }
  for (int h = 1; h <= L; ++h) r.sigmaMin.push_back(smallest_singular_value(m_step_emission(pomdp, h, lifting.m)));
  try {
    const RegularityResult reg = regularity_alpha(lifting.model, -1, RegularityMode::Auto, budget);
    r.alpha = reg.alpha;
    r.poolDepth = reg.poolDepth;
  } catch (const BudgetExceeded&) {
  } catch (const RankDeficientPool&) {
  }
  return r;
}

LiftReport lift_weakly_revealing(const Pomdp& pomdp, int m) {
  return make_lift_report(lift_weakly_revealing_model(pomdp, m));
}

LiftReport lift_decodable(const Pomdp& pomdp, int m, const std::optional<Decoder>& decoder) {
  return make_lift_report(lift_decodable_model(pomdp, m, decoder));
}

}  // namespace psrlab
