#include "psrlab/psr_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "psrlab/errors.hpp"

namespace psrlab {

RewardTable::RewardTable(int horizon, int obsCount, int actCount)
    : horizon_(horizon), obsCount_(obsCount), actCount_(actCount) {
  values_.assign(static_cast<std::size_t>(horizon) * static_cast<std::size_t>(obsCount) *
                     static_cast<std::size_t>(actCount),
                 0.0);
}

double RewardTable::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

RewardTable RewardTable::scaled(double factor) const {
  RewardTable out = *this;
  for (double& v : out.values_) v *= factor;
  return out;
}

PsrModel::PsrModel(int horizon, int obsCount, int actCount, CoreTestSet coreTests, Vector q0,
                   std::vector<Matrix> ops, RewardTable rewards)
    : horizon_(horizon),
      obsCount_(obsCount),
      actCount_(actCount),
      coreTests_(std::move(coreTests)),
      q0_(std::move(q0)),
      ops_(std::move(ops)),
      rewards_(std::move(rewards)) {
  if (horizon_ < 1 || obsCount_ < 1 || actCount_ < 1) {
    throw DimensionMismatch("horizon and alphabet sizes must be positive");
  }
  const int L = readout_step();
  if (L < 1 || L > horizon_) {
    throw DimensionMismatch("core tests cover " + std::to_string(L) + " steps; horizon is " +
                            std::to_string(horizon_));
  }
  if (q0_.size() != coreTests_.size(1)) {
    throw DimensionMismatch("q0 has " + std::to_string(q0_.size()) + " entries but U_1 has " +
                            std::to_string(coreTests_.size(1)));
  }
  const std::size_t expected =
      static_cast<std::size_t>(L - 1) * static_cast<std::size_t>(obsCount_) * static_cast<std::size_t>(actCount_);
  if (ops_.size() != expected) {
    throw DimensionMismatch("expected " + std::to_string(expected) + " operators, got " +
                            std::to_string(ops_.size()));
  }
  for (int h = 1; h < L; ++h) {
    for (int o = 0; o < obsCount_; ++o) {
      for (int a = 0; a < actCount_; ++a) {
        const Matrix& m = op(o, a, h);
        if (m.rows() != coreTests_.size(h + 1) || m.cols() != coreTests_.size(h)) {
          throw DimensionMismatch("M_{" + std::to_string(o) + "," + std::to_string(a) + "," + std::to_string(h) +
                                  "} is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                                  ", expected " + std::to_string(coreTests_.size(h + 1)) + "x" +
                                  std::to_string(coreTests_.size(h)));
        }
      }
    }
  }
  if (rewards_.horizon() != horizon_) {
    throw DimensionMismatch("reward table horizon differs from model horizon");
  }
  for (const auto& step : coreTests_.all()) {
    for (const Test& t : step) {
      for (ObsId o : t.obs) {
        // Tests running past H may carry the dummy id obsCount.
        if (o < 0 || o > obsCount_) throw InvalidModel("core test observation id out of range: " + to_string(t));
      }
      for (ActId a : t.act) {
        if (a < 0 || a >= actCount_) throw InvalidModel("core test action id out of range: " + to_string(t));
      }
    }
  }
  build_derived();
}

void PsrModel::build_derived() {
  const int L = readout_step();
  const int n = horizon_ - L + 1;
  suffixes_.clear();
  for (Test& t : all_tests_of_length(n, obsCount_, actCount_)) {
    const int idx = coreTests_.index_of(L, t);
    if (idx < 0) {
      throw InvalidModel("readout test " + to_string(t) + " is not a core test at step " + std::to_string(L));
    }
    suffixes_.emplace_back(std::move(t), idx);
  }

  // w_{h} marginalises b_{tau_{h-1}} to P(o_{1:h-1} | do(a_{1:h-2})).
  Vector w = Vector::Zero(coreTests_.size(L));
  const double suffixWeight = std::pow(1.0 / actCount_, n - 1);
  for (const auto& [t, idx] : suffixes_) w[idx] += suffixWeight;

  obsVectors_.assign(static_cast<std::size_t>(std::max(L - 1, 0)) * static_cast<std::size_t>(obsCount_), Vector());
  for (int h = L - 1; h >= 1; --h) {
    Vector next = Vector::Zero(coreTests_.size(h));
    for (int o = 0; o < obsCount_; ++o) {
      Vector mo = Vector::Zero(coreTests_.size(h));
      for (int a = 0; a < actCount_; ++a) mo.noalias() += op(o, a, h).transpose() * w;
      mo /= actCount_;
      next += mo;
      obsVectors_[static_cast<std::size_t>(h - 1) * static_cast<std::size_t>(obsCount_) + static_cast<std::size_t>(o)] =
          std::move(mo);
    }
    w = std::move(next);
  }
}

PsrModel PsrModel::with_q0(Vector q0) const {
  return PsrModel(horizon_, obsCount_, actCount_, coreTests_, std::move(q0), ops_, rewards_);
}

PsrModel PsrModel::with_op(ObsId o, ActId a, int h, Matrix m) const {
  std::vector<Matrix> ops = ops_;
  ops.at(op_index(o, a, h)) = std::move(m);
  return PsrModel(horizon_, obsCount_, actCount_, coreTests_, q0_, std::move(ops), rewards_);
}

PsrModel PsrModel::with_rewards(RewardTable rewards) const {
  PsrModel out = *this;
  if (rewards.horizon() != horizon_) throw DimensionMismatch("reward table horizon differs from model horizon");
  out.rewards_ = std::move(rewards);
  return out;
}

const Vector& PsrModel::observation_vector(ObsId o, int h) const {
  if (h < 1 || h >= readout_step()) {
    throw DimensionMismatch("observation vector requested at step " + std::to_string(h));
  }
  return obsVectors_[static_cast<std::size_t>(h - 1) * static_cast<std::size_t>(obsCount_) +
                     static_cast<std::size_t>(o)];
}

Vector PsrModel::advance(const Vector& b, ObsId o, ActId a, int h) const {
  if (h >= readout_step()) return b;
  return op(o, a, h) * b;
}

double PsrModel::prefix_weight(const Vector& b, const Trajectory& tau, int h) const {
  const int L = readout_step();
  if (h == 0) return 1.0;
  if (h < L) return observation_vector(tau.obs[static_cast<std::size_t>(h - 1)], h).dot(b);
  // Suffix codes sharing (o_L, a_L, ..., o_h) form one contiguous block in
  // canonical order; its width counts the free digits a_h, o_{h+1}, ..., o_H.
  std::size_t lead = 0;
  for (int l = L; l <= h; ++l) {
    if (l > L) lead = lead * static_cast<std::size_t>(actCount_) + static_cast<std::size_t>(tau.act[static_cast<std::size_t>(l - 2)]);
    lead = lead * static_cast<std::size_t>(obsCount_) + static_cast<std::size_t>(tau.obs[static_cast<std::size_t>(l - 1)]);
  }
  std::size_t width = 1;
  for (int l = h; l < horizon_; ++l) width *= static_cast<std::size_t>(actCount_) * static_cast<std::size_t>(obsCount_);
  double s = 0.0;
  for (std::size_t c = lead * width; c < (lead + 1) * width; ++c) s += b[suffixes_[c].second];
  return s * std::pow(1.0 / actCount_, horizon_ - h);
}

int PsrModel::readout_index(const Trajectory& tau) const {
  const int L = readout_step();
  std::size_t code = 0;
  for (int l = L; l <= horizon_; ++l) {
    if (l > L) code = code * static_cast<std::size_t>(actCount_) + static_cast<std::size_t>(tau.act[static_cast<std::size_t>(l - 2)]);
    code = code * static_cast<std::size_t>(obsCount_) + static_cast<std::size_t>(tau.obs[static_cast<std::size_t>(l - 1)]);
  }
  return suffixes_[code].second;
}

bool PsrModel::same_parameters(const PsrModel& other, double tol) const {
  if (horizon_ != other.horizon_ || obsCount_ != other.obsCount_ || actCount_ != other.actCount_) return false;
  if (!(coreTests_ == other.coreTests_) || !(rewards_ == other.rewards_)) return false;
  if (q0_.size() != other.q0_.size() || (q0_ - other.q0_).cwiseAbs().maxCoeff() > tol) return false;
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    if (ops_[i].size() > 0 && (ops_[i] - other.ops_[i]).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

}  // namespace psrlab
