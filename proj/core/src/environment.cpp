#include "psrlab/environment.hpp"

#include <vector>

#include "psrlab/errors.hpp"

namespace psrlab {

namespace {

std::span<const double> column(const Matrix& m, int c) {
  return {m.data() + static_cast<std::ptrdiff_t>(c) * m.rows(), static_cast<std::size_t>(m.rows())};
}

}  // namespace

Environment::Environment(Pomdp pomdp, std::uint64_t seed)
    : pomdp_(std::move(pomdp)), dynamics_(seed, CounterRng::kEpisode), actions_(seed, CounterRng::kAction) {
  pomdp_.validate();
}

ObsId Environment::emit() {
  if (step_ > pomdp_.horizon) return pomdp_.dummy_obs();
  return dynamics_.categorical(column(pomdp_.emit(step_), state_));
}

ObsId Environment::reset() {
  state_ = dynamics_.categorical(std::span<const double>(pomdp_.mu1.data(), static_cast<std::size_t>(pomdp_.mu1.size())));
  step_ = 1;
  lastObs_ = emit();
  return lastObs_;
}

ObsId Environment::step(ActId a, double& reward) {
  if (step_ < 1) throw InvalidModel("step() called before reset()");
  reward = step_ <= pomdp_.horizon ? pomdp_.rewards(step_, lastObs_, a) : 0.0;
  if (step_ < pomdp_.horizon) state_ = dynamics_.categorical(column(pomdp_.trans(step_, a), state_));
  ++step_;
  lastObs_ = emit();
  return lastObs_;
}

Episode Environment::simulate_episode(const Policy& pi) {
  Episode ep;
  const int H = pomdp_.horizon;
  ep.trajectory.obs.reserve(static_cast<std::size_t>(H));
  ep.trajectory.act.reserve(static_cast<std::size_t>(H));
  std::vector<double> dist(static_cast<std::size_t>(pomdp_.actCount));
  ObsId o = reset();
  for (int h = 1; h <= H; ++h) {
    ep.trajectory.obs.push_back(o);
    pi.distribution(h, ep.trajectory, dist);
    const ActId a = actions_.categorical(dist);
    ep.trajectory.act.push_back(a);
    double r = 0.0;
    o = step(a, r);
    ep.reward += r;
  }
  return ep;
}

}  // namespace psrlab
