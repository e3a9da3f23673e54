#include "psrlab/errors.hpp"

#include <cstdio>

namespace psrlab {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::UnreachableHistory: return "UnreachableHistory";
    case ErrorKind::InvalidModel: return "InvalidModel";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotWeaklyRevealing: return "NotWeaklyRevealing";
    case ErrorKind::NotDecodable: return "NotDecodable";
    case ErrorKind::RankDeficientPool: return "RankDeficientPool";
    case ErrorKind::InvalidAlpha: return "InvalidAlpha";
    case ErrorKind::GenerationFailed: return "GenerationFailed";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

namespace {
std::string describe_sigma(int step, double sigma) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "sigma_min of the emission matrix at step %d is %.6g", step, sigma);
  return buf;
}
}  // namespace

NotWeaklyRevealing::NotWeaklyRevealing(int step, double sigmaMin)
    : Error(ErrorKind::NotWeaklyRevealing, describe_sigma(step, sigmaMin)),
      step_(step),
      sigmaMin_(sigmaMin) {}

}  // namespace psrlab
