#pragma once

#include <stdexcept>
#include <string>

namespace psrlab {

enum class ErrorKind {
  UnreachableHistory,
  InvalidModel,
  BudgetExceeded,
  DimensionMismatch,
  NotWeaklyRevealing,
  NotDecodable,
  RankDeficientPool,
  InvalidAlpha,
  GenerationFailed,
  ParseError,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base of every error thrown by the library. Callers that need to branch on
/// the failure category inspect kind() instead of catching subclasses.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define PSRLAB_DEFINE_ERROR(Name)                                              \
  class Name : public Error {                                                  \
   public:                                                                     \
    explicit Name(const std::string& what) : Error(ErrorKind::Name, what) {}   \
  };

PSRLAB_DEFINE_ERROR(UnreachableHistory)
PSRLAB_DEFINE_ERROR(InvalidModel)
PSRLAB_DEFINE_ERROR(BudgetExceeded)
PSRLAB_DEFINE_ERROR(DimensionMismatch)
PSRLAB_DEFINE_ERROR(NotDecodable)
PSRLAB_DEFINE_ERROR(RankDeficientPool)
PSRLAB_DEFINE_ERROR(InvalidAlpha)
PSRLAB_DEFINE_ERROR(GenerationFailed)
PSRLAB_DEFINE_ERROR(ParseError)

#undef PSRLAB_DEFINE_ERROR

/// Thrown when some m-step emission matrix is not full column rank.
class NotWeaklyRevealing : public Error {
 public:
  NotWeaklyRevealing(int step, double sigmaMin);
  int step() const noexcept { return step_; }
  double sigma_min() const noexcept { return sigmaMin_; }

 private:
  int step_;
  double sigmaMin_;
};

}  // namespace psrlab
