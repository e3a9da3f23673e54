#pragma once

#include <cstddef>

namespace psrlab {

/// A history whose per-step conditional observation probability falls below
/// this is treated as unreachable.
inline constexpr double kReachTol = 1e-12;

/// Trajectory probabilities in [-kProbTol, 0) are rounding noise and clamp to
/// zero; anything more negative means the parameters are not a valid PSR.
inline constexpr double kProbTol = 1e-9;

/// Relative singular-value threshold for numerical rank and pseudoinverses.
inline constexpr double kSvdTol = 1e-8;

/// Log-likelihood floor: log(kProbFloor) replaces log(p) for p <= kProbFloor.
inline constexpr double kProbFloor = 1e-300;

inline constexpr std::size_t kDefaultEnumerationBudget = 1'000'000;

/// Global cap on enumerated trajectories / matrix cells. PSRLAB_BUDGET in the
/// environment overrides the default.
std::size_t enumeration_budget();

/// Throws BudgetExceeded when `count` exceeds `budget`. `what` names the
/// enumeration in the error message.
void check_budget(double count, std::size_t budget, const char* what);

}  // namespace psrlab
