#pragma once

#include <optional>
#include <string>
#include <vector>

#include "psrlab/pomdp.hpp"
#include "psrlab/psr_model.hpp"
#include "psrlab/structure.hpp"

namespace psrlab {

enum class LiftKind { WeaklyRevealing, Decodable };

const char* to_string(LiftKind kind) noexcept;

/// A lifted model together with what is needed to produce the coefficient
/// vector m_{t,h} of any test, not only the core tests kept in the model.
struct Lifting {
  LiftKind kind = LiftKind::WeaklyRevealing;
  int m = 1;
  Pomdp pomdp;
  PsrModel model;
  std::vector<Matrix> emissionPinv;  // weakly revealing: (m-step emission at h)^+, h = 1..L
  std::optional<Decoder> decoder;    // decodable only

  /// m_{t,h} over U_h with <m_{t,h}, q_{tau_{h-1}}> = P(t | tau_{h-1}), for
  /// 1 <= h <= L.
  Vector test_coefficients(int h, const Test& t) const;
};

/// Core tests are all m-step futures at steps 1..H-m+1. Throws
/// NotWeaklyRevealing when some m-step emission matrix has sigma_min <=
/// kSvdTol.
Lifting lift_weakly_revealing_model(const Pomdp& pomdp, int m);

/// Same core tests, with coefficients built from the decoder. Runs the
/// decodability check (and checks `decoder` against it when given); throws
/// NotDecodable.
Lifting lift_decodable_model(const Pomdp& pomdp, int m, const std::optional<Decoder>& decoder = std::nullopt);

struct LiftReport {
  LiftKind kind = LiftKind::WeaklyRevealing;
  int m = 1;
  PsrModel model;
  /// Max |<m_{t,h}, q_tau> - P(t | tau)| per step over reachable histories and
  /// tests of length <= m + 1; empty entries were skipped for budget.
  std::vector<std::optional<double>> residuals;
  std::vector<std::optional<int>> dPsr;  // h = 0..H-1
  std::vector<double> sigmaMin;          // h = 1..L
  std::optional<double> alpha;
  int poolDepth = 0;
};

/// Largest linearity residual at step h over reachable histories of h-1 steps
/// and every test of length 1..maxTestLen.
double linearity_residual(const Lifting& lifting, int h, int maxTestLen);

LiftReport make_lift_report(const Lifting& lifting, std::size_t budget = enumeration_budget());

LiftReport lift_weakly_revealing(const Pomdp& pomdp, int m);
LiftReport lift_decodable(const Pomdp& pomdp, int m, const std::optional<Decoder>& decoder = std::nullopt);

}  // namespace psrlab
