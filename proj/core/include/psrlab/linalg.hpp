#pragma once

#include <Eigen/Dense>

#include "psrlab/tolerances.hpp"

namespace psrlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Singular values in descending order.
Vector singular_values(const Matrix& m);

/// Number of singular values above relTol times the largest one. The zero
/// (or empty) matrix has rank 0.
int numerical_rank(const Matrix& m, double relTol = kSvdTol);

/// Moore-Penrose pseudoinverse via SVD, discarding singular values at or
/// below relTol times the largest.
Matrix pseudo_inverse(const Matrix& m, double relTol = kSvdTol);

/// Induced l1 operator norm: the largest absolute column sum.
double norm_1to1(const Matrix& m);

/// Orthogonal projector onto the column space of k (numerical rank relTol).
Matrix column_space_projector(const Matrix& k, double relTol = kSvdTol);

/// Smallest of the min(rows, cols) singular values, reported as 0 when the
/// matrix has fewer rows than columns (it cannot have full column rank).
double smallest_singular_value(const Matrix& m);

}  // namespace psrlab
