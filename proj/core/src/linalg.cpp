#include "psrlab/linalg.hpp"

#include <algorithm>

namespace psrlab {

Vector singular_values(const Matrix& m) {
  if (m.size() == 0) return Vector();
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues();
}

int numerical_rank(const Matrix& m, double relTol) {
  const Vector s = singular_values(m);
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  const double cut = relTol * s(0);
  return static_cast<int>((s.array() > cut).count());
}

Matrix pseudo_inverse(const Matrix& m, double relTol) {
  if (m.size() == 0) return Matrix::Zero(m.cols(), m.rows());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  Matrix result = Matrix::Zero(m.cols(), m.rows());
  if (s.size() == 0 || s(0) <= 0.0) return result;
  const double cut = relTol * s(0);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cut) {
      result.noalias() += (svd.matrixV().col(i) / s(i)) * svd.matrixU().col(i).transpose();
    }
  }
  return result;
}

double norm_1to1(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

Matrix column_space_projector(const Matrix& k, double relTol) {
  const auto rows = k.rows();
  if (k.size() == 0) return Matrix::Zero(rows, rows);
  Eigen::JacobiSVD<Matrix> svd(k, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  Matrix p = Matrix::Zero(rows, rows);
  if (s.size() == 0 || s(0) <= 0.0) return p;
  const double cut = relTol * s(0);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cut) p.noalias() += svd.matrixU().col(i) * svd.matrixU().col(i).transpose();
  }
  return p;
}

double smallest_singular_value(const Matrix& m) {
  if (m.size() == 0 || m.rows() < m.cols()) return 0.0;
  const Vector s = singular_values(m);
  return s(s.size() - 1);
}

}  // namespace psrlab
