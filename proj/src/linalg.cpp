#include "rrhmm/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace rrhmm {

ThinSvd thin_svd(const Matrix& a) {
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

Vector singular_values(const Matrix& a) {
  if (a.size() == 0) return Vector();
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues();
}

int numerical_rank(const Vector& sigma, double rel_tol) {
  if (sigma.size() == 0 || sigma(0) <= 0.0) return 0;
  const double cutoff = rel_tol * sigma(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) >= cutoff) ++rank;
  return rank;
}

int numerical_rank(const Matrix& a, double rel_tol) {
  return numerical_rank(singular_values(a), rel_tol);
}

double sigma_k(const Matrix& a, int k) {
  const Vector s = singular_values(a);
  if (k < 1 || k > s.size()) return 0.0;
  return s(k - 1);
}

Matrix pinv(const Matrix& a, double rcond) {
  if (a.size() == 0) return Matrix::Zero(a.cols(), a.rows());
  const ThinSvd svd = thin_svd(a);
  const double cutoff = svd.sigma.size() > 0 ? rcond * svd.sigma(0) : 0.0;
  Vector inv = Vector::Zero(svd.sigma.size());
  for (Eigen::Index i = 0; i < svd.sigma.size(); ++i)
    if (svd.sigma(i) > cutoff && svd.sigma(i) > 0.0) inv(i) = 1.0 / svd.sigma(i);
  return svd.V * inv.asDiagonal() * svd.U.transpose();
}

void fix_column_signs(Matrix& u) {
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index r = 0; r < u.rows(); ++r) {
      const double v = std::abs(u(r, c));
      if (v > best_abs) {
        best_abs = v;
        best = r;
      }
    }
    if (u.rows() > 0 && u(best, c) < 0.0) u.col(c) *= -1.0;
  }
}

}  // namespace rrhmm
