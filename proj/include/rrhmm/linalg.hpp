#pragma once

#include <Eigen/Dense>

namespace rrhmm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

//! Singular values below this fraction of the largest count as zero.
inline constexpr double kRankTolerance = 1e-10;

struct ThinSvd {
  Matrix U;
  Vector sigma;  // descending
  Matrix V;
};

ThinSvd thin_svd(const Matrix& a);

Vector singular_values(const Matrix& a);

//! Number of singular values >= rel_tol * sigma_1 (0 for the zero matrix).
int numerical_rank(const Vector& sigma, double rel_tol = kRankTolerance);
int numerical_rank(const Matrix& a, double rel_tol = kRankTolerance);

//! k-th largest singular value (1-based k); 0 when k exceeds the spectrum length.
double sigma_k(const Matrix& a, int k);

//! Moore-Penrose pseudoinverse dropping singular values below rcond * sigma_1.
Matrix pinv(const Matrix& a, double rcond = 1e-10);

//! Flip column signs so each column's largest-magnitude entry is positive.
//! Ties resolve to the lower row index.
void fix_column_signs(Matrix& u);

}  // namespace rrhmm
