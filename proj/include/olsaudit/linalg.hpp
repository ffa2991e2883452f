#pragma once

#include <Eigen/Dense>

#include "olsaudit/types.hpp"

namespace audit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Throws std::invalid_argument when any entry is NaN or infinite.
void require_finite(const Matrix& A, const char* what);
void require_finite(const Vector& v, const char* what);

// Least-squares fit of y on the rows of X. Rank-deficient designs get the
// minimum-norm solution; `rank` (optional) receives the numerical rank of X
// at singular-value cutoff 1e-10 * sigma_max.
Vector ols_fit(const Matrix& X, const Vector& y, int* rank = nullptr);

// Weighted least squares, weights >= 0. Zero/one weights reduce to ols_fit
// on the kept rows. Minimum-norm on rank deficiency, like ols_fit.
Vector weighted_ols_fit(const Matrix& X, const Vector& y, const Vector& w, int* rank = nullptr);

// Moore-Penrose pseudoinverse via SVD, cutoff 1e-10 * sigma_max.
Matrix pseudo_inverse(const Matrix& A);

// B with B*A*B = identity on range(A), for symmetric PSD A. Eigenvalues
// below 1e-10 * lambda_max are treated as zero. Throws NotSymmetric when
// |A - A^T|_inf > 1e-10 * |A|_inf.
Matrix sym_inv_sqrt(const Matrix& A);

// Largest singular value to 1e-9 relative accuracy. Power iteration on the
// smaller of A^T A and A A^T with a deterministic start vector.
double spectral_norm(const Matrix& A);

// True when e_target lies in the row space of X, i.e. the target coefficient
// is identified by the rows of X.
bool target_identified(const Matrix& X, int target);

}  // namespace audit
