#include "olsaudit/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace audit {

namespace {

constexpr double kRankCutoff = 1e-10;      // relative singular-value cutoff
constexpr double kSymTol = 1e-10;          // relative symmetry tolerance
constexpr double kPowerTol = 1e-9;         // relative accuracy of spectral_norm

// min-norm solve of A x = b through an SVD of A with relative cutoff.
Vector svd_solve(const Matrix& A, const Vector& b, int* rank) {
    Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    const double cutoff = s.size() > 0 ? kRankCutoff * s(0) : 0.0;
    Vector inv_s = Vector::Zero(s.size());
    int r = 0;
    for (int i = 0; i < s.size(); ++i) {
        if (s(i) > cutoff && s(i) > 0.0) {
            inv_s(i) = 1.0 / s(i);
            ++r;
        }
    }
    if (rank) *rank = r;
    return svd.matrixV() * inv_s.asDiagonal() * (svd.matrixU().transpose() * b);
}

}  // namespace

void require_finite(const Matrix& A, const char* what) {
    if (!A.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entry");
}

void require_finite(const Vector& v, const char* what) {
    if (!v.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entry");
}

Vector ols_fit(const Matrix& X, const Vector& y, int* rank) {
    if (X.rows() != y.size()) throw std::invalid_argument("ols_fit: X rows != y length");
    return svd_solve(X, y, rank);
}

Vector weighted_ols_fit(const Matrix& X, const Vector& y, const Vector& w, int* rank) {
    if (X.rows() != y.size() || X.rows() != w.size())
        throw std::invalid_argument("weighted_ols_fit: shape mismatch");
    if ((w.array() < 0.0).any())
        throw std::invalid_argument("weighted_ols_fit: negative weight");
    // Minimize sum_i w_i (  <X_i, b> - y_i )^2 = |sqrt(w) .* (X b - y)|^2.
    const Vector sw = w.array().sqrt();
    return svd_solve(sw.asDiagonal() * X, sw.asDiagonal() * y, rank);
}

Matrix pseudo_inverse(const Matrix& A) {
    Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    const double cutoff = s.size() > 0 ? kRankCutoff * s(0) : 0.0;
    Vector inv_s = Vector::Zero(s.size());
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > cutoff && s(i) > 0.0) inv_s(i) = 1.0 / s(i);
    return svd.matrixV() * inv_s.asDiagonal() * svd.matrixU().transpose();
}

Matrix sym_inv_sqrt(const Matrix& A) {
    if (A.rows() != A.cols()) throw NotSymmetric("sym_inv_sqrt: matrix not square");
    const double scale = A.cwiseAbs().maxCoeff();
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > kSymTol * std::max(1.0, scale))
        throw NotSymmetric("sym_inv_sqrt: asymmetry beyond tolerance");
    Eigen::SelfAdjointEigenSolver<Matrix> es(A);
    const Vector& lam = es.eigenvalues();
    const double lmax = lam.size() > 0 ? lam.maxCoeff() : 0.0;
    const double cutoff = kRankCutoff * std::max(lmax, 0.0);
    Vector d = Vector::Zero(lam.size());
    for (int i = 0; i < lam.size(); ++i)
        if (lam(i) > cutoff && lam(i) > 0.0) d(i) = 1.0 / std::sqrt(lam(i));
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

double spectral_norm(const Matrix& A) {
    if (A.rows() == 0 || A.cols() == 0) throw std::invalid_argument("spectral_norm: empty matrix");
    // Power iteration on the smaller Gram matrix; its top eigenvalue is
    // sigma_max(A)^2.
    const bool use_ata = A.cols() <= A.rows();
    const Eigen::Index m = use_ata ? A.cols() : A.rows();
    Matrix G(m, m);
    if (use_ata)
        G.noalias() = A.transpose() * A;
    else
        G.noalias() = A * A.transpose();

    const double gnorm = G.cwiseAbs().maxCoeff();
    if (gnorm == 0.0) return 0.0;

    // Deterministic start: all-ones plus a small index ramp so the vector is
    // not orthogonal to the top eigenspace by symmetry accidents.
    Vector v(m);
    for (Eigen::Index i = 0; i < m; ++i) v(i) = 1.0 + 0.001 * static_cast<double>(i);
    v.normalize();

    double lambda = 0.0;
    const int max_iters = 100000;
    for (int it = 0; it < max_iters; ++it) {
        Vector gv = G * v;
        const double norm = gv.norm();
        if (norm == 0.0) return 0.0;  // start vector fell in the null space
        lambda = v.dot(gv);
        // Convergence on the eigen-residual, scale-relative.
        if ((gv - lambda * v).norm() <= kPowerTol * std::max(lambda, gnorm * 1e-12)) {
            v = gv / norm;
            lambda = v.dot(G * v);
            break;
        }
        v = gv / norm;
    }
    return std::sqrt(std::max(lambda, 0.0));
}

bool target_identified(const Matrix& X, int target) {
    if (target < 0 || target >= X.cols()) throw std::invalid_argument("target_identified: bad index");
    if (X.rows() == 0) return false;
    // e_target is in the row space of X iff projecting it there is lossless:
    // X^+ X e = e up to the SVD cutoff.
    Vector e = Vector::Zero(X.cols());
    e(target) = 1.0;
    const Vector proj = pseudo_inverse(X) * (X * e);
    return (proj - e).cwiseAbs().maxCoeff() <= 1e-8;
}

}  // namespace audit
