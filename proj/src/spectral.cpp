#include "olsaudit/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "olsaudit/rng.hpp"

namespace audit {

namespace {

constexpr double kConditionGuard = 1e10;

}  // namespace

Matrix spectral_w_matrix(int d) {
    const int dd = d * d;
    Vector phi = Vector::Zero(dd);  // vec(I_d)
    for (int j = 0; j < d; ++j) phi(j * d + j) = 1.0;
    const double a = std::sqrt(3.0 / (2.0 + d));
    const double b = std::sqrt(3.0 / 2.0);
    Matrix w = b * Matrix::Identity(dd, dd);
    w += (a - b) / d * (phi * phi.transpose());
    return w;
}

SpectralCertificate spectral_lower_bound(const Dataset& ds) {
    const int n = ds.n();
    const int d = ds.d();
    require_finite(ds.X, "spectral_lower_bound: X");
    require_finite(ds.y, "spectral_lower_bound: y");

    const Matrix sigma = ds.X.transpose() * ds.X / n;
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
    const Vector lam = es.eigenvalues();
    const double lam_min = lam(0), lam_max = lam(d - 1);
    if (!(lam_min > 0.0) || lam_max / lam_min > kConditionGuard)
        throw SingularCovariance("spectral_lower_bound: covariance condition number exceeds 1e10");

    // Σ^{-1/2} and Σ^{-1} share the eigenbasis; one decomposition serves both.
    const Matrix& u = es.eigenvectors();
    const Matrix isqrt = u * lam.cwiseSqrt().cwiseInverse().asDiagonal() * u.transpose();
    const Matrix sigma_inv = u * lam.cwiseInverse().asDiagonal() * u.transpose();

    const Vector beta = ols_fit(ds.X, ds.y);
    const Vector resid = ds.X * beta - ds.y;

    // c1² = λmax(Σ^{-1/2}·M₁M₁ᵀ·Σ^{-1/2})/n with M₁ columns Xᵢrᵢ, and
    // c2² = λmax(W·M₂M₂ᵀ·W)/n with M₂ columns (Σ^{-1/2}Xᵢ)⊗(Σ^{-1/2}Xᵢ).
    // Accumulating the Grams keeps memory at O(d⁴) regardless of n.
    const int dd = d * d;
    Matrix g1 = Matrix::Zero(d, d);
    Matrix g2 = Matrix::Zero(dd, dd);
    Vector z(d), zz(dd);
    for (int i = 0; i < n; ++i) {
        const auto xi = ds.X.row(i).transpose();
        g1.noalias() += (resid(i) * resid(i)) * (xi * xi.transpose());
        z.noalias() = isqrt * xi;
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) zz(a * d + b) = z(a) * z(b);
        g2.noalias() += zz * zz.transpose();
    }

    Eigen::SelfAdjointEigenSolver<Matrix> es1(isqrt * g1 * isqrt);
    const Matrix w = spectral_w_matrix(d);
    Eigen::SelfAdjointEigenSolver<Matrix> es2(w * g2 * w);

    SpectralCertificate cert;
    cert.c1 = std::sqrt(std::max(0.0, es1.eigenvalues()(d - 1)) / n);
    cert.c2 = std::sqrt(std::max(0.0, es2.eigenvalues()(dd - 1)) / n);
    cert.beta_target = beta(ds.target);
    if (cert.beta_target <= 0.0) return cert;  // already nonpositive: bound 0

    const double denom = cert.c1 * std::sqrt(sigma_inv(ds.target, ds.target)) +
                         cert.c2 * std::abs(cert.beta_target);
    const double b2 = cert.beta_target * cert.beta_target;
    cert.epsilon = b2 / (denom * denom);
    cert.epsilon_unsquared = b2 / denom;
    cert.lower_bound = static_cast<int>(std::ceil(cert.epsilon * n - 1e-9));
    if (cert.lower_bound < 0) cert.lower_bound = 0;
    if (cert.lower_bound > n) cert.lower_bound = n;
    return cert;
}

bool verify_envelope_constants(const Dataset& ds, double c1, double c2, int trials,
                               std::uint64_t seed) {
    const int n = ds.n();
    const int d = ds.d();
    const Matrix sigma = ds.X.transpose() * ds.X / n;
    const Vector beta = ols_fit(ds.X, ds.y);
    const Vector resid = ds.X * beta - ds.y;

    Rng rng(seed);
    Vector v(d);
    for (int t = 0; t < trials; ++t) {
        for (int j = 0; j < d; ++j) v(j) = rng.normal();
        const double norm = v.norm();
        if (norm == 0.0) continue;
        v /= norm;

        const Vector proj = ds.X * v;
        double lhs1 = 0.0, lhs2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double p2 = proj(i) * proj(i);
            lhs1 += p2 * resid(i) * resid(i);
            lhs2 += p2 * p2;
        }
        lhs1 /= n;
        lhs2 /= n;

        const double quad = v.dot(sigma * v);
        const double rhs1 = c1 * c1 * quad;
        const double rhs2 = c2 * c2 * quad * quad;
        if (lhs1 > rhs1 + 1e-9 * std::max(1.0, rhs1)) return false;
        if (lhs2 > rhs2 + 1e-9 * std::max(1.0, rhs2)) return false;
    }
    return true;
}

}  // namespace audit
