#include "olsaudit/spectral.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "olsaudit/oracle.hpp"
#include "oracles.hpp"

using audit::Matrix;
using audit::Vector;

namespace {

TEST_CASE("whitening matrix is the identity in one dimension") {
    const Matrix w = audit::spectral_w_matrix(1);
    REQUIRE(w.rows() == 1);
    CHECK(w(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("whitening matrix squares to the advertised inverse") {
    for (int d = 1; d <= 6; ++d) {
        const int dd = d * d;
        Vector phi = Vector::Zero(dd);
        for (int j = 0; j < d; ++j) phi(j * d + j) = 1.0;
        const Matrix target =
            (2.0 / 3.0) * Matrix::Identity(dd, dd) + (1.0 / 3.0) * (phi * phi.transpose());
        const Matrix w = audit::spectral_w_matrix(d);
        CHECK(((w * w * target) - Matrix::Identity(dd, dd)).lpNorm<Eigen::Infinity>() <= 1e-10);
    }
}

TEST_CASE("nonpositive target coefficient yields a zero bound with constants intact") {
    audit::Dataset ds;
    ds.X = Matrix::Identity(2, 2);
    ds.y = Vector(2);
    ds.y << 0, 1;
    ds.column_names = {"a", "b"};
    ds.target = 0;
    const audit::SpectralCertificate cert = audit::spectral_lower_bound(ds);
    CHECK(cert.beta_target == doctest::Approx(0.0));
    CHECK(cert.epsilon == 0.0);
    CHECK(cert.lower_bound == 0);
    CHECK(cert.c1 >= 0.0);
    CHECK(cert.c2 >= 0.0);
}

TEST_CASE("spectral bound never exceeds the exhaustive answer") {
    audit::Rng rng(51);
    int compared = 0;
    for (int rep = 0; rep < 60; ++rep) {
        const int n = 6 + static_cast<int>(rng.below(7));
        const int d = 1 + static_cast<int>(rng.below(3));
        const audit::Dataset raw = oracles::random_regression(rng, n, d, rep % 2 == 0, false);
        const auto [ds, sign] = audit::orient_dataset(raw);
        audit::SpectralCertificate cert;
        try {
            cert = audit::spectral_lower_bound(ds);
        } catch (const audit::SingularCovariance&) {
            continue;
        }
        const auto k = audit::brute_force_stability(ds, n);
        if (!k) continue;  // nothing to compare against; any bound is sound
        CHECK(cert.lower_bound <= *k);
        ++compared;
    }
    CHECK(compared > 30);
}

TEST_CASE("computed envelope constants survive randomized probing") {
    audit::Rng rng(52);
    const audit::Dataset ds = oracles::random_regression(rng, 60, 2, true, false);
    const audit::SpectralCertificate cert = audit::spectral_lower_bound(ds);
    REQUIRE(cert.c1 > 0.0);
    REQUIRE(cert.c2 > 0.0);
    CHECK(audit::verify_envelope_constants(ds, cert.c1, cert.c2, 10000));
    // Halving either constant leaves some direction uncovered.
    CHECK_FALSE(audit::verify_envelope_constants(ds, cert.c1 / 2, cert.c2, 10000));
    CHECK_FALSE(audit::verify_envelope_constants(ds, cert.c1, cert.c2 / 2, 10000));
}

// Subset covariances stay within the fourth-moment-controlled cone: removing
// an eps'-fraction of rows keeps (1/n)*sum_{kept} X_i X_i' above
// (1 - sqrt(c2^2 * eps')) * Sigma.
TEST_CASE("kept-subset covariance dominates the shrunken full covariance") {
    audit::Rng rng(53);
    const audit::Dataset ds = oracles::random_regression(rng, 40, 3, false, false);
    const audit::SpectralCertificate cert = audit::spectral_lower_bound(ds);
    const Matrix sigma = ds.X.transpose() * ds.X / ds.n();
    const double lam_max =
        Eigen::SelfAdjointEigenSolver<Matrix>(sigma).eigenvalues().maxCoeff();

    for (int rep = 0; rep < 100; ++rep) {
        Matrix sub = Matrix::Zero(3, 3);
        int removed = 0;
        for (int i = 0; i < ds.n(); ++i) {
            if (rng.uniform() < 0.25) {
                ++removed;
                continue;
            }
            sub.noalias() += ds.X.row(i).transpose() * ds.X.row(i);
        }
        sub /= ds.n();
        const double eps = static_cast<double>(removed) / ds.n();
        const double factor = std::max(0.0, 1.0 - std::sqrt(cert.c2 * cert.c2 * eps));
        const Matrix gap = sub - factor * sigma;
        const double lam_min = Eigen::SelfAdjointEigenSolver<Matrix>(gap).eigenvalues().minCoeff();
        CHECK(lam_min >= -1e-8 * lam_max);
    }
}

TEST_CASE("the bound fraction is invariant under joint rescaling") {
    audit::Rng rng(54);
    const audit::Dataset raw = oracles::random_regression(rng, 25, 2, false, false);
    const auto [ds, sign] = audit::orient_dataset(raw);
    audit::Dataset scaled = ds;
    scaled.X *= 3.7;
    scaled.y *= 3.7;
    const audit::SpectralCertificate a = audit::spectral_lower_bound(ds);
    const audit::SpectralCertificate b = audit::spectral_lower_bound(scaled);
    CHECK(b.epsilon == doctest::Approx(a.epsilon).epsilon(1e-10));
    CHECK(b.lower_bound == a.lower_bound);
}

TEST_CASE("an exactly linear response zeroes the gradient constant") {
    audit::Rng rng(55);
    audit::Dataset ds = oracles::random_regression(rng, 20, 2, false, false);
    Vector coef(2);
    coef << 2.0, 1.0;
    ds.y = ds.X * coef;
    const audit::SpectralCertificate cert = audit::spectral_lower_bound(ds);
    CHECK(cert.c1 <= 1e-10);
    CHECK(cert.c2 > 0.0);
}

TEST_CASE("inverse-covariance diagonal agrees with the inverse square root") {
    audit::Rng rng(56);
    const audit::Dataset ds = oracles::random_regression(rng, 30, 3, false, false);
    const Matrix sigma = ds.X.transpose() * ds.X / ds.n();
    const Matrix isqrt = audit::sym_inv_sqrt(sigma);
    const Matrix inv = audit::pseudo_inverse(sigma);
    for (int t = 0; t < 3; ++t) {
        const double direct = std::sqrt(inv(t, t));
        const double via_isqrt = isqrt.col(t).norm();
        CHECK(direct == doctest::Approx(via_isqrt).epsilon(1e-10));
    }
}

TEST_CASE("a duplicated column trips the condition guard") {
    audit::Rng rng(57);
    audit::Dataset ds = oracles::random_regression(rng, 15, 2, false, false);
    ds.X.col(1) = ds.X.col(0);
    CHECK_THROWS_AS(audit::spectral_lower_bound(ds), audit::SingularCovariance);
}

// The production path accumulates d^2-sized Grams; stacking the per-sample
// columns explicitly and taking operator norms must give the same constants.
TEST_CASE("gram accumulation matches the explicit stacked-matrix route") {
    audit::Rng rng(58);
    for (int rep = 0; rep < 5; ++rep) {
        const int n = 12 + static_cast<int>(rng.below(10));
        const int d = 2 + static_cast<int>(rng.below(2));
        const audit::Dataset ds = oracles::random_regression(rng, n, d, rep % 2 == 0, false);
        const audit::SpectralCertificate cert = audit::spectral_lower_bound(ds);

        const Matrix sigma = ds.X.transpose() * ds.X / n;
        const Matrix isqrt = audit::sym_inv_sqrt(sigma);
        const Vector beta = audit::ols_fit(ds.X, ds.y);
        const Vector resid = ds.X * beta - ds.y;

        Matrix m1(d, n);
        Matrix m2(d * d, n);
        for (int i = 0; i < n; ++i) {
            m1.col(i) = ds.X.row(i).transpose() * resid(i);
            const Vector z = isqrt * ds.X.row(i).transpose();
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) m2(a * d + b, i) = z(a) * z(b);
        }
        const double c1_alt = audit::spectral_norm(isqrt * m1) / std::sqrt(double(n));
        const double c2_alt =
            audit::spectral_norm(audit::spectral_w_matrix(d) * m2) / std::sqrt(double(n));
        CHECK(cert.c1 == doctest::Approx(c1_alt).epsilon(1e-8));
        CHECK(cert.c2 == doctest::Approx(c2_alt).epsilon(1e-8));
    }
}

}  // namespace
