#include "olsaudit/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <string>

namespace audit {

namespace {

// Advances a k-subset of [0,n) in lexicographic order; false when exhausted.
bool next_combination(std::vector<int>& c, int n) {
    const int k = static_cast<int>(c.size());
    for (int i = k - 1; i >= 0; --i) {
        if (c[i] < n - k + i) {
            ++c[i];
            for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
            return true;
        }
    }
    return false;
}

// Target coefficient of the least-squares fit with gram = X'X and xty = X'y,
// through an eigendecomposition so rank-deficient kept sets are detected.
// Returns false when the target coefficient is not identified.
bool fit_target(const Matrix& gram, const Vector& xty, int target, double* beta_target) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
    const Vector& lam = es.eigenvalues();
    const Matrix& v = es.eigenvectors();
    const double lmax = lam.size() > 0 ? std::max(lam.maxCoeff(), 0.0) : 0.0;
    const double cutoff = 1e-10 * lmax;
    double null_mass = 0.0;  // squared component of e_target outside range(gram)
    double bt = 0.0;
    for (int i = 0; i < lam.size(); ++i) {
        const double vt = v(target, i);
        if (lam(i) > cutoff && lam(i) > 0.0)
            bt += vt * (v.col(i).dot(xty)) / lam(i);
        else
            null_mass += vt * vt;
    }
    if (null_mass > 1e-16) return false;
    *beta_target = bt;
    return true;
}

}  // namespace

std::optional<int> brute_force_stability(const Dataset& ds, int max_k) {
    const int n = ds.n();
    if (!(n <= 20 || max_k <= 3))
        throw TooLarge("brute_force_stability: n=" + std::to_string(n) +
                       ", max_k=" + std::to_string(max_k));
    require_finite(ds.X, "brute_force_stability X");
    require_finite(ds.y, "brute_force_stability y");

    const Matrix full_gram = ds.X.transpose() * ds.X;
    const Vector full_xty = ds.X.transpose() * ds.y;
    const int limit = std::min(max_k, n);
    // Same zero-boundary slack as removal_flips: a flip landing exactly on
    // zero must count regardless of the eigensolver's rounding direction.
    const double tol = 1e-9 * std::max(1.0, ds.y.cwiseAbs().maxCoeff());

    std::vector<Matrix> row_grams(n);
    for (int i = 0; i < n; ++i) row_grams[i] = ds.X.row(i).transpose() * ds.X.row(i);

    for (int k = 0; k <= limit; ++k) {
        std::vector<int> removed(k);
        for (int i = 0; i < k; ++i) removed[i] = i;
        do {
            Matrix gram = full_gram;
            Vector xty = full_xty;
            for (int idx : removed) {
                gram -= row_grams[idx];
                xty -= ds.X.row(idx).transpose() * ds.y(idx);
            }
            double bt = 0.0;
            if (fit_target(gram, xty, ds.target, &bt) && bt <= tol) return k;
        } while (k > 0 && next_combination(removed, n));
    }
    return std::nullopt;
}

std::optional<int> brute_force_did(const DiDView& view, int max_k) {
    const int N = view.N;
    if (!(N <= 20 || max_k <= 3))
        throw TooLarge("brute_force_did: N=" + std::to_string(N) +
                       ", max_k=" + std::to_string(max_k));

    // Flatten deltas back into individual order, remembering group tags.
    std::vector<double> delta(N);
    std::vector<char> is_treated(N, 0);
    for (int i = 0; i < static_cast<int>(view.idx_treated.size()); ++i) {
        delta[view.idx_treated[i]] = view.deltas_treated(i);
        is_treated[view.idx_treated[i]] = 1;
    }
    for (int i = 0; i < static_cast<int>(view.idx_control.size()); ++i)
        delta[view.idx_control[i]] = view.deltas_control(i);

    double sum_t = view.deltas_treated.sum();
    double sum_all = sum_t + view.deltas_control.sum();
    const int full_nt = static_cast<int>(view.idx_treated.size());

    const int limit = std::min(max_k, N);
    for (int k = 0; k <= limit; ++k) {
        std::vector<int> removed(k);
        for (int i = 0; i < k; ++i) removed[i] = i;
        do {
            int nt = full_nt, total = N - k;
            double st = sum_t, sa = sum_all;
            for (int idx : removed) {
                sa -= delta[idx];
                if (is_treated[idx]) {
                    st -= delta[idx];
                    --nt;
                }
            }
            if (nt < 1 || total - nt < 1) continue;
            // mean of kept treated <= mean of all kept, multiplied out.
            if (st * total - sa * nt <= 0.0) return k;
        } while (k > 0 && next_combination(removed, N));
    }
    return std::nullopt;
}

}  // namespace audit
