#include "olsaudit/influence.hpp"

#include <algorithm>
#include <numeric>

namespace audit {

namespace {

// Rows of ds with the given (sorted) rows removed.
Dataset remove_rows(const Dataset& ds, const std::vector<int>& removal) {
    SubsetMask mask{removal};
    const std::vector<int> kept = mask.complement(ds.n());
    Dataset out = ds;
    out.X = Matrix(static_cast<int>(kept.size()), ds.d());
    out.y = Vector(static_cast<int>(kept.size()));
    for (int i = 0; i < static_cast<int>(kept.size()); ++i) {
        out.X.row(i) = ds.X.row(kept[i]);
        out.y(i) = ds.y(kept[i]);
    }
    return out;
}

// "<= 0" up to refit noise: whether a flip that lands exactly on zero counts
// must not depend on the sign of the last floating-point bit, so comparisons
// against refitted coefficients get a tolerance scaled to the response.
double flip_tolerance(const Dataset& ds) {
    return 1e-9 * std::max(1.0, ds.y.cwiseAbs().maxCoeff());
}

StabilityCertificate make_upper(const std::string& method, std::vector<int> removal) {
    StabilityCertificate cert;
    cert.method = method;
    cert.bound_type = BoundType::Upper;
    cert.value = static_cast<int>(removal.size());
    cert.removal_set = std::move(removal);
    cert.verified = true;  // constructed only after removal_flips succeeded
    return cert;
}

}  // namespace

Vector influence_scores(const Dataset& ds) {
    const Matrix pinv = pseudo_inverse(ds.X.transpose() * ds.X);
    const Vector beta = pinv * (ds.X.transpose() * ds.y);
    const Vector resid = ds.y - ds.X * beta;
    // score_i = e_target' (X'X)^+ X_i r_i; compute the target row once.
    const Vector trow = pinv.row(ds.target);
    Vector scores(ds.n());
    for (int i = 0; i < ds.n(); ++i) scores(i) = trow.dot(ds.X.row(i)) * resid(i);
    return scores;
}

Vector exact_loo_deltas(const Dataset& ds, std::vector<char>* usable) {
    const Matrix pinv = pseudo_inverse(ds.X.transpose() * ds.X);
    const Vector beta = pinv * (ds.X.transpose() * ds.y);
    const Vector resid = ds.y - ds.X * beta;
    const Vector trow = pinv.row(ds.target);
    Vector deltas(ds.n());
    if (usable) usable->assign(ds.n(), 1);
    for (int i = 0; i < ds.n(); ++i) {
        const double h = ds.X.row(i) * pinv * ds.X.row(i).transpose();
        if (h >= 1.0 - 1e-12) {
            deltas(i) = 0.0;
            if (usable) (*usable)[i] = 0;
            continue;
        }
        deltas(i) = -trow.dot(ds.X.row(i)) * resid(i) / (1.0 - h);
    }
    return deltas;
}

bool removal_flips(const Dataset& ds, const std::vector<int>& removal) {
    if (static_cast<int>(removal.size()) >= ds.n()) return false;
    const Dataset sub = remove_rows(ds, removal);
    if (!target_identified(sub.X, sub.target)) return false;
    const Vector beta = ols_fit(sub.X, sub.y);
    return beta(sub.target) <= flip_tolerance(ds);
}

std::optional<StabilityCertificate> amip_upper_bound(const Dataset& ds) {
    const Vector beta = ols_fit(ds.X, ds.y);
    if (beta(ds.target) <= flip_tolerance(ds)) return make_upper("amip", {});

    const Vector scores = influence_scores(ds);
    std::vector<int> order(ds.n());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return scores(a) > scores(b); });

    // Flip is not guaranteed monotone along the ranking, so scan prefixes.
    std::vector<int> removal;
    for (int len = 1; len < ds.n(); ++len) {
        removal.assign(order.begin(), order.begin() + len);
        std::sort(removal.begin(), removal.end());
        if (removal_flips(ds, removal)) return make_upper("amip", removal);
    }
    return std::nullopt;
}

std::optional<StabilityCertificate> greedy_resolve_upper_bound(const Dataset& ds, int max_iters) {
    if (max_iters < 0) max_iters = ds.n() - 1;
    max_iters = std::min(max_iters, ds.n() - 1);

    std::vector<int> removal;  // original row indices, sorted on return
    Dataset cur = ds;
    std::vector<int> rows(ds.n());  // current row -> original row
    std::iota(rows.begin(), rows.end(), 0);

    for (int iter = 0; iter <= max_iters; ++iter) {
        if (!target_identified(cur.X, cur.target)) return std::nullopt;
        const Vector beta = ols_fit(cur.X, cur.y);
        if (beta(cur.target) <= flip_tolerance(ds)) {
            std::sort(removal.begin(), removal.end());
            if (!removal_flips(ds, removal)) return std::nullopt;  // final verification
            return make_upper("greedy", removal);
        }
        if (iter == max_iters || cur.n() <= 1) break;

        const Vector scores = influence_scores(cur);
        int best = 0;
        for (int i = 1; i < cur.n(); ++i)
            if (scores(i) > scores(best)) best = i;  // ties keep lowest index

        removal.push_back(rows[best]);
        std::vector<int> drop{best};
        cur = remove_rows(cur, drop);
        rows.erase(rows.begin() + best);
    }
    return std::nullopt;
}

}  // namespace audit
