#include "olsaudit/exact_did.hpp"

#include <algorithm>
#include <numeric>

namespace audit {

DiDPrefixSums build_did_prefix_sums(const DiDView& view) {
    const int nt = static_cast<int>(view.deltas_treated.size());
    const int nc = static_cast<int>(view.deltas_control.size());
    if (nt == 0 || nc == 0) throw EmptyGroup("build_did_prefix_sums: empty group");

    DiDPrefixSums ps;
    ps.ord_t.resize(nt);
    ps.ord_c.resize(nc);
    std::iota(ps.ord_t.begin(), ps.ord_t.end(), 0);
    std::iota(ps.ord_c.begin(), ps.ord_c.end(), 0);
    // Treated ascending (keep the smallest deltas), controls descending
    // (keep the largest); ties by position, deterministic.
    std::stable_sort(ps.ord_t.begin(), ps.ord_t.end(),
                     [&](int a, int b) { return view.deltas_treated(a) < view.deltas_treated(b); });
    std::stable_sort(ps.ord_c.begin(), ps.ord_c.end(),
                     [&](int a, int b) { return view.deltas_control(a) > view.deltas_control(b); });

    ps.st.assign(nt + 1, 0.0);
    ps.sc.assign(nc + 1, 0.0);
    for (int i = 0; i < nt; ++i) ps.st[i + 1] = ps.st[i] + view.deltas_treated(ps.ord_t[i]);
    for (int i = 0; i < nc; ++i) ps.sc[i + 1] = ps.sc[i] + view.deltas_control(ps.ord_c[i]);
    return ps;
}

namespace {

// Witnessing number of dropped treated individuals, or -1. Keeping the
// nt - l smallest treated deltas and the nc - (k - l) largest control deltas
// is optimal for pushing the kept treated mean below the kept overall mean.
int did_witness_at_k(const DiDPrefixSums& ps, int N, int nt, int k) {
    const int nc = N - nt;
    const int lo = std::max(0, k - nc + 1);
    const int hi = std::min(nt - 1, k);
    for (int l = lo; l <= hi; ++l) {
        const int kept_t = nt - l;
        const int kept_total = N - k;
        const double st = ps.st[kept_t];
        const double sc = ps.sc[nc - (k - l)];
        // st/kept_t - (st+sc)/kept_total <= 0, multiplied out (both
        // denominators positive).
        if (st * kept_total - (st + sc) * kept_t <= 0.0) return l;
    }
    return -1;
}

}  // namespace

bool did_feasible_at_k(const DiDPrefixSums& ps, int N, int nt, int k) {
    return did_witness_at_k(ps, N, nt, k) >= 0;
}

DiDAuditResult audit_did(const DiDView& view) {
    const int nt = static_cast<int>(view.deltas_treated.size());
    const int nc = static_cast<int>(view.deltas_control.size());
    const int N = nt + nc;
    const DiDPrefixSums ps = build_did_prefix_sums(view);

    DiDAuditResult result;
    if (did_feasible_at_k(ps, N, nt, 0)) {
        result.k = 0;
        return result;
    }
    const int max_k = N - 2;  // keep at least one individual per group
    if (max_k < 1 || !did_feasible_at_k(ps, N, nt, max_k)) return result;

    int lo = 0, hi = max_k;  // lo infeasible, hi feasible
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        if (did_feasible_at_k(ps, N, nt, mid))
            hi = mid;
        else
            lo = mid;
    }
    const int k = hi;
    const int l = did_witness_at_k(ps, N, nt, k);

    // Drop the l largest treated deltas and the k-l smallest control deltas.
    result.k = k;
    for (int i = nt - l; i < nt; ++i) result.removal.push_back(view.idx_treated[ps.ord_t[i]]);
    for (int i = nc - (k - l); i < nc; ++i) result.removal.push_back(view.idx_control[ps.ord_c[i]]);
    std::sort(result.removal.begin(), result.removal.end());
    return result;
}

}  // namespace audit
