#include "olsaudit/exact_binary.hpp"

#include <algorithm>
#include <numeric>

namespace audit {

PrefixSums build_prefix_sums(const BinaryTreatmentView& view) {
    const int n0 = static_cast<int>(view.y0.size());
    const int n1 = static_cast<int>(view.y1.size());
    if (n0 == 0 || n1 == 0) throw EmptyGroup("build_prefix_sums: empty group");

    PrefixSums ps;
    ps.ord0.resize(n0);
    ps.ord1.resize(n1);
    std::iota(ps.ord0.begin(), ps.ord0.end(), 0);
    std::iota(ps.ord1.begin(), ps.ord1.end(), 0);
    // Controls descending, treated ascending; ties by position for a
    // deterministic certificate.
    std::stable_sort(ps.ord0.begin(), ps.ord0.end(),
                     [&](int a, int b) { return view.y0(a) > view.y0(b); });
    std::stable_sort(ps.ord1.begin(), ps.ord1.end(),
                     [&](int a, int b) { return view.y1(a) < view.y1(b); });

    ps.s0.assign(n0 + 1, 0.0);
    ps.s1.assign(n1 + 1, 0.0);
    for (int i = 0; i < n0; ++i) ps.s0[i + 1] = ps.s0[i] + view.y0(ps.ord0[i]);
    for (int i = 0; i < n1; ++i) ps.s1[i + 1] = ps.s1[i] + view.y1(ps.ord1[i]);
    return ps;
}

namespace {

// Witnessing l for feasibility at k, or -1. l counts kept controls.
int witness_at_k(const PrefixSums& ps, int n, int k) {
    const int n0 = static_cast<int>(ps.s0.size()) - 1;
    const int n1 = static_cast<int>(ps.s1.size()) - 1;
    const int lo = std::max(1, n - k - n1);
    const int hi = std::min(n0, n - k - 1);
    for (int l = lo; l <= hi; ++l) {
        const int m = n - k - l;  // kept treated count
        // slope <= 0 iff mean of kept treated <= mean of kept controls,
        // i.e. l * s1[m] <= m * s0[l].
        if (-static_cast<double>(m) * ps.s0[l] + static_cast<double>(l) * ps.s1[m] <= 0.0)
            return l;
    }
    return -1;
}

}  // namespace

bool feasible_at_k(const PrefixSums& ps, int n, int k) { return witness_at_k(ps, n, k) >= 0; }

BinaryAuditResult audit_binary(const BinaryTreatmentView& view) {
    const int n0 = static_cast<int>(view.y0.size());
    const int n1 = static_cast<int>(view.y1.size());
    const int n = n0 + n1;
    const PrefixSums ps = build_prefix_sums(view);

    BinaryAuditResult result;
    if (feasible_at_k(ps, n, 0)) {
        result.k = 0;
        return result;
    }
    const int max_k = n - 2;  // at least one kept sample per group
    if (max_k < 1 || !feasible_at_k(ps, n, max_k)) return result;  // no flip possible

    // Feasibility is monotone in k: removing one more sample never hurts.
    int lo = 0, hi = max_k;  // lo infeasible, hi feasible
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        if (feasible_at_k(ps, n, mid))
            hi = mid;
        else
            lo = mid;
    }
    const int k = hi;
    const int l = witness_at_k(ps, n, k);
    const int m = n - k - l;

    // Keep the l largest controls and the m smallest treated samples; remove
    // the rest: controls from sorted position l on, treated from m on.
    result.k = k;
    for (int i = l; i < n0; ++i) result.removal.push_back(view.idx0[ps.ord0[i]]);
    for (int i = m; i < n1; ++i) result.removal.push_back(view.idx1[ps.ord1[i]]);
    std::sort(result.removal.begin(), result.removal.end());
    return result;
}

}  // namespace audit
