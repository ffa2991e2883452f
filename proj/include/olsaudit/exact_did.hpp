#pragma once

#include <optional>

#include "olsaudit/data.hpp"

namespace audit {

// Cumulative sums over sorted deltas, empty prefix = 0:
//   st[m] = sum of the m smallest treated deltas,
//   sc[m] = sum of the m largest control deltas.
// ord_t/ord_c map sorted positions into view.idx_treated/idx_control slots.
struct DiDPrefixSums {
    std::vector<double> st, sc;
    std::vector<int> ord_t, ord_c;
};

DiDPrefixSums build_did_prefix_sums(const DiDView& view);

// True when dropping some l treated and k-l control individuals (keeping at
// least one of each) makes the kept treated mean delta <= the kept overall
// mean delta. l ranges over max(0, k-(N-nt)+1) .. min(nt-1, k).
bool did_feasible_at_k(const DiDPrefixSums& ps, int N, int nt, int k);

struct DiDAuditResult {
    std::optional<int> k;      // nullopt: no removal keeping both groups flips
    std::vector<int> removal;  // individual indices, size k, sorted
};

// Exact minimum number of individuals (before/after pairs) to remove so the
// interaction coefficient is <= 0, by binary search over k.
DiDAuditResult audit_did(const DiDView& view);

}  // namespace audit
