#pragma once

#include <optional>

#include "olsaudit/data.hpp"

namespace audit {

// Cumulative sums over sorted responses, empty prefix = 0:
//   s0[l] = sum of the l largest control responses,
//   s1[m] = sum of the m smallest treated responses.
// ord0/ord1 map sorted positions back into view.idx0/idx1 slots so removal
// sets can be reconstructed.
struct PrefixSums {
    std::vector<double> s0, s1;
    std::vector<int> ord0, ord1;
};

PrefixSums build_prefix_sums(const BinaryTreatmentView& view);

// True when keeping some l >= 1 largest controls and n-k-l >= 1 smallest
// treated samples makes the slope <= 0, i.e. there is an l in range with
//   -(n-k-l) * s0[l] + l * s1[n-k-l] <= 0.
bool feasible_at_k(const PrefixSums& ps, int n, int k);

struct BinaryAuditResult {
    std::optional<int> k;       // nullopt: no removal keeping both groups flips
    std::vector<int> removal;   // original dataset rows, size k, sorted
};

// Exact minimum number of removals that drives the treatment coefficient to
// <= 0, by binary search over k (feasibility is monotone in k). Removals
// always keep at least one sample per group.
BinaryAuditResult audit_binary(const BinaryTreatmentView& view);

}  // namespace audit
