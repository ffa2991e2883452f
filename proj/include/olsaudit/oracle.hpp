#pragma once

#include <optional>

#include "olsaudit/data.hpp"

namespace audit {

// Exhaustive reference for Stability: the smallest k <= max_k such that some
// k-subset removal drives the target coefficient to <= 0, or nullopt when no
// such subset exists within max_k. Subsets that leave the target coefficient
// unidentified (design rank-deficient in that direction) never count as
// flips. Enumeration is by increasing k, subsets in lexicographic order,
// first flip wins. Throws TooLarge unless n <= 20 or max_k <= 3.
std::optional<int> brute_force_stability(const Dataset& ds, int max_k);

// DiD analogue: removals are whole individuals, the flip criterion is
// "kept treated mean delta <= kept overall mean delta", and subsets that
// empty either group are skipped. Same guard as above with N for n.
std::optional<int> brute_force_did(const DiDView& view, int max_k);

}  // namespace audit
