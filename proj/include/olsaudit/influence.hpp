#pragma once

#include <optional>

#include "olsaudit/data.hpp"

namespace audit {

// First-order effect of removing each sample on the target coefficient:
// score_i = [ (X'X)^+ X_i (y_i - <X_i, beta>) ]_target.
// Positive score means removal pushes the coefficient down. A sample with
// zero residual scores zero.
Vector influence_scores(const Dataset& ds);

// Exact change of the target coefficient under single-sample removal,
// beta_{-i} - beta, via the rank-one downdate
//   delta_i = -(X'X)^{-1} X_i r_i / (1 - h_i),  h_i = X_i'(X'X)^{-1} X_i.
// Entries with leverage h_i >= 1 (sample pins a direction) are NaN-free:
// they are set to 0 and flagged unusable via the companion mask.
Vector exact_loo_deltas(const Dataset& ds, std::vector<char>* usable = nullptr);

// Refits with the given rows removed; true when the target coefficient is
// still identified and comes out <= 0.
bool removal_flips(const Dataset& ds, const std::vector<int>& removal);

// One-shot ranking: sort by descending score (ties by ascending row index),
// return the smallest prefix whose removal verifiably flips the target
// coefficient. nullopt when no prefix flips.
std::optional<StabilityCertificate> amip_upper_bound(const Dataset& ds);

// Iterated removal of the single highest-score sample with a full refit
// between steps. max_iters < 0 means n - 1.
std::optional<StabilityCertificate> greedy_resolve_upper_bound(const Dataset& ds,
                                                               int max_iters = -1);

}  // namespace audit
