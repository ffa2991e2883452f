#pragma once

#include <vector>

#include "olsaudit/linalg.hpp"

namespace audit {

// maximize c·x  subject to  A·x {≤,≥,=} b  and  lo ≤ x ≤ up.
// Lower bounds must be finite; upper bounds may be +infinity.
struct LinearProgram {
    Vector c;
    Matrix A;
    Vector b;
    std::vector<char> rel;  // per row: 'L' (≤), 'G' (≥), 'E' (=)
    Vector lo;
    Vector up;

    int num_vars() const { return static_cast<int>(c.size()); }
    int num_rows() const { return static_cast<int>(b.size()); }
};

enum class LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    Stalled,  // defensive iteration cap was hit; value/x not trustworthy
};

struct LpResult {
    LpStatus status = LpStatus::Stalled;
    double value = 0.0;
    Vector x;
};

// Dense two-phase simplex on the bounded-variable form: nonbasic variables
// sit at either bound, entering steps are limited by basic variables hitting
// their own bounds or by the entering variable's span (a bound switch).
// Dantzig pricing with Bland's rule after a stretch of non-improving pivots;
// feasibility tolerance 1e-7.
LpResult solve_lp(const LinearProgram& lp);

}  // namespace audit
