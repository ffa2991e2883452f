#pragma once

#include <optional>
#include <vector>

#include "olsaudit/bilinear.hpp"

namespace audit {

enum class BnbStatus { Optimal, TimeLimit, NodeLimit };

struct BnbOptions {
    double time_limit_s = 10.0;
    long node_limit = -1;   // negative: unlimited
    double abs_gap = 1e-6;  // fractional-mode pruning slack
};

struct BnbResult {
    BnbStatus status = BnbStatus::Optimal;
    // Upper bound on the maximum kept weight within the coefficient box;
    // valid at any point of the run, exact on Optimal completion.
    double dual_bound = 0.0;
    bool has_incumbent = false;
    double incumbent_value = 0.0;
    Vector incumbent_w;
    Vector incumbent_beta;
    bool infeasible = false;  // completed with no feasible point (safeguard on)
    long nodes = 0;
    std::vector<double> dual_trace;  // global bound after each processed node
    std::optional<StabilityCertificate> rounding_cert;  // best refit-verified rounding
};

// Best-bound spatial branch and bound over McCormick relaxations. Integral
// mode branches weights to {0,1} first (at an all-integral vertex the
// envelopes are exact, so the node is solved); fractional mode branches the
// variable with the largest aggregate envelope violation, splitting at the
// LP point clamped away from the interval ends. The dataset is needed to
// refit candidate roundings into upper-bound certificates.
BnbResult branch_and_bound(const BilinearModel& model, const Dataset& ds,
                           const BnbOptions& opts);

struct MiqcpOptions {
    MiqcpMode mode = MiqcpMode::Fractional;
    double box = -1.0;  // nonpositive: 10^3 * max(1, |beta_full|_inf)
    bool safeguard = false;
    double time_limit_s = 10.0;
    long node_limit = -1;
};

struct MiqcpAudit {
    BnbResult bnb;
    StabilityCertificate lower;                 // carries the box qualifier
    std::optional<StabilityCertificate> upper;  // refit-verified rounding, if any
    double box_used = 0.0;
    bool safeguard_used = false;
};

// Full audit pipeline: box selection, model build, branch and bound, and
// certificate extraction. The degenerate all-zero fractional optimum (bound
// near 0 on unflipped data) triggers one safeguarded re-run. The dataset is
// audited as handed over: a nonpositive full-data target coefficient yields
// an exact zero certificate without running the solver.
MiqcpAudit miqcp_audit(const Dataset& ds, const MiqcpOptions& opts);

}  // namespace audit
