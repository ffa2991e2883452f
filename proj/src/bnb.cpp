#include "olsaudit/bnb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>

namespace audit {

namespace {

constexpr double kViolTol = 1e-7;     // envelope-violation fathom threshold
constexpr double kIntTol = 1e-6;      // weight integrality tolerance
constexpr double kSplitClamp = 0.15;  // keep split points off the interval ends
constexpr double kResolution = 1e-9;  // narrowest branchable interval
const double kNegInf = -std::numeric_limits<double>::infinity();

// Max bound first, then deeper, then earlier creation.
struct QueueOrder {
    bool operator()(const BnbNode& a, const BnbNode& b) const {
        if (a.bound != b.bound) return a.bound < b.bound;
        if (a.depth != b.depth) return a.depth < b.depth;
        return a.id > b.id;
    }
};

// Repair step for fractional incumbents: with beta frozen at the node LP's
// value the stationarity system is linear in w, so one small LP yields an
// exactly feasible point of the bilinear program.
LinearProgram beta_fixed_lp(const BilinearModel& model, const Vector& beta) {
    const int n = model.n;
    const int d = model.d;
    LinearProgram lp;
    lp.c = Vector::Ones(n);
    lp.lo = Vector::Zero(n);
    lp.up = Vector::Ones(n);
    const int rows = d + (model.safeguard ? 1 : 0);
    lp.A = Matrix::Zero(rows, n);
    lp.b = Vector::Zero(rows);
    lp.rel.assign(rows, 'E');
    for (int i = 0; i < n; ++i) {
        double resid = -model.y(i);
        for (int j = 0; j < model.d_resid; ++j) resid += model.X(i, j) * beta(j);
        for (int jp = 0; jp < d; ++jp) lp.A(jp, i) = model.X(i, jp) * resid;
    }
    if (model.safeguard) {
        lp.A.row(d).setOnes();
        lp.b(d) = 1.0;
        lp.rel[d] = 'G';
    }
    return lp;
}

}  // namespace

BnbResult branch_and_bound(const BilinearModel& model, const Dataset& ds,
                           const BnbOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    const int n = model.n;
    const int dr = model.d_resid;

    BnbResult res;
    if (!model.safeguard) {
        // w = 0 with any in-box beta satisfies stationarity trivially.
        res.has_incumbent = true;
        res.incumbent_value = 0.0;
        res.incumbent_w = Vector::Zero(n);
        res.incumbent_beta = Vector::Zero(dr);
    } else {
        res.incumbent_value = kNegInf;
    }

    double residual_max = kNegInf;
    std::priority_queue<BnbNode, std::vector<BnbNode>, QueueOrder> open;
    long next_id = 0;

    BnbNode root;
    root.box = root_box(model);
    root.bound = n;
    root.depth = 0;
    root.id = next_id++;
    open.push(root);

    const auto prune_threshold = [&]() {
        if (!res.has_incumbent) return kNegInf;
        return model.integral ? res.incumbent_value + 1.0 - 1e-4
                              : res.incumbent_value + std::max(opts.abs_gap, 1e-7);
    };
    const auto consider_rounding = [&](const Vector& w) {
        auto cert = round_and_verify(ds, w);
        if (cert && (!res.rounding_cert || cert->value < res.rounding_cert->value))
            res.rounding_cert = std::move(cert);
    };
    const auto record_trace = [&]() {
        double dual = std::max(res.has_incumbent ? res.incumbent_value : kNegInf, residual_max);
        if (!open.empty()) dual = std::max(dual, open.top().bound);
        res.dual_trace.push_back(dual == kNegInf ? 0.0 : dual);
    };
    const auto finish = [&](BnbStatus status) {
        double dual = std::max(res.has_incumbent ? res.incumbent_value : kNegInf, residual_max);
        if (!open.empty()) dual = std::max(dual, open.top().bound);
        if (dual == kNegInf) {
            res.infeasible = true;
            dual = 0.0;
        }
        res.dual_bound = dual;
        res.status = status;
        return res;
    };

    while (!open.empty()) {
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (elapsed > opts.time_limit_s) return finish(BnbStatus::TimeLimit);
        if (opts.node_limit >= 0 && res.nodes >= opts.node_limit)
            return finish(BnbStatus::NodeLimit);

        BnbNode node = open.top();
        open.pop();
        ++res.nodes;

        if (node.bound <= prune_threshold()) {
            // Best-bound order: every remaining node is at least as hopeless.
            // Integral regions cannot beat the incumbent at all; fractional
            // ones are accounted by their (already pruned) bound.
            if (!model.integral) residual_max = std::max(residual_max, node.bound);
            while (!open.empty()) open.pop();
            record_trace();
            break;
        }

        LinearProgram lp = mccormick_relax(model, node.box);
        const LpResult sol = solve_lp(lp);
        if (sol.status == LpStatus::Infeasible) {
            record_trace();
            continue;
        }
        const bool have_point = sol.status == LpStatus::Optimal;
        double val = node.bound;
        if (have_point) val = std::min(val, sol.value);

        if (val <= prune_threshold()) {
            if (!model.integral) residual_max = std::max(residual_max, val);
            record_trace();
            continue;
        }

        int branch_var = -1;     // global index: w block then beta block
        double split_at = 0.0;   // ignored for integral w branching
        bool fathomed = false;

        if (have_point) {
            const Vector w = sol.x.head(n);
            if (model.integral) {
                int frac_i = -1;
                double frac_dist = kIntTol;
                for (int i = 0; i < n; ++i) {
                    const double dist = std::abs(w(i) - std::round(w(i)));
                    if (dist > frac_dist) {
                        frac_dist = dist;
                        frac_i = i;
                    }
                }
                if (frac_i < 0) {
                    // All weights integral: the envelopes are exact here, so
                    // the LP point is bilinear-feasible and the node is done.
                    double value = 0.0;
                    Vector w_int(n);
                    for (int i = 0; i < n; ++i) {
                        w_int(i) = std::round(w(i));
                        value += w_int(i);
                    }
                    if (!res.has_incumbent || value > res.incumbent_value + 1e-9) {
                        res.has_incumbent = true;
                        res.incumbent_value = value;
                        res.incumbent_w = w_int;
                        res.incumbent_beta = sol.x.segment(n, dr);
                    }
                    consider_rounding(w_int);
                    fathomed = true;
                } else {
                    consider_rounding(w);
                    branch_var = frac_i;
                }
            } else {
                const Vector beta = sol.x.segment(n, dr);
                const LpResult repaired = solve_lp(beta_fixed_lp(model, beta));
                if (repaired.status == LpStatus::Optimal) {
                    if (!res.has_incumbent ||
                        repaired.value > res.incumbent_value + 1e-9) {
                        res.has_incumbent = true;
                        res.incumbent_value = repaired.value;
                        res.incumbent_w = repaired.x;
                        res.incumbent_beta = beta;
                    }
                    consider_rounding(repaired.x);
                }
                consider_rounding(w);

                // Aggregate envelope violation per variable decides both the
                // feasibility fathom and the spatial branching choice.
                Vector wviol = Vector::Zero(n), bviol = Vector::Zero(std::max(dr, 1));
                double maxviol = 0.0, scale = 1.0;
                for (int i = 0; i < n; ++i) {
                    for (int j = 0; j < dr; ++j) {
                        const double z = sol.x(model.z_index(i, j));
                        const double v = std::abs(z - w(i) * beta(j));
                        wviol(i) += v;
                        bviol(j) += v;
                        maxviol = std::max(maxviol, v);
                        scale = std::max(scale, std::abs(z));
                    }
                }
                if (maxviol <= kViolTol * scale) {
                    // Relaxation is tight at this point; val is attained (up
                    // to repair noise), so the region is closed at val.
                    residual_max = std::max(residual_max, val);
                    fathomed = true;
                } else {
                    double best = 0.0;
                    for (int i = 0; i < n; ++i) {
                        const double wid = node.box.w_hi(i) - node.box.w_lo(i);
                        if (wid <= kResolution) continue;
                        if (wviol(i) > best) {
                            best = wviol(i);
                            branch_var = i;
                            split_at = w(i);
                        }
                    }
                    for (int j = 0; j < dr; ++j) {
                        const double wid = node.box.b_hi(j) - node.box.b_lo(j);
                        const double mag = std::max(
                            1.0, std::max(std::abs(node.box.b_lo(j)), std::abs(node.box.b_hi(j))));
                        if (wid <= kResolution * mag) continue;
                        if (bviol(j) > best) {
                            best = bviol(j);
                            branch_var = n + j;
                            split_at = beta(j);
                        }
                    }
                    if (branch_var < 0) {
                        // Nothing branchable at this resolution: close the
                        // region and let its bound stand.
                        residual_max = std::max(residual_max, val);
                        fathomed = true;
                    }
                }
            }
        } else {
            // LP stalled: no point to guide us. Branch the widest interval
            // at its midpoint; if everything is fixed, close at the bound.
            double best = kResolution;
            for (int i = 0; i < n; ++i) {
                const double wid = node.box.w_hi(i) - node.box.w_lo(i);
                if (wid > best) {
                    best = wid;
                    branch_var = i;
                    split_at = 0.5 * (node.box.w_lo(i) + node.box.w_hi(i));
                }
            }
            for (int j = 0; j < dr; ++j) {
                const double wid = node.box.b_hi(j) - node.box.b_lo(j);
                if (wid > best) {
                    best = wid;
                    branch_var = n + j;
                    split_at = 0.5 * (node.box.b_lo(j) + node.box.b_hi(j));
                }
            }
            if (branch_var < 0) {
                residual_max = std::max(residual_max, val);
                fathomed = true;
            }
        }

        if (!fathomed && branch_var >= 0) {
            BnbNode left, right;
            left.box = node.box;
            right.box = node.box;
            left.bound = right.bound = val;
            left.depth = right.depth = node.depth + 1;
            if (model.integral && branch_var < n) {
                left.box.w_hi(branch_var) = 0.0;
                right.box.w_lo(branch_var) = 1.0;
            } else if (branch_var < n) {
                const double lo = node.box.w_lo(branch_var), hi = node.box.w_hi(branch_var);
                const double wid = hi - lo;
                const double s =
                    std::clamp(split_at, lo + kSplitClamp * wid, hi - kSplitClamp * wid);
                left.box.w_hi(branch_var) = s;
                right.box.w_lo(branch_var) = s;
            } else {
                const int j = branch_var - n;
                const double lo = node.box.b_lo(j), hi = node.box.b_hi(j);
                const double wid = hi - lo;
                const double s =
                    std::clamp(split_at, lo + kSplitClamp * wid, hi - kSplitClamp * wid);
                left.box.b_hi(j) = s;
                right.box.b_lo(j) = s;
            }
            left.id = next_id++;
            right.id = next_id++;
            open.push(std::move(left));
            open.push(std::move(right));
        }
        record_trace();
    }

    return finish(BnbStatus::Optimal);
}

MiqcpAudit miqcp_audit(const Dataset& ds, const MiqcpOptions& opts) {
    const int n = ds.n();
    const int d = ds.d();
    const char* mname = opts.mode == MiqcpMode::Integral ? "miqcp-int" : "miqcp-frac";
    const Vector beta_full = ols_fit(ds.X, ds.y);

    MiqcpAudit out;
    out.lower.method = mname;
    out.lower.bound_type = BoundType::Lower;
    out.lower.verified = true;

    if (beta_full(ds.target) <= 0.0) {
        // Nothing to remove: the exact stability is zero.
        out.lower.value = 0;
        out.lower.qualifier = "target coefficient already nonpositive on the full data";
        StabilityCertificate up;
        up.method = mname;
        up.bound_type = BoundType::Upper;
        up.value = 0;
        up.verified = true;
        out.upper = up;
        return out;
    }

    const int dr = opts.mode == MiqcpMode::Integral ? d : d - 1;
    if (static_cast<long>(n) * std::max(dr, 1) > 600)
        throw TooLarge("miqcp_audit: model too large for the built-in solver; use export-mps");

    out.box_used = opts.box > 0.0 ? opts.box : 1e3 * std::max(1.0, beta_full.cwiseAbs().maxCoeff());

    BnbOptions bopts;
    bopts.time_limit_s = opts.time_limit_s;
    bopts.node_limit = opts.node_limit;

    bool safeguard = opts.safeguard;
    std::string note;
    BilinearModel model = build_model(
        ds, opts.mode, out.box_used, safeguard);
    out.bnb = branch_and_bound(model, ds, bopts);
    if (!safeguard && opts.mode == MiqcpMode::Fractional &&
        out.bnb.status == BnbStatus::Optimal && out.bnb.dual_bound <= 1e-6) {
        // Degenerate all-zero optimum on data that does not flip: rerun with
        // the kept-mass safeguard so the bound means something.
        safeguard = true;
        note = "safeguard |w|_1 >= 1 auto-enabled after a degenerate zero optimum; ";
        model = build_model(ds, opts.mode, out.box_used, true);
        out.bnb = branch_and_bound(model, ds, bopts);
    }
    out.safeguard_used = safeguard;

    char boxq[64];
    std::snprintf(boxq, sizeof boxq, "valid within |beta|_inf <= %.6g", out.box_used);
    std::string qual = note + boxq;
    if (out.bnb.status == BnbStatus::TimeLimit)
        qual += "; time limit reached, bound valid but not proven optimal";
    else if (out.bnb.status == BnbStatus::NodeLimit)
        qual += "; node limit reached, bound valid but not proven optimal";

    int lb;
    if (out.bnb.status == BnbStatus::Optimal && out.bnb.infeasible) {
        lb = n - 1;
        qual += "; no sign flip reachable within the coefficient box";
    } else {
        lb = static_cast<int>(std::ceil(n - out.bnb.dual_bound - 1e-6));
        if (lb < 0) lb = 0;
        if (lb > n - 1) {
            lb = n - 1;
            qual += "; no sign flip reachable within the coefficient box";
        }
    }
    out.lower.value = lb;
    out.lower.qualifier = qual;

    if (out.bnb.rounding_cert) {
        out.upper = out.bnb.rounding_cert;
        out.upper->method = mname;
    }
    return out;
}

}  // namespace audit
