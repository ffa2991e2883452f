#pragma once

#include <optional>
#include <string>
#include <vector>

#include "olsaudit/data.hpp"
#include "olsaudit/lp.hpp"
#include "olsaudit/types.hpp"

namespace audit {

// Bilinear sample-removal program: choose weights w to maximize the number
// of kept rows subject to the weighted normal equations admitting a fit
// whose audited coefficient is flipped. Two modes:
//   Fractional: the audited coefficient is hard-zeroed (dropped from the
//     residual), w ∈ [0,1]ⁿ.
//   Integral: the audited coefficient stays as a variable constrained ≤ 0
//     and the weights are binary.
enum class MiqcpMode { Fractional, Integral };

struct BilinearModel {
    Matrix X;  // columns permuted so the audited coefficient comes last
    Vector y;
    int n = 0;
    int d = 0;
    int d_resid = 0;  // coefficients appearing in the residual
    bool integral = false;
    bool safeguard = false;  // enforce |w|_1 >= 1
    double box = 0.0;        // half-width B of the coefficient box
    std::vector<int> perm;   // permuted column k maps to original perm[k]
    Vector beta_lo, beta_up;  // root bounds per residual coefficient

    int num_z() const { return n * d_resid; }
    // LP variable layout: w block, then beta block, then one z per (i,j).
    int w_index(int i) const { return i; }
    int beta_index(int j) const { return n + j; }
    int z_index(int i, int j) const { return n + d_resid + i * d_resid + j; }
};

// Per-node interval box for every w and beta variable.
struct Box {
    Vector w_lo, w_hi;
    Vector b_lo, b_hi;
};

struct BnbNode {
    Box box;
    double bound = 0.0;  // inherited dual bound (parent LP value at creation)
    int depth = 0;
    long id = 0;
};

BilinearModel build_model(const Dataset& ds, MiqcpMode mode, double box, bool safeguard);

// Root box of a model: w ∈ [0,1], beta per beta_lo/beta_up.
Box root_box(const BilinearModel& model);

// LP relaxation over the node box: each product w_i·beta_j is replaced by a
// variable z_ij fenced by the four McCormick planes; the stationarity rows
// become linear in (w, z).
LinearProgram mccormick_relax(const BilinearModel& model, const Box& box);

// Rounds fractional weights (threshold 1 − 1e−6), refits on the kept rows,
// and returns a verified upper-bound certificate when the audited
// coefficient comes out ≤ 0. std::nullopt when the rounding does not flip.
std::optional<StabilityCertificate> round_and_verify(const Dataset& ds, const Vector& w);

// Deterministic fixed-field MPS rendering with QCMATRIX sections carrying
// the bilinear stationarity terms.
std::string mps_string(const BilinearModel& model);
void export_mps(const BilinearModel& model, const std::string& path);

}  // namespace audit
