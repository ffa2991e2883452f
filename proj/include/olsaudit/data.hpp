#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "olsaudit/linalg.hpp"
#include "olsaudit/types.hpp"

namespace audit {

// A regression instance: design matrix, response, and the audited column.
// When has_intercept is set, exactly one all-ones column exists (appended
// last at load time so named-column indices stay put).
struct Dataset {
    Matrix X;
    Vector y;
    std::vector<std::string> column_names;  // one per X column
    int target = 0;
    bool has_intercept = false;
    std::string response_name = "y";

    int n() const { return static_cast<int>(X.rows()); }
    int d() const { return static_cast<int>(X.cols()); }
};

// Binary-treatment projection: responses split by treatment value, with the
// original row index of every entry so removal sets can be mapped back.
// Responses are negated internally when the full-data slope is negative, so
// the audited slope is always >= 0 here; orientation records the sign.
struct BinaryTreatmentView {
    Vector y0, y1;
    std::vector<int> idx0, idx1;
    int orientation = 1;

    int n() const { return static_cast<int>(y0.size() + y1.size()); }
};

// Difference-in-differences projection: per-individual deltas (after minus
// before), split into treated and control. Deltas are negated internally
// when the full-data interaction coefficient is negative.
struct DiDView {
    Vector deltas_treated, deltas_control;
    std::vector<int> idx_treated, idx_control;  // individual indices
    int N = 0;
    int orientation = 1;
};

// Raw columns of a DiD CSV (one individual per row).
struct DiDData {
    std::vector<std::string> ids;
    Vector before, after;
    std::vector<int> treated;  // individual indices with treated = 1
};

// Loads a CSV with a header row. The response column becomes y; every other
// column becomes part of X in header order; an all-ones column is appended
// last when intercept is set. Throws ParseError / MissingColumn / IoError.
Dataset load_csv(const std::string& path, const std::string& target_column,
                 const std::string& response_column, bool intercept);

// Writes the non-intercept columns plus the response with 17 significant
// digits, so load_csv reproduces X and y bit-exactly.
void write_csv(const std::string& path, const Dataset& ds);

// DiD CSV: columns id, before, after, treated (0/1).
DiDData load_did_csv(const std::string& path);
void write_did_csv(const std::string& path, const DiDData& data);

// n samples of x ~ N(0,1), y = -2 x + e, e ~ N(0,1), intercept appended.
// Audited column is the slope. Deterministic given the seed.
Dataset synth_2d(int n, std::uint64_t seed);

// n samples with four iid N(0,1) columns, y = x1+x2+x3+x4 + e, no
// intercept. Audited column is the first. Deterministic given the seed.
Dataset synth_4d(int n, std::uint64_t seed);

// Projects a dataset with exactly one {0,1} column plus an all-ones column.
// Throws NotBinaryTreatment / EmptyGroup.
BinaryTreatmentView binary_view(const Dataset& ds);

// Builds the DiD projection. Orientation comes from the interaction
// coefficient of the two-period panel regression
//   y = b0 + b1 time + b2 treatment + b3 time*treatment
// fitted on the stacked before/after encoding. Throws EmptyGroup.
DiDView did_view(const Vector& before, const Vector& after, const std::vector<int>& treated);

// The Gram matrix of the stacked two-period encoding in closed form, for
// 2N rows of which 2|T| are treated. Exposed for cross-checking.
Matrix did_gram(int two_n, int two_s);

// Negates y when the full-data target coefficient is negative, so every
// downstream method can audit "coefficient <= 0". Returns the normalized
// dataset and the orientation sign (+1 or -1).
std::pair<Dataset, int> orient_dataset(const Dataset& ds);

}  // namespace audit
