#include "olsaudit/bilinear.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "olsaudit/influence.hpp"

namespace audit {

BilinearModel build_model(const Dataset& ds, MiqcpMode mode, double box, bool safeguard) {
    if (!(box > 0.0) || !std::isfinite(box))
        throw std::invalid_argument("build_model: box half-width must be positive and finite");
    const int n = ds.n();
    const int d = ds.d();

    BilinearModel model;
    model.n = n;
    model.d = d;
    model.integral = mode == MiqcpMode::Integral;
    model.safeguard = safeguard;
    model.box = box;

    // The audited coefficient goes last so that dropping it (fractional) or
    // sign-constraining it (integral) always concerns the final column.
    model.perm.reserve(d);
    for (int j = 0; j < d; ++j)
        if (j != ds.target) model.perm.push_back(j);
    model.perm.push_back(ds.target);

    model.X.resize(n, d);
    for (int k = 0; k < d; ++k) model.X.col(k) = ds.X.col(model.perm[k]);
    model.y = ds.y;

    model.d_resid = model.integral ? d : d - 1;
    model.beta_lo = Vector::Constant(model.d_resid, -box);
    model.beta_up = Vector::Constant(model.d_resid, box);
    if (model.integral) model.beta_up(d - 1) = 0.0;  // flipped coefficient
    return model;
}

Box root_box(const BilinearModel& model) {
    Box box;
    box.w_lo = Vector::Zero(model.n);
    box.w_hi = Vector::Ones(model.n);
    box.b_lo = model.beta_lo;
    box.b_hi = model.beta_up;
    return box;
}

LinearProgram mccormick_relax(const BilinearModel& model, const Box& box) {
    const int n = model.n;
    const int d = model.d;
    const int dr = model.d_resid;
    const int nvars = n + dr + model.num_z();
    const int nrows = d + 4 * model.num_z() + (model.safeguard ? 1 : 0);

    LinearProgram lp;
    lp.c = Vector::Zero(nvars);
    lp.c.head(n).setOnes();
    lp.lo = Vector::Zero(nvars);
    lp.up = Vector::Zero(nvars);
    lp.A = Matrix::Zero(nrows, nvars);
    lp.b = Vector::Zero(nrows);
    lp.rel.assign(nrows, 'E');

    lp.lo.head(n) = box.w_lo;
    lp.up.head(n) = box.w_hi;
    lp.lo.segment(n, dr) = box.b_lo;
    lp.up.segment(n, dr) = box.b_hi;

    // Stationarity of the weighted least-squares objective, linear in (w, z):
    //   sum_i X_{i,j'} * (sum_j X_{i,j} z_{ij} - y_i w_i) = 0  for every j'.
    for (int jp = 0; jp < d; ++jp) {
        for (int i = 0; i < n; ++i) {
            lp.A(jp, model.w_index(i)) -= model.X(i, jp) * model.y(i);
            for (int j = 0; j < dr; ++j)
                lp.A(jp, model.z_index(i, j)) += model.X(i, jp) * model.X(i, j);
        }
    }

    // McCormick fence for each z = w*b over [wl,wu] x [bl,bu], plus the
    // implied corner range as explicit variable bounds.
    int row = d;
    for (int i = 0; i < n; ++i) {
        const double wl = box.w_lo(i), wu = box.w_hi(i);
        for (int j = 0; j < dr; ++j) {
            const double bl = box.b_lo(j), bu = box.b_hi(j);
            const int zi = model.z_index(i, j);

            const double c1 = wl * bl, c2 = wl * bu, c3 = wu * bl, c4 = wu * bu;
            lp.lo(zi) = std::min(std::min(c1, c2), std::min(c3, c4));
            lp.up(zi) = std::max(std::max(c1, c2), std::max(c3, c4));

            // z >= wl*b + bl*w - wl*bl
            lp.A(row, zi) = 1.0;
            lp.A(row, model.beta_index(j)) = -wl;
            lp.A(row, model.w_index(i)) = -bl;
            lp.b(row) = -wl * bl;
            lp.rel[row++] = 'G';
            // z >= wu*b + bu*w - wu*bu
            lp.A(row, zi) = 1.0;
            lp.A(row, model.beta_index(j)) = -wu;
            lp.A(row, model.w_index(i)) = -bu;
            lp.b(row) = -wu * bu;
            lp.rel[row++] = 'G';
            // z <= wu*b + bl*w - wu*bl
            lp.A(row, zi) = 1.0;
            lp.A(row, model.beta_index(j)) = -wu;
            lp.A(row, model.w_index(i)) = -bl;
            lp.b(row) = -wu * bl;
            lp.rel[row++] = 'L';
            // z <= wl*b + bu*w - wl*bu
            lp.A(row, zi) = 1.0;
            lp.A(row, model.beta_index(j)) = -wl;
            lp.A(row, model.w_index(i)) = -bu;
            lp.b(row) = -wl * bu;
            lp.rel[row++] = 'L';
        }
    }

    if (model.safeguard) {
        lp.A.row(row).head(n).setOnes();
        lp.b(row) = 1.0;
        lp.rel[row++] = 'G';
    }
    return lp;
}

std::optional<StabilityCertificate> round_and_verify(const Dataset& ds, const Vector& w) {
    const int n = ds.n();
    if (w.size() != n) throw std::invalid_argument("round_and_verify: weight length mismatch");
    std::vector<int> removed;
    for (int i = 0; i < n; ++i) {
        if (w(i) < 1.0 - 1e-6) removed.push_back(i);
    }
    if (static_cast<int>(removed.size()) >= n) return std::nullopt;
    if (!removal_flips(ds, removed)) return std::nullopt;

    StabilityCertificate cert;
    cert.method = "miqcp-round";
    cert.bound_type = BoundType::Upper;
    cert.value = static_cast<int>(removed.size());
    cert.removal_set = std::move(removed);
    cert.verified = true;
    return cert;
}

namespace {

std::string fixed_field(const std::string& s, int width) {
    std::string out = s;
    if (static_cast<int>(out.size()) < width) out.append(width - out.size(), ' ');
    return out;
}

std::string num12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string wname(int i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "W%04d", i + 1);
    return buf;
}

std::string bname(int j) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "B%03d", j + 1);
    return buf;
}

std::string rowname(int jp) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "STAT%04d", jp + 1);
    return buf;
}

void emit_entry(std::string& out, const std::string& col, const std::string& row, double v) {
    out += "    " + fixed_field(col, 10) + fixed_field(row, 10) + num12(v) + "\n";
}

}  // namespace

std::string mps_string(const BilinearModel& model) {
    const int n = model.n;
    const int d = model.d;
    const int dr = model.d_resid;

    std::string out;
    out += "NAME          OLSAUDIT\n";
    out += "OBJSENSE\n    MAX\n";

    out += "ROWS\n";
    out += " N  OBJ\n";
    for (int jp = 0; jp < d; ++jp) out += " E  " + rowname(jp) + "\n";
    if (model.safeguard) out += " G  SAFEGRD\n";

    out += "COLUMNS\n";
    if (model.integral)
        out += "    MARKER                 'MARKER'                 'INTORG'\n";
    for (int i = 0; i < n; ++i) {
        emit_entry(out, wname(i), "OBJ", 1.0);
        for (int jp = 0; jp < d; ++jp) {
            const double v = -model.X(i, jp) * model.y(i);
            if (v != 0.0) emit_entry(out, wname(i), rowname(jp), v);
        }
        if (model.safeguard) emit_entry(out, wname(i), "SAFEGRD", 1.0);
    }
    if (model.integral)
        out += "    MARKER                 'MARKER'                 'INTEND'\n";
    // Coefficient variables have no linear entries; register them with a
    // zero objective coefficient so every variable appears in COLUMNS.
    for (int j = 0; j < dr; ++j) emit_entry(out, bname(j), "OBJ", 0.0);

    out += "RHS\n";
    if (model.safeguard) emit_entry(out, "RHS1", "SAFEGRD", 1.0);

    out += "BOUNDS\n";
    for (int i = 0; i < n; ++i)
        out += " UP " + fixed_field("BND1", 10) + fixed_field(wname(i), 10) + num12(1.0) + "\n";
    for (int j = 0; j < dr; ++j) {
        out += " LO " + fixed_field("BND1", 10) + fixed_field(bname(j), 10) +
               num12(model.beta_lo(j)) + "\n";
        out += " UP " + fixed_field("BND1", 10) + fixed_field(bname(j), 10) +
               num12(model.beta_up(j)) + "\n";
    }

    // Bilinear stationarity terms: each product w_i * b_j contributes
    // X_{i,j'} X_{i,j}, split over the two symmetric halves.
    for (int jp = 0; jp < d; ++jp) {
        out += "QCMATRIX   " + rowname(jp) + "\n";
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < dr; ++j) {
                const double c = model.X(i, jp) * model.X(i, j);
                if (c == 0.0) continue;
                emit_entry(out, wname(i), bname(j), 0.5 * c);
                emit_entry(out, bname(j), wname(i), 0.5 * c);
            }
        }
    }

    out += "ENDATA\n";
    return out;
}

void export_mps(const BilinearModel& model, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("export_mps: cannot open " + path);
    const std::string body = mps_string(model);
    f.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!f) throw IoError("export_mps: write failed for " + path);
}

}  // namespace audit
