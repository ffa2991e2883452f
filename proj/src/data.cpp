#include "olsaudit/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "olsaudit/rng.hpp"

namespace audit {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    cells.push_back(trim(cur));
    return cells;
}

// Locale-independent parse of a finite real; row/col only feed the error.
double parse_cell(const std::string& cell, int row, const std::string& col) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last || cell.empty() || !std::isfinite(value))
        throw ParseError(row, col, cell);
    return value;
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    // Drop trailing blank lines; interior blanks are row errors later.
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) throw IoError("'" + path + "' is empty");
    return lines;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& target_column,
                 const std::string& response_column, bool intercept) {
    const std::vector<std::string> lines = read_lines(path);
    const std::vector<std::string> header = split_line(lines[0]);

    int response_idx = -1;
    std::vector<int> x_cols;  // header indices, in order
    for (int j = 0; j < static_cast<int>(header.size()); ++j) {
        if (header[j] == response_column)
            response_idx = j;
        else
            x_cols.push_back(j);
    }
    if (response_idx < 0) throw MissingColumn(response_column);

    int target = -1;
    std::vector<std::string> names;
    for (int k = 0; k < static_cast<int>(x_cols.size()); ++k) {
        names.push_back(header[x_cols[k]]);
        if (header[x_cols[k]] == target_column) target = k;
    }
    if (target < 0) throw MissingColumn(target_column);

    const int n = static_cast<int>(lines.size()) - 1;
    const int d = static_cast<int>(x_cols.size()) + (intercept ? 1 : 0);
    Dataset ds;
    ds.X = Matrix(n, d);
    ds.y = Vector(n);
    for (int i = 0; i < n; ++i) {
        const int row = i + 2;  // 1-based file line, header is line 1
        const std::vector<std::string> cells = split_line(lines[i + 1]);
        if (cells.size() != header.size())
            throw ParseError(row, "(row)",
                             "expected " + std::to_string(header.size()) + " cells, found " +
                                 std::to_string(cells.size()));
        for (int k = 0; k < static_cast<int>(x_cols.size()); ++k)
            ds.X(i, k) = parse_cell(cells[x_cols[k]], row, header[x_cols[k]]);
        ds.y(i) = parse_cell(cells[response_idx], row, response_column);
    }
    if (intercept) {
        ds.X.col(d - 1).setOnes();
        names.push_back("(intercept)");
    }
    ds.column_names = std::move(names);
    ds.target = target;
    ds.has_intercept = intercept;
    ds.response_name = response_column;
    return ds;
}

void write_csv(const std::string& path, const Dataset& ds) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    const int d = ds.d();
    std::vector<int> cols;
    for (int j = 0; j < d; ++j) {
        if (ds.has_intercept && ds.column_names[j] == "(intercept)") continue;
        cols.push_back(j);
    }
    for (size_t k = 0; k < cols.size(); ++k) out << ds.column_names[cols[k]] << ",";
    out << ds.response_name << "\n";
    for (int i = 0; i < ds.n(); ++i) {
        for (size_t k = 0; k < cols.size(); ++k) out << format_value(ds.X(i, cols[k])) << ",";
        out << format_value(ds.y(i)) << "\n";
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

DiDData load_did_csv(const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);
    const std::vector<std::string> header = split_line(lines[0]);
    int id_idx = -1, before_idx = -1, after_idx = -1, treated_idx = -1;
    for (int j = 0; j < static_cast<int>(header.size()); ++j) {
        if (header[j] == "id") id_idx = j;
        if (header[j] == "before") before_idx = j;
        if (header[j] == "after") after_idx = j;
        if (header[j] == "treated") treated_idx = j;
    }
    if (id_idx < 0) throw MissingColumn("id");
    if (before_idx < 0) throw MissingColumn("before");
    if (after_idx < 0) throw MissingColumn("after");
    if (treated_idx < 0) throw MissingColumn("treated");

    const int n = static_cast<int>(lines.size()) - 1;
    DiDData data;
    data.before = Vector(n);
    data.after = Vector(n);
    for (int i = 0; i < n; ++i) {
        const int row = i + 2;
        const std::vector<std::string> cells = split_line(lines[i + 1]);
        if (cells.size() != header.size())
            throw ParseError(row, "(row)",
                             "expected " + std::to_string(header.size()) + " cells, found " +
                                 std::to_string(cells.size()));
        data.ids.push_back(cells[id_idx]);
        data.before(i) = parse_cell(cells[before_idx], row, "before");
        data.after(i) = parse_cell(cells[after_idx], row, "after");
        const double t = parse_cell(cells[treated_idx], row, "treated");
        if (t != 0.0 && t != 1.0) throw ParseError(row, "treated", cells[treated_idx]);
        if (t == 1.0) data.treated.push_back(i);
    }
    return data;
}

void write_did_csv(const std::string& path, const DiDData& data) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << "id,before,after,treated\n";
    std::vector<char> is_treated(data.before.size(), 0);
    for (int i : data.treated) is_treated[i] = 1;
    for (int i = 0; i < static_cast<int>(data.before.size()); ++i) {
        out << data.ids[i] << "," << format_value(data.before(i)) << ","
            << format_value(data.after(i)) << "," << (is_treated[i] ? 1 : 0) << "\n";
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

Dataset synth_2d(int n, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("synth_2d: n must be >= 2");
    Rng rng(seed);
    Dataset ds;
    ds.X = Matrix(n, 2);
    ds.y = Vector(n);
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        const double eps = rng.normal();
        ds.X(i, 0) = x;
        ds.X(i, 1) = 1.0;
        ds.y(i) = -2.0 * x + eps;
    }
    ds.column_names = {"x", "(intercept)"};
    ds.target = 0;
    ds.has_intercept = true;
    return ds;
}

Dataset synth_4d(int n, std::uint64_t seed) {
    if (n < 4) throw std::invalid_argument("synth_4d: n must be >= 4");
    Rng rng(seed);
    Dataset ds;
    ds.X = Matrix(n, 4);
    ds.y = Vector(n);
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int j = 0; j < 4; ++j) {
            const double x = rng.normal();
            ds.X(i, j) = x;
            sum += x;
        }
        ds.y(i) = sum + rng.normal();
    }
    ds.column_names = {"x1", "x2", "x3", "x4"};
    ds.target = 0;
    ds.has_intercept = false;
    return ds;
}

BinaryTreatmentView binary_view(const Dataset& ds) {
    if (ds.d() != 2) throw NotBinaryTreatment("binary_view: need exactly two columns");
    const int n = ds.n();
    if (n < 2) throw NotBinaryTreatment("binary_view: need at least two rows");

    // One column must be all ones (the intercept), the other the treatment.
    auto all_ones = [&](int j) {
        for (int i = 0; i < n; ++i)
            if (ds.X(i, j) != 1.0) return false;
        return true;
    };
    int ones_col;
    if (all_ones(0) && !all_ones(1))
        ones_col = 0;
    else if (all_ones(1))
        ones_col = 1;
    else
        throw NotBinaryTreatment("binary_view: no all-ones intercept column");
    const int treat_col = 1 - ones_col;

    BinaryTreatmentView view;
    std::vector<double> v0, v1;
    for (int i = 0; i < n; ++i) {
        const double t = ds.X(i, treat_col);
        if (t != 0.0 && t != 1.0)
            throw NotBinaryTreatment("binary_view: treatment value " + std::to_string(t));
        if (t == 0.0) {
            v0.push_back(ds.y(i));
            view.idx0.push_back(i);
        } else {
            v1.push_back(ds.y(i));
            view.idx1.push_back(i);
        }
    }
    if (v0.empty()) throw EmptyGroup("binary_view: no control samples");
    if (v1.empty()) throw EmptyGroup("binary_view: no treated samples");

    // Slope of the treatment coefficient equals mean(y1) - mean(y0).
    double s0 = 0.0, s1 = 0.0;
    for (double v : v0) s0 += v;
    for (double v : v1) s1 += v;
    const double slope = s1 / static_cast<double>(v1.size()) - s0 / static_cast<double>(v0.size());
    view.orientation = slope < 0.0 ? -1 : 1;
    const double flip = view.orientation;
    view.y0 = Vector(static_cast<int>(v0.size()));
    view.y1 = Vector(static_cast<int>(v1.size()));
    for (size_t i = 0; i < v0.size(); ++i) view.y0(static_cast<int>(i)) = flip * v0[i];
    for (size_t i = 0; i < v1.size(); ++i) view.y1(static_cast<int>(i)) = flip * v1[i];
    return view;
}

Matrix did_gram(int two_n, int two_s) {
    const double n = two_n, s = two_s;
    Matrix g(4, 4);
    g << n, n / 2, s, s / 2,
        n / 2, n / 2, s / 2, s / 2,
        s, s / 2, s, s / 2,
        s / 2, s / 2, s / 2, s / 2;
    return g;
}

DiDView did_view(const Vector& before, const Vector& after, const std::vector<int>& treated) {
    const int N = static_cast<int>(before.size());
    if (after.size() != N) throw std::invalid_argument("did_view: before/after length mismatch");
    std::vector<char> is_treated(N, 0);
    for (int i : treated) {
        if (i < 0 || i >= N) throw std::invalid_argument("did_view: treated index out of range");
        is_treated[i] = 1;
    }
    int nT = 0;
    for (char c : is_treated) nT += c;
    if (nT == 0) throw EmptyGroup("did_view: no treated individuals");
    if (nT == N) throw EmptyGroup("did_view: no control individuals");

    // Interaction coefficient of the stacked regression, via the closed-form
    // Gram matrix: each individual contributes rows (1,0,t,0) and (1,1,t,t).
    Vector xty = Vector::Zero(4);
    for (int i = 0; i < N; ++i) {
        xty(0) += before(i) + after(i);
        xty(1) += after(i);
        if (is_treated[i]) {
            xty(2) += before(i) + after(i);
            xty(3) += after(i);
        }
    }
    const Matrix gram = did_gram(2 * N, 2 * nT);
    const Vector beta = gram.fullPivLu().solve(xty);
    const double b3 = beta(3);

    DiDView view;
    view.N = N;
    view.orientation = b3 < 0.0 ? -1 : 1;
    const double flip = view.orientation;
    std::vector<double> dt, dc;
    for (int i = 0; i < N; ++i) {
        const double delta = flip * (after(i) - before(i));
        if (is_treated[i]) {
            dt.push_back(delta);
            view.idx_treated.push_back(i);
        } else {
            dc.push_back(delta);
            view.idx_control.push_back(i);
        }
    }
    view.deltas_treated = Vector(static_cast<int>(dt.size()));
    view.deltas_control = Vector(static_cast<int>(dc.size()));
    for (size_t i = 0; i < dt.size(); ++i) view.deltas_treated(static_cast<int>(i)) = dt[i];
    for (size_t i = 0; i < dc.size(); ++i) view.deltas_control(static_cast<int>(i)) = dc[i];
    return view;
}

std::pair<Dataset, int> orient_dataset(const Dataset& ds) {
    const Vector beta = ols_fit(ds.X, ds.y);
    Dataset out = ds;
    int orientation = 1;
    if (beta(ds.target) < 0.0) {
        out.y = -out.y;
        orientation = -1;
    }
    return {std::move(out), orientation};
}

}  // namespace audit
