#include "olsaudit/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace audit {

namespace {

constexpr double kFeasTol = 1e-7;   // feasibility tolerance
constexpr double kPivotTol = 1e-9;  // minimum usable pivot magnitude
constexpr double kDualTol = 1e-9;   // reduced-cost optimality tolerance
constexpr double kTieTol = 1e-10;   // ratio-test tie window
const double kInf = std::numeric_limits<double>::infinity();

enum class VarState : unsigned char { Basic, AtLower, AtUpper };

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class LoopExit { Done, Unbounded, Stalled };

// Working state: all variables are shifted to lower bound 0 with span u
// (possibly +inf). Nonbasic variables sit at 0 or at u; xb holds the values
// of the basic variables row by row. t is kept equal to B^{-1}·[A | slacks |
// artificials] by pivoting, and zrow holds the current phase's reduced costs.
struct Tableau {
    RowMat t;
    Vector xb;
    Vector u;
    Eigen::RowVectorXd zrow;
    std::vector<int> basis;
    std::vector<VarState> state;
    std::vector<char> usable;
    int m = 0;
    int total = 0;
    double z = 0.0;

    void pivot(int row, int col) {
        const double p = t(row, col);
        t.row(row) /= p;
        for (int i = 0; i < m; ++i) {
            if (i == row) continue;
            const double f = t(i, col);
            if (f != 0.0) t.row(i) -= f * t.row(row);
        }
        const double dz = zrow(col);
        if (dz != 0.0) zrow -= dz * t.row(row);
    }

    void clamp_basics() {
        for (int i = 0; i < m; ++i) {
            if (xb(i) < 0.0 && xb(i) > -kFeasTol) xb(i) = 0.0;
            const double ub = u(basis[i]);
            if (std::isfinite(ub) && xb(i) > ub && xb(i) < ub + kFeasTol) xb(i) = ub;
        }
    }
};

LoopExit run_simplex(Tableau& tb, long max_iters) {
    bool bland = false;
    int nonimproving = 0;
    for (long iter = 0; iter < max_iters; ++iter) {
        // Entering variable: a nonbasic column whose reduced cost points
        // into the box (positive at the lower bound, negative at the upper).
        int enter = -1;
        double best_gain = kDualTol;
        for (int j = 0; j < tb.total; ++j) {
            if (!tb.usable[j] || tb.state[j] == VarState::Basic) continue;
            if (tb.u(j) <= kPivotTol) continue;  // fixed span, cannot move
            const double d = tb.zrow(j);
            const double gain = tb.state[j] == VarState::AtLower ? d : -d;
            if (gain <= kDualTol) continue;
            if (bland) {
                enter = j;
                break;
            }
            if (gain > best_gain) {
                best_gain = gain;
                enter = j;
            }
        }
        if (enter < 0) return LoopExit::Done;

        const double sigma = tb.state[enter] == VarState::AtLower ? 1.0 : -1.0;

        // Ratio test: the step is limited by the entering span (a bound
        // switch) or by a basic variable reaching one of its bounds.
        double step = tb.u(enter);
        int leave_row = -1;
        bool leave_upper = false;
        for (int i = 0; i < tb.m; ++i) {
            const double a = sigma * tb.t(i, enter);
            double lim;
            bool upper;
            if (a > kPivotTol) {
                lim = tb.xb(i) / a;
                upper = false;
            } else if (a < -kPivotTol && std::isfinite(tb.u(tb.basis[i]))) {
                lim = (tb.u(tb.basis[i]) - tb.xb(i)) / (-a);
                upper = true;
            } else {
                continue;
            }
            if (lim < 0.0) lim = 0.0;  // degeneracy noise guard
            bool better;
            if (leave_row < 0) {
                better = lim < step;  // ties keep the cheaper bound switch
            } else if (lim < step - kTieTol) {
                better = true;
            } else if (lim > step + kTieTol) {
                better = false;
            } else if (bland) {
                better = tb.basis[i] < tb.basis[leave_row];
            } else {
                better = std::abs(tb.t(i, enter)) > std::abs(tb.t(leave_row, enter));
            }
            if (better) {
                step = lim;
                leave_row = i;
                leave_upper = upper;
            }
        }
        if (!(step < kInf)) return LoopExit::Unbounded;

        const double improvement = std::abs(tb.zrow(enter)) * step;
        if (leave_row < 0) {
            // Bound switch: the entering variable crosses its whole span,
            // the basis is unchanged.
            tb.xb -= (sigma * step) * tb.t.col(enter);
            tb.z += improvement;
            tb.state[enter] =
                tb.state[enter] == VarState::AtLower ? VarState::AtUpper : VarState::AtLower;
        } else {
            const double enter_val =
                (tb.state[enter] == VarState::AtLower ? 0.0 : tb.u(enter)) + sigma * step;
            if (step != 0.0) {
                tb.xb -= (sigma * step) * tb.t.col(enter);
                tb.z += improvement;
            }
            const int leaving = tb.basis[leave_row];
            tb.pivot(leave_row, enter);
            tb.state[leaving] = leave_upper ? VarState::AtUpper : VarState::AtLower;
            tb.basis[leave_row] = enter;
            tb.state[enter] = VarState::Basic;
            tb.xb(leave_row) = enter_val;
        }
        tb.clamp_basics();

        if (improvement > 1e-12 * (1.0 + std::abs(tb.z))) {
            nonimproving = 0;
            bland = false;
        } else if (!bland && ++nonimproving >= 60) {
            bland = true;  // anti-cycling fallback
        }
    }
    return LoopExit::Stalled;
}

}  // namespace

LpResult solve_lp(const LinearProgram& lp) {
    const int n = lp.num_vars();
    const int m_in = lp.num_rows();
    if (lp.A.rows() != m_in || lp.A.cols() != n || static_cast<int>(lp.rel.size()) != m_in ||
        lp.lo.size() != n || lp.up.size() != n)
        throw std::invalid_argument("solve_lp: inconsistent dimensions");
    require_finite(lp.A, "solve_lp: A");
    require_finite(lp.b, "solve_lp: b");
    require_finite(lp.c, "solve_lp: c");
    for (int j = 0; j < n; ++j) {
        if (!std::isfinite(lp.lo(j)))
            throw std::invalid_argument("solve_lp: lower bounds must be finite");
        if (std::isnan(lp.up(j)) || lp.up(j) == -kInf)
            throw std::invalid_argument("solve_lp: bad upper bound");
    }

    LpResult result;
    for (int j = 0; j < n; ++j) {
        if (lp.up(j) < lp.lo(j) - kFeasTol * std::max(1.0, std::abs(lp.lo(j)))) {
            result.status = LpStatus::Infeasible;
            return result;
        }
    }

    // Shift every variable to lower bound 0; spans may be +inf.
    Vector span(n);
    for (int j = 0; j < n; ++j) span(j) = std::max(0.0, lp.up(j) - lp.lo(j));
    Vector bsh = lp.b - lp.A * lp.lo;

    // Row scaling to unit max coefficient; constant rows are checked for
    // consistency and dropped.
    std::vector<int> keep_rows;
    std::vector<char> rel;
    Matrix a_rows(m_in, n);
    Vector b_rows(m_in);
    int m = 0;
    for (int i = 0; i < m_in; ++i) {
        char r = lp.rel[i];
        if (r != 'L' && r != 'G' && r != 'E')
            throw std::invalid_argument("solve_lp: relation must be L, G, or E");
        const double scale = lp.A.row(i).cwiseAbs().maxCoeff();
        if (scale <= 0.0) {
            const double rhs = bsh(i);
            const bool ok = (r == 'L' && rhs >= -kFeasTol) || (r == 'G' && rhs <= kFeasTol) ||
                            (r == 'E' && std::abs(rhs) <= kFeasTol);
            if (!ok) {
                result.status = LpStatus::Infeasible;
                return result;
            }
            continue;
        }
        Vector row = lp.A.row(i).transpose() / scale;
        double rhs = bsh(i) / scale;
        if (rhs < 0.0) {  // keep right-hand sides nonnegative
            row = -row;
            rhs = -rhs;
            r = r == 'L' ? 'G' : (r == 'G' ? 'L' : 'E');
        }
        a_rows.row(m) = row.transpose();
        b_rows(m) = rhs;
        rel.push_back(r);
        ++m;
    }

    int n_slack = 0, n_art = 0;
    for (int i = 0; i < m; ++i) {
        if (rel[i] != 'E') ++n_slack;
        if (rel[i] != 'L') ++n_art;
    }

    Tableau tb;
    tb.m = m;
    tb.total = n + n_slack + n_art;
    tb.t = RowMat::Zero(m, tb.total);
    tb.t.leftCols(n) = a_rows.topRows(m);
    tb.xb = b_rows.head(m);
    tb.u = Vector::Constant(tb.total, kInf);
    tb.u.head(n) = span;
    tb.basis.assign(m, -1);
    tb.state.assign(tb.total, VarState::AtLower);
    tb.usable.assign(tb.total, 1);

    const int art_begin = n + n_slack;
    {
        int s = n, a = art_begin;
        for (int i = 0; i < m; ++i) {
            if (rel[i] == 'L') {
                tb.t(i, s) = 1.0;
                tb.basis[i] = s++;
            } else if (rel[i] == 'G') {
                tb.t(i, s) = -1.0;
                ++s;
                tb.t(i, a) = 1.0;
                tb.basis[i] = a++;
            } else {
                tb.t(i, a) = 1.0;
                tb.basis[i] = a++;
            }
        }
        for (int i = 0; i < m; ++i) tb.state[tb.basis[i]] = VarState::Basic;
    }

    const long max_iters = 2000 + 20L * (m + tb.total);

    if (n_art > 0) {
        // Phase 1: maximize minus the artificial sum.
        tb.zrow = Eigen::RowVectorXd::Zero(tb.total);
        tb.z = 0.0;
        for (int i = 0; i < m; ++i) {
            if (tb.basis[i] >= art_begin) {
                tb.zrow += tb.t.row(i);
                tb.z -= tb.xb(i);
            }
        }
        for (int j = art_begin; j < tb.total; ++j) tb.zrow(j) = 0.0;

        const LoopExit ex = run_simplex(tb, max_iters);
        if (ex == LoopExit::Stalled || ex == LoopExit::Unbounded) {
            result.status = LpStatus::Stalled;
            return result;
        }
        if (tb.z < -kFeasTol) {
            result.status = LpStatus::Infeasible;
            return result;
        }

        // Drive leftover artificials out of the basis; rows where that is
        // impossible are redundant and get deleted.
        std::vector<char> drop(m, 0);
        for (int i = 0; i < tb.m; ++i) {
            if (tb.basis[i] < art_begin) continue;
            int piv = -1;
            double best = kPivotTol;
            for (int j = 0; j < art_begin; ++j) {
                if (!tb.usable[j] || tb.state[j] == VarState::Basic) continue;
                if (std::abs(tb.t(i, j)) > best) {
                    best = std::abs(tb.t(i, j));
                    piv = j;
                }
            }
            if (piv < 0) {
                drop[i] = 1;
                continue;
            }
            const int leaving = tb.basis[i];
            const double val = tb.state[piv] == VarState::AtUpper ? tb.u(piv) : 0.0;
            tb.pivot(i, piv);
            tb.state[leaving] = VarState::AtLower;
            tb.basis[i] = piv;
            tb.state[piv] = VarState::Basic;
            tb.xb(i) = val;
        }
        int w = 0;
        for (int i = 0; i < tb.m; ++i) {
            if (drop[i]) continue;
            if (w != i) {
                tb.t.row(w) = tb.t.row(i);
                tb.xb(w) = tb.xb(i);
                tb.basis[w] = tb.basis[i];
            }
            ++w;
        }
        tb.m = w;
        tb.t.conservativeResize(w, Eigen::NoChange);
        tb.xb.conservativeResize(w);
        tb.basis.resize(w);
        for (int j = art_begin; j < tb.total; ++j) tb.usable[j] = 0;
    }

    // Phase 2: real objective over the shifted variables.
    tb.zrow = Eigen::RowVectorXd::Zero(tb.total);
    tb.zrow.head(n) = lp.c.transpose();
    tb.z = 0.0;
    for (int i = 0; i < tb.m; ++i) {
        const int bj = tb.basis[i];
        const double cb = bj < n ? lp.c(bj) : 0.0;
        if (cb != 0.0) {
            tb.zrow -= cb * tb.t.row(i);
            tb.z += cb * tb.xb(i);
        }
    }
    for (int i = 0; i < tb.m; ++i) tb.zrow(tb.basis[i]) = 0.0;
    for (int j = 0; j < n; ++j) {
        if (tb.state[j] == VarState::AtUpper) tb.z += lp.c(j) * tb.u(j);
    }

    const LoopExit ex = run_simplex(tb, max_iters);
    if (ex == LoopExit::Stalled) {
        result.status = LpStatus::Stalled;
        return result;
    }
    if (ex == LoopExit::Unbounded) {
        result.status = LpStatus::Unbounded;
        return result;
    }

    result.x = lp.lo;
    for (int j = 0; j < n; ++j) {
        if (tb.state[j] == VarState::AtUpper) result.x(j) += tb.u(j);
    }
    for (int i = 0; i < tb.m; ++i) {
        if (tb.basis[i] < n) result.x(tb.basis[i]) = lp.lo(tb.basis[i]) + tb.xb(i);
    }
    result.value = lp.c.dot(result.x);
    result.status = LpStatus::Optimal;
    return result;
}

}  // namespace audit
