#include "olsaudit/lp.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"

using audit::LinearProgram;
using audit::LpStatus;
using audit::Matrix;
using audit::Vector;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LinearProgram make_lp(int nv, int nr) {
    LinearProgram lp;
    lp.c = Vector::Zero(nv);
    lp.A = Matrix::Zero(nr, nv);
    lp.b = Vector::Zero(nr);
    lp.rel.assign(static_cast<size_t>(nr), 'L');
    lp.lo = Vector::Zero(nv);
    lp.up = Vector::Constant(nv, kInf);
    return lp;
}

TEST_CASE("a single ceiling pins the optimum") {
    LinearProgram lp = make_lp(1, 1);
    lp.c << 1;
    lp.A << 1;
    lp.b << 3;
    const audit::LpResult r = audit::solve_lp(lp);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.value == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(r.x(0) == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("contradictory rows are reported infeasible") {
    LinearProgram lp = make_lp(2, 2);
    lp.c << 1, 1;
    lp.A << 1, 1, 1, 1;
    lp.b << 1, 3;
    lp.rel = {'L', 'G'};  // x+y <= 1 and x+y >= 3
    CHECK(audit::solve_lp(lp).status == LpStatus::Infeasible);
}

TEST_CASE("bounds clashing with an equality are reported infeasible") {
    LinearProgram lp = make_lp(1, 1);
    lp.c << 1;
    lp.A << 1;
    lp.b << 5;
    lp.rel = {'E'};
    lp.up(0) = 2;  // x = 5 impossible under x <= 2
    CHECK(audit::solve_lp(lp).status == LpStatus::Infeasible);
}

TEST_CASE("a free improving ray is reported unbounded") {
    LinearProgram lp = make_lp(2, 1);
    lp.c << 1, 0;
    lp.A << 0, 1;  // only y is constrained
    lp.b << 1;
    CHECK(audit::solve_lp(lp).status == LpStatus::Unbounded);
}

TEST_CASE("equality rows bind exactly") {
    // max x + y  s.t.  x + y = 2,  x - y <= 1, 0 <= x,y <= 5
    LinearProgram lp = make_lp(2, 2);
    lp.c << 1, 1;
    lp.A << 1, 1, 1, -1;
    lp.b << 2, 1;
    lp.rel = {'E', 'L'};
    lp.up = Vector::Constant(2, 5.0);
    const audit::LpResult r = audit::solve_lp(lp);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(r.x(0) + r.x(1) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("negative lower bounds shift the feasible box") {
    // max -x  with  -3 <= x <= -1: the best is x = -3.
    LinearProgram lp = make_lp(1, 1);
    lp.c << -1;
    lp.A << 1;
    lp.b << 10;  // slack row, never binding
    lp.lo(0) = -3;
    lp.up(0) = -1;
    const audit::LpResult r = audit::solve_lp(lp);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.value == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(r.x(0) == doctest::Approx(-3.0).epsilon(1e-9));
}

TEST_CASE("simplex agrees with vertex enumeration on random instances") {
    audit::Rng rng(61);
    int optimal = 0, infeasible = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const int nv = 2 + static_cast<int>(rng.below(4));  // 2..5 variables
        const int nr = 1 + static_cast<int>(rng.below(4));
        LinearProgram lp = make_lp(nv, nr);
        for (int j = 0; j < nv; ++j) {
            lp.c(j) = rng.normal();
            lp.lo(j) = -1.0 - rng.uniform();
            lp.up(j) = 1.0 + rng.uniform();  // finite box keeps the LP bounded
        }
        for (int i = 0; i < nr; ++i) {
            for (int j = 0; j < nv; ++j) lp.A(i, j) = rng.normal();
            lp.b(i) = rng.normal();
            const double u = rng.uniform();
            lp.rel[static_cast<size_t>(i)] = u < 0.6 ? 'L' : (u < 0.85 ? 'G' : 'E');
        }

        const audit::LpResult r = audit::solve_lp(lp);
        REQUIRE(r.status != LpStatus::Stalled);
        REQUIRE(r.status != LpStatus::Unbounded);  // box is finite
        const auto vertex = oracles::lp_vertex_optimum(lp);
        if (r.status == LpStatus::Optimal) {
            REQUIRE(vertex.has_value());
            CHECK(r.value == doctest::Approx(*vertex).epsilon(1e-6).scale(1.0));
            // The reported point must satisfy every row and bound.
            for (int j = 0; j < nv; ++j) {
                CHECK(r.x(j) >= lp.lo(j) - 1e-7);
                CHECK(r.x(j) <= lp.up(j) + 1e-7);
            }
            for (int i = 0; i < nr; ++i) {
                const double lhs = lp.A.row(i).dot(r.x);
                if (lp.rel[static_cast<size_t>(i)] == 'L') CHECK(lhs <= lp.b(i) + 1e-6);
                if (lp.rel[static_cast<size_t>(i)] == 'G') CHECK(lhs >= lp.b(i) - 1e-6);
                if (lp.rel[static_cast<size_t>(i)] == 'E')
                    CHECK(lhs == doctest::Approx(lp.b(i)).epsilon(1e-6).scale(1.0));
            }
            ++optimal;
        } else {
            CHECK_FALSE(vertex.has_value());
            ++infeasible;
        }
    }
    // Both outcomes must actually be exercised by the draw.
    CHECK(optimal > 60);
    CHECK(infeasible > 10);
}

}  // namespace
