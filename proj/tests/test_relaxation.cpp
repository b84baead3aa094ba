#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "hyopf/case_io.hpp"
#include "hyopf/ipm.hpp"
#include "hyopf/oracle.hpp"
#include "hyopf/recovery.hpp"
#include "hyopf/relaxation.hpp"

using namespace hyopf;

namespace {

NetworkCase load(const std::string& name) {
    std::ifstream in(std::string(HYOPF_CASE_DIR) + "/" + name);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_case(ss.str());
}

std::set<std::string> tag_kinds(const ConicProblem& p) {
    std::set<std::string> kinds;
    for (const auto& c : p.linear) kinds.insert(c.tag.kind);
    for (const auto& c : p.lmis) kinds.insert(c.tag.kind);
    return kinds;
}

// Lift a feasible operating point into the relaxation's variable space.
struct Lifted {
    std::vector<Mat> blocks;
    Vec scalars;
};

Lifted lift(const NetworkCase& cs, const Relaxation& rel, const RecoveredState& st) {
    Lifted out;
    out.blocks.resize(rel.problem.blocks.size());
    for (size_t b = 0; b < rel.problem.blocks.size(); ++b)
        out.blocks[b] = Mat::Zero(rel.problem.blocks[b].dim, rel.problem.blocks[b].dim);

    if (rel.w_ac >= 0) {
        const int n = static_cast<int>(cs.ac_buses.size());
        Vec x(2 * n);
        x.head(n) = st.ac_voltage.real();
        x.tail(n) = st.ac_voltage.imag();
        Vec xr(2 * n - 1);
        int j = 0;
        for (int i = 0; i < 2 * n; ++i)
            if (i != rel.ac_drop) xr(j++) = x(i);
        out.blocks[rel.w_ac] = xr * xr.transpose();
    }
    if (rel.w_dc >= 0) out.blocks[rel.w_dc] = st.dc_voltage * st.dc_voltage.transpose();

    out.scalars = Vec::Zero(rel.problem.scalar_vars.size());
    for (size_t g = 0; g < cs.generators.size(); ++g) {
        const Generator& gen = cs.generators[g];
        double p = st.gen_p(g);
        out.scalars(rel.alpha[g]) = gen.c2 * p * p + gen.c1 * p + gen.c0;
    }
    for (size_t d = 0; d < cs.dcdc_converters.size(); ++d) {
        double q = st.dcdc_q(d);
        out.scalars(rel.dcdc_s[d]) = st.dcdc_s(d);
        out.scalars(rel.dcdc_q[d]) = q;
        if (rel.dcdc_t[d] >= 0) out.scalars(rel.dcdc_t[d]) = q * q;
        if (rel.dcdc_u[d] >= 0) out.scalars(rel.dcdc_u[d]) = std::abs(q);
    }
    return out;
}

void check_point_feasible(const Relaxation& rel, const Lifted& pt, double tol) {
    for (const auto& c : rel.problem.linear) {
        double v = c.expr.eval(pt.blocks, pt.scalars);
        INFO("linear constraint ", c.tag.str(), " value ", v, " in [", c.lo, ", ", c.hi, "]");
        CHECK(v >= c.lo - tol);
        CHECK(v <= c.hi + tol);
    }
    for (const auto& c : rel.problem.lmis) {
        Mat V = c.value(pt.blocks, pt.scalars);
        Eigen::SelfAdjointEigenSolver<Mat> es(V, Eigen::EigenvaluesOnly);
        INFO("LMI ", c.tag.str(), " min eigenvalue ", es.eigenvalues()(0));
        CHECK(es.eigenvalues()(0) >= -tol);
    }
}

}  // namespace

TEST_CASE("assembled problem has the expected shape") {
    NetworkCase cs = load("hybrid4.json");
    Relaxation rel = assemble(cs);
    const int n = static_cast<int>(cs.ac_buses.size());

    REQUIRE(rel.w_ac >= 0);
    REQUIRE(rel.w_dc >= 0);
    // slack imaginary coordinate is eliminated, not pinned
    CHECK(rel.problem.blocks[rel.w_ac].dim == 2 * n - 1);
    CHECK(rel.ac_drop == n + cs.ac_slack_index());
    CHECK(rel.problem.blocks[rel.w_dc].dim == static_cast<int>(cs.dc_buses.size()));
    CHECK(rel.alpha.size() == cs.generators.size());

    auto kinds = tag_kinds(rel.problem);
    for (const char* k : {"ac-p-bound", "ac-q-bound", "ac-v-bound", "ac-flow-lmi",
                          "cost-epigraph", "dc-injection-bound", "dc-master-voltage",
                          "dc-voltage-bound", "dc-flow-limit", "converter-balance",
                          "converter-capacity"}) {
        INFO("missing tag kind ", k);
        CHECK(kinds.count(k) == 1);
    }
}

TEST_CASE("row/column deletion matches the retained coordinates") {
    NetworkCase cs = load("ac3.json");
    Relaxation rel = assemble(cs);
    const int n = static_cast<int>(cs.ac_buses.size());
    Mat full = Mat::Zero(2 * n, 2 * n);
    for (int i = 0; i < 2 * n; ++i)
        for (int j = 0; j < 2 * n; ++j) full(i, j) = 10.0 * i + j;
    Mat red = rel.reduce_ac(full);
    REQUIRE(red.rows() == 2 * n - 1);
    int ii = 0;
    for (int i = 0; i < 2 * n; ++i) {
        if (i == rel.ac_drop) continue;
        int jj = 0;
        for (int j = 0; j < 2 * n; ++j) {
            if (j == rel.ac_drop) continue;
            CHECK(red(ii, jj) == full(i, j));
            ++jj;
        }
        ++ii;
    }
}

TEST_CASE("a feasible operating point lifts into the constraint set") {
    for (const char* name : {"dc3.json", "ac2.json"}) {
        INFO("case ", name);
        NetworkCase cs = load(name);
        OracleResult best = brute_force_opf(cs, 5);
        RecoveredState st = state_from_voltages(cs, best.ac_voltage, best.dc_voltage, best.dcdc_q);
        Relaxation rel = assemble(cs);
        Lifted pt = lift(cs, rel, st);
        check_point_feasible(rel, pt, 1e-7);
        // the lifted objective equals the physical objective
        double obj = rel.problem.objective.eval(pt.blocks, pt.scalars);
        CHECK(obj == doctest::Approx(st.objective).epsilon(1e-9));
    }
}

TEST_CASE("solved hybrid point lifts into the constraint set") {
    NetworkCase cs = load("hybrid4.json");
    Relaxation rel = assemble(cs);
    ConicSolution sol = solve_relaxation(rel);
    REQUIRE(sol.status == SolveStatus::Optimal);
    RecoveredState st = recover(cs, sol);
    Lifted pt = lift(cs, rel, st);
    check_point_feasible(rel, pt, 1e-6);
}

TEST_CASE("relaxation optimum lower-bounds every feasible point") {
    NetworkCase cs = load("dc3.json");
    ConicSolution sol = solve_relaxation(assemble(cs));
    REQUIRE(sol.status == SolveStatus::Optimal);
    OracleResult best = brute_force_opf(cs, 5);
    CHECK(sol.objective_value <= best.objective + 1e-6);

    // a deliberately suboptimal feasible point is also dominated
    OracleResult coarse = brute_force_opf(cs, 3, 17);
    CHECK(sol.objective_value <= coarse.objective + 1e-6);
}
