#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "hyopf/case_io.hpp"
#include "hyopf/ipm.hpp"
#include "hyopf/relaxation.hpp"
#include "hyopf/standard_form.hpp"

using namespace hyopf;

namespace {

NetworkCase load(const std::string& name) {
    std::ifstream in(std::string(HYOPF_CASE_DIR) + "/" + name);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_case(ss.str());
}

}  // namespace

TEST_CASE("scalar LP: min x subject to x >= 1") {
    ConicProblem p;
    int x = p.add_scalar("x", true);
    p.objective.add_scalar(x, 1.0);
    LinearConstraint c;
    c.expr.add_scalar(x, 1.0);
    c.lo = 1.0;
    p.linear.push_back(c);

    RawSolution sol = solve(compile(p));
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.iterations < 50);
    CHECK(sol.rel_gap <= 1e-8);
    CHECK(sol.primal_obj == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("trace minimization pins the free diagonal to zero") {
    // min Tr W  s.t.  W_00 = 1, W psd 2x2; optimum W = e0 e0', value 1
    ConicProblem p;
    int w = p.add_block("W", 2);
    p.objective.add_trace(w, Mat::Identity(2, 2));
    LinearConstraint c;
    Mat E = Mat::Zero(2, 2);
    E(0, 0) = 1.0;
    c.expr.add_trace(w, E);
    c.lo = c.hi = 1.0;
    p.linear.push_back(c);

    RawSolution sol = solve(compile(p));
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.iterations < 50);
    CHECK(sol.rel_gap <= 1e-8);
    CHECK(sol.primal_obj == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(sol.X[0](0, 0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(sol.X[0](1, 1)) < 1e-6);
}

TEST_CASE("off-diagonal coupling: min W_00 + W_11 with W_01 = 1") {
    // psd forces W_00 W_11 >= W_01^2 = 1, so the optimum is 2 at W = ones
    ConicProblem p;
    int w = p.add_block("W", 2);
    p.objective.add_trace(w, Mat::Identity(2, 2));
    LinearConstraint c;
    Mat E = Mat::Zero(2, 2);
    E(0, 1) = E(1, 0) = 0.5;  // trace form counts both triangles
    c.expr.add_trace(w, E);
    c.lo = c.hi = 1.0;
    p.linear.push_back(c);

    RawSolution sol = solve(compile(p));
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.iterations < 50);
    CHECK(sol.rel_gap <= 1e-8);
    CHECK(sol.primal_obj == doctest::Approx(2.0).epsilon(1e-7));
    CHECK(sol.X[0](0, 1) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("independent residuals agree with the reported iterate") {
    NetworkCase cs = load("dc3.json");
    StandardForm sf = compile(assemble(cs).problem);
    RawSolution sol = solve(sf);
    REQUIRE(sol.status == SolveStatus::Optimal);
    ResidualNorms r = residuals(sf, sol);
    CHECK(r.primal_inf <= 1e-7);
    CHECK(r.dual_inf <= 1e-7);
    CHECK(std::abs(r.gap) <= 1e-6 * std::max(1.0, std::abs(sol.primal_obj)));
}

TEST_CASE("two-bus DC case hits the closed-form loss") {
    // single line g, master V1 = 1, fixed load d at bus 2:
    // V2 = (1 + sqrt(1 - 4 d / g)) / 2 and the loss is g (V1 - V2)^2.
    NetworkCase cs = load("dc2.json");
    ConicSolution sol = solve_relaxation(assemble(cs));
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.iterations < 50);

    double g = cs.dc_lines[0].conductance;
    double d = -cs.dc_buses[1].p_min;  // load magnitude in p.u.
    double v2 = 0.5 * (1.0 + std::sqrt(1.0 - 4.0 * d / g));
    double loss = g * (1.0 - v2) * (1.0 - v2);
    CHECK(sol.objective_value == doctest::Approx(loss).epsilon(1e-7));
    CHECK(sol.w_dc(1, 1) == doctest::Approx(v2 * v2).epsilon(1e-6));
}

TEST_CASE("solver is deterministic") {
    NetworkCase cs = load("dc3.json");
    Relaxation rel = assemble(cs);
    ConicSolution a = solve_relaxation(rel);
    ConicSolution b = solve_relaxation(rel);
    REQUIRE(a.status == SolveStatus::Optimal);
    CHECK(a.objective_value == b.objective_value);  // bitwise
    CHECK(a.iterations == b.iterations);
    CHECK((a.w_dc - b.w_dc).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("solution is robust to a change of MVA base") {
    NetworkCase cs = load("dc3.json");
    NetworkCase rb = rebase(cs, 73.0);
    ConicSolution a = solve_relaxation(assemble(cs));
    ConicSolution b = solve_relaxation(assemble(rb));
    REQUIRE(a.status == SolveStatus::Optimal);
    REQUIRE(b.status == SolveStatus::Optimal);
    // per-unit loss scales with the base; physical MW loss must not move
    double mw_a = a.objective_value * cs.base_mva;
    double mw_b = b.objective_value * rb.base_mva;
    CHECK(mw_b == doctest::Approx(mw_a).epsilon(1e-7));
    // voltages are base-free
    for (int k = 0; k < a.w_dc.rows(); ++k)
        CHECK(std::sqrt(b.w_dc(k, k)) == doctest::Approx(std::sqrt(a.w_dc(k, k))).epsilon(1e-7));
}

TEST_CASE("iteration cap reports MaxIterations") {
    NetworkCase cs = load("dc3.json");
    SolverOptions opts;
    opts.max_iter = 2;
    ConicSolution sol = solve_relaxation(assemble(cs), opts);
    CHECK(sol.status == SolveStatus::MaxIterations);
}

TEST_CASE("infeasible case is flagged") {
    // load far beyond what the line can carry
    NetworkCase cs = load("dc2.json");
    cs.dc_buses[1].p_min = cs.dc_buses[1].p_max = -8.0;  // g/4 = 2.5 pu is the transfer limit
    ConicSolution sol = solve_relaxation(assemble(cs));
    CHECK(sol.status != SolveStatus::Optimal);
}
