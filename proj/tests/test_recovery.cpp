#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "hyopf/errors.hpp"
#include "hyopf/network.hpp"
#include "hyopf/recovery.hpp"

using namespace hyopf;

namespace {

NetworkCase ac3_case() {
    NetworkCase cs;
    cs.ac_buses = {{1, 0.9, 1.1, 0.0, 0.0, true},
                   {2, 0.9, 1.1, 0.3, 0.1, false},
                   {3, 0.9, 1.1, 0.2, 0.05, false}};
    cs.generators = {{1, 0.0, 2.0, -1.0, 1.0, 5.0, 30.0, 0.0}};
    auto line = [](int f, int t, Complex y) {
        AcLine l;
        l.from = f;
        l.to = t;
        l.series_admittance = y;
        l.s_max = 5.0;
        return l;
    };
    cs.ac_lines = {line(1, 2, {3.0, -9.0}), line(2, 3, {2.0, -7.0}), line(1, 3, {2.5, -8.0})};
    return cs;
}

NetworkCase dc3_case() {
    NetworkCase cs;
    cs.dc_buses = {{1, 0.9, 1.1, -3.0, 3.0, true, 1.0},
                   {2, 0.9, 1.1, -3.0, 3.0, false, 1.0},
                   {3, 0.9, 1.1, -3.0, 3.0, false, 1.0}};
    cs.dc_lines = {{1, 2, 8.0, 3.0}, {2, 3, 6.0, 3.0}};
    cs.acdc_converters = {{std::nullopt, 1, 1.0, 4.0}};
    return cs;
}

Vec stack(const CVec& v) {
    const int n = static_cast<int>(v.size());
    Vec x(2 * n);
    x.head(n) = v.real();
    x.tail(n) = v.imag();
    return x;
}

// rotate the whole profile by phi: same physics, different gauge
CVec rotated(const CVec& v, double phi) { return v * std::polar(1.0, phi); }

ConicSolution lifted_solution(const CVec& ac, const Vec& dc) {
    ConicSolution sol;
    sol.status = SolveStatus::Optimal;
    if (ac.size() > 0) {
        Vec x = stack(ac);
        sol.w_ac = x * x.transpose();
    }
    if (dc.size() > 0) sol.w_dc = dc * dc.transpose();
    sol.Q = Vec::Zero(0);
    sol.S = Vec::Zero(0);
    return sol;
}

CVec probe_ac() {
    CVec v(3);
    v << Complex(1.02, 0.0), Complex(0.99, -0.021), Complex(0.985, -0.034);
    return v;
}

}  // namespace

TEST_CASE("rank diagnosis classifies clean spectra") {
    Mat W = Mat::Zero(4, 4);
    W(0, 0) = 1.0;
    W(1, 1) = 1e-9;
    RankDiagnostics d = diagnose_rank(W);
    CHECK(d.effective_rank == 1);
    CHECK(d.ratio == doctest::Approx(1e9).epsilon(1e-9));
    CHECK(d.eigenvalues(0) == doctest::Approx(1.0));

    W(1, 1) = 1e-3;  // second eigenvalue too large for rank 1
    W(2, 2) = 1e-12;
    d = diagnose_rank(W);
    CHECK(d.effective_rank == 2);

    W(2, 2) = 1e-3;  // third as well: no certificate
    d = diagnose_rank(W);
    CHECK(d.effective_rank == 0);

    // threshold is a parameter
    W(1, 1) = 1e-3;
    W(2, 2) = 0.0;
    CHECK(diagnose_rank(W, 1e2).effective_rank == 1);
}

TEST_CASE("round trip: lift then recover reproduces the voltages") {
    NetworkCase cs = ac3_case();
    CVec v = probe_ac();
    ConicSolution sol = lifted_solution(v, Vec());
    RecoveredState st = recover(cs, sol);
    REQUIRE(st.ac_voltage.size() == 3);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(st.ac_voltage(k) - v(k)) < 1e-9);
    CHECK(st.ac_rank.effective_rank == 1);
    CHECK(st.ac_defect < 1e-12);
}

TEST_CASE("recovery normalizes the gauge") {
    NetworkCase cs = ac3_case();
    CVec v = probe_ac();
    for (double phi : {0.3, -1.2, 2.9}) {
        ConicSolution sol = lifted_solution(rotated(v, phi), Vec());
        RecoveredState st = recover(cs, sol);
        // slack angle is restored to zero and the profile matches the original
        CHECK(std::abs(std::arg(st.ac_voltage(0))) < 1e-12);
        for (int k = 0; k < 3; ++k) CHECK(std::abs(st.ac_voltage(k) - v(k)) < 1e-9);
    }
}

TEST_CASE("rotational rank-2 ambiguity folds back to rank 1") {
    NetworkCase cs = ac3_case();
    CVec v = probe_ac();
    Vec x1 = stack(rotated(v, 0.4));
    Vec x2 = stack(rotated(v, 0.4 + M_PI / 2));  // J x1
    ConicSolution sol;
    sol.status = SolveStatus::Optimal;
    sol.w_ac = 0.6 * x1 * x1.transpose() + 0.4 * x2 * x2.transpose();
    sol.Q = sol.S = Vec::Zero(0);
    RecoveredState st = recover(cs, sol);
    CHECK(st.ac_rank.effective_rank == 2);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(st.ac_voltage(k) - v(k)) < 1e-9);
    CHECK(st.ac_defect < 1e-12);
}

TEST_CASE("genuinely high-rank matrices are refused") {
    NetworkCase cs = ac3_case();
    CVec v = probe_ac();
    ConicSolution sol = lifted_solution(v, Vec());
    sol.w_ac += 1e-3 * Mat::Identity(6, 6);  // not a rotation: true rank 6
    CHECK_THROWS_AS(recover(cs, sol), RecoveryError);
}

TEST_CASE("DC recovery fixes the master sign") {
    NetworkCase cs = dc3_case();
    Vec v(3);
    v << 1.0, 0.97, 0.95;
    ConicSolution sol = lifted_solution(CVec(), -v);  // lift of the negated profile
    RecoveredState st = recover(cs, sol);
    for (int k = 0; k < 3; ++k) CHECK(st.dc_voltage(k) == doctest::Approx(v(k)).epsilon(1e-9));
    CHECK(st.dc_rank.effective_rank == 1);
    CHECK(st.dc_defect < 1e-12);
}

TEST_CASE("defect reflects the distance to the rank-1 cone") {
    NetworkCase cs = dc3_case();
    Vec v(3);
    v << 1.0, 0.97, 0.95;
    ConicSolution sol = lifted_solution(CVec(), v);
    sol.w_dc += 1e-8 * Mat::Identity(3, 3);
    RecoveredState st = recover(cs, sol);
    CHECK(st.dc_defect > 1e-10);
    CHECK(st.dc_defect < 1e-7);
}

TEST_CASE("derived quantities follow from the voltage profile") {
    NetworkCase cs = dc3_case();
    Vec v(3);
    v << 1.0, 0.97, 0.95;
    RecoveredState st = state_from_voltages(cs, CVec(), v, Vec::Zero(0));
    // injection at bus 3 from the line model
    double p3 = v(2) * 6.0 * (v(2) - v(1));
    CHECK(st.conv_dc_p(0) == doctest::Approx(v(0) * 8.0 * (v(0) - v(1))).epsilon(1e-12));
    // total loss equals the objective for a cost-free DC case
    double loss = 8.0 * (v(0) - v(1)) * (v(0) - v(1)) + 6.0 * (v(1) - v(2)) * (v(1) - v(2));
    CHECK(st.objective == doctest::Approx(loss).epsilon(1e-12));
    (void)p3;
}
