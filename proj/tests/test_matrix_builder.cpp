#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>

#include "hyopf/coefficients.hpp"
#include "hyopf/network.hpp"

using namespace hyopf;

namespace {

// 4-bus AC mesh with asymmetric admittances and line charging.
NetworkCase mesh4() {
    NetworkCase cs;
    cs.ac_buses = {{1, 0.9, 1.1, 0.0, 0.0, true},
                   {2, 0.9, 1.1, 0.4, 0.1, false},
                   {3, 0.9, 1.1, 0.3, 0.15, false},
                   {4, 0.9, 1.1, 0.2, 0.05, false}};
    cs.generators = {{1, 0.0, 3.0, -2.0, 2.0, 5.0, 40.0, 0.0}};
    auto line = [](int f, int t, Complex y, Complex ysh) {
        AcLine l;
        l.from = f;
        l.to = t;
        l.series_admittance = y;
        l.shunt_admittance = ysh;
        l.s_max = 5.0;
        return l;
    };
    cs.ac_lines = {line(1, 2, {3.0, -9.0}, {0.0, 0.02}),
                   line(2, 3, {2.0, -7.0}, {0.0, 0.015}),
                   line(3, 4, {4.0, -11.0}, {0.0, 0.01}),
                   line(4, 1, {2.5, -8.0}, {0.0, 0.025}),
                   line(1, 3, {1.5, -6.0}, {0.0, 0.0})};
    return cs;
}

NetworkCase ring5_dc() {
    NetworkCase cs;
    cs.dc_buses = {{1, 0.9, 1.1, -3.0, 3.0, true, 1.0},
                   {2, 0.9, 1.1, -3.0, 3.0, false, 1.0},
                   {3, 0.9, 1.1, -3.0, 3.0, false, 1.0},
                   {4, 0.9, 1.1, -3.0, 3.0, false, 1.0},
                   {5, 0.9, 1.1, -3.0, 3.0, false, 1.0}};
    cs.dc_lines = {{1, 2, 8.0, 3.0}, {2, 3, 6.0, 3.0}, {3, 4, 9.0, 3.0},
                   {4, 5, 7.0, 3.0}, {5, 1, 5.0, 3.0}, {2, 5, 4.0, 3.0}};
    cs.acdc_converters = {{std::nullopt, 1, 1.0, 5.0}};
    return cs;
}

// deterministic "random" voltage profile
CVec probe_voltage(int n, double scale) {
    CVec v(n);
    for (int k = 0; k < n; ++k)
        v(k) = std::polar(1.0 + scale * std::sin(1.7 * k + 0.3),
                          scale * std::cos(2.3 * k + 0.7));
    return v;
}

Vec stack(const CVec& v) {
    const int n = static_cast<int>(v.size());
    Vec x(2 * n);
    x.head(n) = v.real();
    x.tail(n) = v.imag();
    return x;
}

double quad(const Mat& A, const Vec& x) { return x.dot(A * x); }

}  // namespace

TEST_CASE("AC bus matrices reproduce the complex nodal injection") {
    NetworkCase cs = mesh4();
    CoefficientSet c = build_ac_coefficients(cs);
    CMat Y = build_ac_admittance(cs);

    for (double scale : {0.05, 0.2, 0.4}) {
        CVec v = probe_voltage(4, scale);
        Vec x = stack(v);
        CVec s = v.array() * (Y * v).conjugate().array();
        for (int k = 0; k < 4; ++k) {
            CHECK(quad(c.bus_p[k], x) == doctest::Approx(s(k).real()).epsilon(1e-10));
            CHECK(quad(c.bus_q[k], x) == doctest::Approx(s(k).imag()).epsilon(1e-10));
            CHECK(quad(c.bus_v[k], x) == doctest::Approx(std::norm(v(k))).epsilon(1e-12));
        }
    }
}

TEST_CASE("every coefficient matrix is exactly symmetric") {
    CoefficientSet c = build_coefficients(mesh4());
    auto sym = [](const Mat& A) { return (A - A.transpose()).cwiseAbs().maxCoeff() == 0.0; };
    for (const auto& A : c.bus_p) CHECK(sym(A));
    for (const auto& A : c.bus_q) CHECK(sym(A));
    for (const auto& A : c.bus_v) CHECK(sym(A));
    for (const auto& A : c.line_p_fwd) CHECK(sym(A));
    for (const auto& A : c.line_q_fwd) CHECK(sym(A));
    for (const auto& A : c.line_p_rev) CHECK(sym(A));
    for (const auto& A : c.line_q_rev) CHECK(sym(A));

    CoefficientSet d = build_dc_coefficients(ring5_dc());
    for (const auto& A : d.dc_bus_p) CHECK(sym(A));
    for (const auto& A : d.dc_line_fwd) CHECK(sym(A));
    for (const auto& A : d.dc_line_rev) CHECK(sym(A));
}

TEST_CASE("voltage magnitude matrix has the unit diagonal pair") {
    NetworkCase cs = mesh4();
    CoefficientSet c = build_ac_coefficients(cs);
    const int n = 4;
    for (int k = 0; k < n; ++k) {
        Mat expect = Mat::Zero(2 * n, 2 * n);
        expect(k, k) = 1.0;
        expect(n + k, n + k) = 1.0;
        CHECK((c.bus_v[k] - expect).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("AC line matrices match the branch flow formula") {
    NetworkCase cs = mesh4();
    CoefficientSet c = build_ac_coefficients(cs);
    CVec v = probe_voltage(4, 0.15);
    Vec x = stack(v);

    for (size_t li = 0; li < cs.ac_lines.size(); ++li) {
        const AcLine& line = cs.ac_lines[li];
        int l = cs.ac_index(line.from);
        int m = cs.ac_index(line.to);
        auto flow = [&](int a, int b) {
            Complex i_ab = (v(a) - v(b)) * line.series_admittance + v(a) * line.shunt_admittance;
            return v(a) * std::conj(i_ab);
        };
        CHECK(quad(c.line_p_fwd[li], x) == doctest::Approx(flow(l, m).real()).epsilon(1e-10));
        CHECK(quad(c.line_q_fwd[li], x) == doctest::Approx(flow(l, m).imag()).epsilon(1e-10));
        CHECK(quad(c.line_p_rev[li], x) == doctest::Approx(flow(m, l).real()).epsilon(1e-10));
        CHECK(quad(c.line_q_rev[li], x) == doctest::Approx(flow(m, l).imag()).epsilon(1e-10));
    }
}

TEST_CASE("injections decompose into sending-end line flows") {
    NetworkCase cs = mesh4();
    CoefficientSet c = build_ac_coefficients(cs);
    const int n = 4;
    Mat sum_bus = Mat::Zero(2 * n, 2 * n);
    Mat sum_line = Mat::Zero(2 * n, 2 * n);
    for (int k = 0; k < n; ++k) sum_bus += c.bus_p[k];
    for (size_t li = 0; li < cs.ac_lines.size(); ++li)
        sum_line += c.line_p_fwd[li] + c.line_p_rev[li];
    // total injection == total loss, as a matrix identity
    CHECK((sum_bus - sum_line).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("DC matrices reproduce nodal injection and line flow") {
    NetworkCase cs = ring5_dc();
    CoefficientSet c = build_dc_coefficients(cs);
    Mat G = build_dc_admittance(cs);

    Vec v(5);
    v << 1.0, 0.98, 1.03, 0.95, 1.01;
    Vec p = v.array() * (G * v).array();
    for (int k = 0; k < 5; ++k) {
        CHECK(quad(c.dc_bus_p[k], v) == doctest::Approx(p(k)).epsilon(1e-12));
        CHECK(quad(c.dc_bus_v[k], v) == doctest::Approx(v(k) * v(k)).epsilon(1e-12));
    }
    double loss = 0.0;
    for (size_t li = 0; li < cs.dc_lines.size(); ++li) {
        const DcLine& line = cs.dc_lines[li];
        int l = cs.dc_index(line.from);
        int m = cs.dc_index(line.to);
        double fwd = v(l) * line.conductance * (v(l) - v(m));
        double rev = v(m) * line.conductance * (v(m) - v(l));
        CHECK(quad(c.dc_line_fwd[li], v) == doctest::Approx(fwd).epsilon(1e-12));
        CHECK(quad(c.dc_line_rev[li], v) == doctest::Approx(rev).epsilon(1e-12));
        loss += fwd + rev;
    }
    CHECK(p.sum() == doctest::Approx(loss).epsilon(1e-12));
}

TEST_CASE("admittance matrices are consistent with their builders") {
    NetworkCase cs = mesh4();
    CMat Y = build_ac_admittance(cs);
    // row sums against series + shunt bookkeeping at bus 1 (index 0)
    Complex diag_expect{0.0, 0.0};
    for (const auto& l : cs.ac_lines)
        if (l.from == 1 || l.to == 1) diag_expect += l.series_admittance + l.shunt_admittance;
    CHECK(std::abs(Y(0, 0) - diag_expect) < 1e-12);
    CHECK(std::abs(Y(0, 1) + cs.ac_lines[0].series_admittance) < 1e-12);
    CHECK((Y - Y.transpose()).cwiseAbs().maxCoeff() == 0.0);

    Mat G = build_dc_admittance(ring5_dc());
    CHECK((G - G.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(G.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);  // no DC shunts
}
