#include "hyopf/coefficients.hpp"

namespace hyopf {

namespace {

// Lifts a complex n x n matrix A to the 2n x 2n real symmetric pair used in
// the trace constraints: first the active-power form, then the reactive one.
Mat lift_active(const CMat& A) {
    const auto n = A.rows();
    Mat out(2 * n, 2 * n);
    Mat re_sym = 0.5 * (A.real() + A.real().transpose());
    Mat im_skew = 0.5 * (A.imag().transpose() - A.imag());
    out.topLeftCorner(n, n) = re_sym;
    out.bottomRightCorner(n, n) = re_sym;
    out.topRightCorner(n, n) = im_skew;
    out.bottomLeftCorner(n, n) = -im_skew;
    return out;
}

Mat lift_reactive(const CMat& A) {
    const auto n = A.rows();
    Mat out(2 * n, 2 * n);
    Mat im_sym = -0.5 * (A.imag() + A.imag().transpose());
    Mat re_skew = -0.5 * (A.real() - A.real().transpose());
    out.topLeftCorner(n, n) = im_sym;
    out.bottomRightCorner(n, n) = im_sym;
    out.topRightCorner(n, n) = re_skew;
    out.bottomLeftCorner(n, n) = -re_skew;
    return out;
}

}  // namespace

CMat build_ac_admittance(const NetworkCase& cs) {
    const int n = static_cast<int>(cs.ac_buses.size());
    CMat Y = CMat::Zero(n, n);
    for (const auto& line : cs.ac_lines) {
        int l = cs.ac_index(line.from);
        int m = cs.ac_index(line.to);
        Y(l, l) += line.series_admittance + line.shunt_admittance;
        Y(m, m) += line.series_admittance + line.shunt_admittance;
        Y(l, m) -= line.series_admittance;
        Y(m, l) -= line.series_admittance;
    }
    return Y;
}

Mat build_dc_admittance(const NetworkCase& cs) {
    const int n = static_cast<int>(cs.dc_buses.size());
    Mat Y = Mat::Zero(n, n);
    for (const auto& line : cs.dc_lines) {
        int f = cs.dc_index(line.from);
        int t = cs.dc_index(line.to);
        Y(f, f) += line.conductance;
        Y(t, t) += line.conductance;
        Y(f, t) -= line.conductance;
        Y(t, f) -= line.conductance;
    }
    return Y;
}

CoefficientSet build_ac_coefficients(const NetworkCase& cs) {
    CoefficientSet set;
    const int n = static_cast<int>(cs.ac_buses.size());
    set.n_ac = n;
    if (n == 0) return set;
    CMat Y = build_ac_admittance(cs);

    set.bus_p.reserve(n);
    set.bus_q.reserve(n);
    set.bus_v.reserve(n);
    for (int k = 0; k < n; ++k) {
        CMat Yk = CMat::Zero(n, n);
        Yk.row(k) = Y.row(k);
        set.bus_p.push_back(lift_active(Yk));
        set.bus_q.push_back(lift_reactive(Yk));
        Mat M = Mat::Zero(2 * n, 2 * n);
        M(k, k) = 1.0;
        M(k + n, k + n) = 1.0;
        set.bus_v.push_back(M);
    }
    for (const auto& line : cs.ac_lines) {
        int l = cs.ac_index(line.from);
        int m = cs.ac_index(line.to);
        auto directed = [&](int a, int b) {
            CMat Ylm = CMat::Zero(n, n);
            Ylm(a, a) = line.shunt_admittance + line.series_admittance;
            Ylm(a, b) = -line.series_admittance;
            return Ylm;
        };
        CMat fwd = directed(l, m);
        CMat rev = directed(m, l);
        set.line_p_fwd.push_back(lift_active(fwd));
        set.line_q_fwd.push_back(lift_reactive(fwd));
        set.line_p_rev.push_back(lift_active(rev));
        set.line_q_rev.push_back(lift_reactive(rev));
    }
    return set;
}

CoefficientSet build_dc_coefficients(const NetworkCase& cs) {
    CoefficientSet set;
    const int n = static_cast<int>(cs.dc_buses.size());
    set.n_dc = n;
    if (n == 0) return set;
    Mat Y = build_dc_admittance(cs);

    for (int i = 0; i < n; ++i) {
        Mat Yi = Mat::Zero(n, n);
        Yi.row(i) = Y.row(i);
        set.dc_bus_p.push_back(0.5 * (Yi + Yi.transpose()));
        Mat M = Mat::Zero(n, n);
        M(i, i) = 1.0;
        set.dc_bus_v.push_back(M);
    }
    for (const auto& line : cs.dc_lines) {
        int f = cs.dc_index(line.from);
        int t = cs.dc_index(line.to);
        auto directed = [&](int a, int b) {
            Mat Yft = Mat::Zero(n, n);
            Yft(a, a) = line.conductance;
            Yft(a, b) = -line.conductance;
            return Mat(0.5 * (Yft + Yft.transpose()));
        };
        set.dc_line_fwd.push_back(directed(f, t));
        set.dc_line_rev.push_back(directed(t, f));
    }
    return set;
}

CoefficientSet build_coefficients(const NetworkCase& cs) {
    CoefficientSet ac = build_ac_coefficients(cs);
    CoefficientSet dc = build_dc_coefficients(cs);
    ac.n_dc = dc.n_dc;
    ac.dc_bus_p = std::move(dc.dc_bus_p);
    ac.dc_bus_v = std::move(dc.dc_bus_v);
    ac.dc_line_fwd = std::move(dc.dc_line_fwd);
    ac.dc_line_rev = std::move(dc.dc_line_rev);
    return ac;
}

}  // namespace hyopf
