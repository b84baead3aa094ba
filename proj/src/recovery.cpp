#include "hyopf/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hyopf/coefficients.hpp"
#include "hyopf/errors.hpp"
#include "hyopf/verifier.hpp"

namespace hyopf {

RankDiagnostics diagnose_rank(const Mat& W, double threshold) {
    RankDiagnostics d;
    Eigen::SelfAdjointEigenSolver<Mat> es(W, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw RecoveryError("eigendecomposition failed");
    d.eigenvalues = es.eigenvalues().reverse();
    const int n = static_cast<int>(d.eigenvalues.size());
    const double l1 = d.eigenvalues(0);
    if (!(l1 > 0)) return d;
    const double l2 = n > 1 ? std::max(d.eigenvalues(1), 0.0) : 0.0;
    const double l3 = n > 2 ? std::max(d.eigenvalues(2), 0.0) : 0.0;
    if (l1 >= threshold * l2) {
        d.effective_rank = 1;
        d.ratio = l2 > 0 ? l1 / l2 : std::numeric_limits<double>::infinity();
    } else if (l1 >= threshold * l3) {
        d.effective_rank = 2;
        d.ratio = l3 > 0 ? l1 / l3 : std::numeric_limits<double>::infinity();
    } else {
        d.ratio = l1 / l2;
    }
    return d;
}

namespace {

// AC voltages live in W up to a global rotation, so the optimum is often a
// rank-2 matrix spanning {x, Jx} with J the block rotation by 90 degrees.
// Folding W into the Hermitian form (W11 + W22) + i (W21 - W21') collapses
// that ambiguity: the fold is rank 1 in both the exact rank-1 and the
// rotational rank-2 case, and its dominant eigenvector is the complex
// voltage profile.
CVec fold_ac_voltage(const Mat& W, double& defect) {
    const int n = static_cast<int>(W.rows()) / 2;
    Mat W11 = W.topLeftCorner(n, n);
    Mat W22 = W.bottomRightCorner(n, n);
    Mat W21 = W.bottomLeftCorner(n, n);
    CMat Wc = (W11 + W22).cast<Complex>() + Complex(0, 1) * (W21 - W21.transpose()).cast<Complex>();
    Eigen::SelfAdjointEigenSolver<CMat> es(Wc);
    if (es.info() != Eigen::Success) throw RecoveryError("eigendecomposition failed");
    const double lmax = es.eigenvalues()(n - 1);
    if (!(lmax > 0)) throw RecoveryError("lifted AC matrix has no positive eigenvalue");
    CVec v = std::sqrt(lmax) * es.eigenvectors().col(n - 1);
    defect = (Wc - lmax * es.eigenvectors().col(n - 1) * es.eigenvectors().col(n - 1).adjoint())
                 .norm() /
             std::max(Wc.norm(), 1.0);
    return v;
}

double quad(const Mat& Y, const Vec& x) { return x.dot(Y * x); }

}  // namespace

RecoveredState state_from_voltages(const NetworkCase& cs, const CVec& ac_voltage,
                                   const Vec& dc_voltage, const Vec& dcdc_q) {
    RecoveredState st;
    st.ac_voltage = ac_voltage;
    st.dc_voltage = dc_voltage;
    CoefficientSet coeffs = build_coefficients(cs);

    Vec x;
    if (cs.has_ac()) {
        const int n = static_cast<int>(cs.ac_buses.size());
        x.resize(2 * n);
        x.head(n) = st.ac_voltage.real();
        x.tail(n) = st.ac_voltage.imag();
    }

    st.gen_p = Vec::Zero(cs.generators.size());
    st.gen_q = Vec::Zero(cs.generators.size());
    for (size_t g = 0; g < cs.generators.size(); ++g) {
        int k = cs.ac_index(cs.generators[g].bus);
        st.gen_p(g) = quad(coeffs.bus_p[k], x) + cs.ac_buses[k].p_load;
        st.gen_q(g) = quad(coeffs.bus_q[k], x) + cs.ac_buses[k].q_load;
    }

    st.dcdc_q = dcdc_q;
    st.dcdc_s = Vec::Zero(cs.dcdc_converters.size());
    for (size_t d = 0; d < cs.dcdc_converters.size(); ++d) {
        const DcDcConverter& c = cs.dcdc_converters[d];
        double q = dcdc_q(d);
        st.dcdc_s(d) = 0.5 * (c.delta + c.beta * std::abs(q) + c.gamma * q * q);
    }

    auto dc_injection_at = [&](int dc_bus_id) {
        int k = cs.dc_index(dc_bus_id);
        double p = quad(coeffs.dc_bus_p[k], st.dc_voltage);
        for (int d : cs.dcdc_at(dc_bus_id)) {
            p += st.dcdc_s(d);
            p += (cs.dcdc_converters[d].bus_k == dc_bus_id ? 1.0 : -1.0) * st.dcdc_q(d);
        }
        return p;
    };

    st.conv_p = Vec::Zero(cs.acdc_converters.size());
    st.conv_q = Vec::Zero(cs.acdc_converters.size());
    st.conv_dc_p = Vec::Zero(cs.acdc_converters.size());
    for (size_t c = 0; c < cs.acdc_converters.size(); ++c) {
        const AcDcConverter& conv = cs.acdc_converters[c];
        st.conv_dc_p(c) = dc_injection_at(conv.dc_bus);
        if (conv.ac_bus) {
            int k = cs.ac_index(*conv.ac_bus);
            st.conv_p(c) = quad(coeffs.bus_p[k], x) + cs.ac_buses[k].p_load;
            st.conv_q(c) = quad(coeffs.bus_q[k], x) + cs.ac_buses[k].q_load;
        }
    }

    double obj = 0.0;
    for (size_t g = 0; g < cs.generators.size(); ++g) {
        const Generator& gen = cs.generators[g];
        obj += gen.c2 * st.gen_p(g) * st.gen_p(g) + gen.c1 * st.gen_p(g) + gen.c0;
    }
    for (size_t li = 0; li < cs.ac_lines.size(); ++li)
        obj += quad(coeffs.line_p_fwd[li], x) + quad(coeffs.line_p_rev[li], x);
    for (size_t li = 0; li < cs.dc_lines.size(); ++li)
        obj += quad(coeffs.dc_line_fwd[li], st.dc_voltage) +
               quad(coeffs.dc_line_rev[li], st.dc_voltage);
    for (size_t d = 0; d < cs.dcdc_converters.size(); ++d) obj += 2.0 * st.dcdc_s(d);
    st.objective = obj;

    return st;
}

RecoveredState refine_state(const NetworkCase& cs, const RecoveredState& st) {
    const int n_ac = static_cast<int>(cs.ac_buses.size());
    const int n_dc = static_cast<int>(cs.dc_buses.size());
    if (n_ac + n_dc == 0) return st;

    Vec mag = Vec::Ones(n_ac), ang = Vec::Zero(n_ac);
    for (int k = 0; k < n_ac; ++k) {
        mag(k) = std::abs(st.ac_voltage(k));
        ang(k) = std::arg(st.ac_voltage(k));
    }
    Vec vdc = st.dc_voltage;
    const Vec q = st.dcdc_q;

    // DC/DC terms are held fixed, so their bus contributions are constants.
    Vec dc_extra = Vec::Zero(n_dc);
    for (size_t d = 0; d < cs.dcdc_converters.size(); ++d) {
        const DcDcConverter& c = cs.dcdc_converters[d];
        double s = 0.5 * (c.delta + c.beta * std::abs(q(d)) + c.gamma * q(d) * q(d));
        dc_extra(cs.dc_index(c.bus_k)) += s + q(d);
        dc_extra(cs.dc_index(c.bus_m)) += s - q(d);
    }

    struct Equation {
        enum Kind { AcP, AcQ, DcPin, ConvBalance } kind;
        int idx;
        double value;
    };
    std::vector<double*> unk;
    std::vector<Equation> eqs;

    for (int k = 0; k < n_ac; ++k) {
        const AcBus& bus = cs.ac_buses[k];
        if (bus.is_slack) continue;  // slack dispatch absorbs the mismatch
        std::vector<int> gens = cs.generators_at(bus.id);
        int c = cs.converter_at_ac(bus.id);
        if (!gens.empty()) {
            // hold the dispatch, clamped into its box, and re-solve the angle
            const Generator& g = cs.generators[gens[0]];
            double p = std::clamp(st.gen_p(gens[0]), g.p_min, g.p_max);
            unk.push_back(&ang(k));
            eqs.push_back({Equation::AcP, k, p});
        } else if (c >= 0) {
            const AcDcConverter& cv = cs.acdc_converters[c];
            if (cs.dc_buses[cs.dc_index(cv.dc_bus)].is_master) {
                // the angle solves the converter balance when the DC terminal
                // is the master bus and has no voltage freedom of its own
                unk.push_back(&ang(k));
                eqs.push_back({Equation::ConvBalance, c, 0.0});
            } else {
                // hold the converter working point, clamped into its
                // capacity disk; the DC terminal voltage solves the balance
                double p = st.conv_p(c), qc = st.conv_q(c);
                double s = std::hypot(p, qc);
                if (s > cv.s_conv && s > 0) {
                    double f = cv.s_conv / s;
                    p *= f;
                    qc *= f;
                }
                unk.push_back(&ang(k));
                eqs.push_back({Equation::AcP, k, p});
                unk.push_back(&mag(k));
                eqs.push_back({Equation::AcQ, k, qc});
            }
        } else {
            unk.push_back(&ang(k));
            eqs.push_back({Equation::AcP, k, 0.0});
            unk.push_back(&mag(k));
            eqs.push_back({Equation::AcQ, k, 0.0});
        }
    }
    for (int j = 0; j < n_dc; ++j) {
        const DcBus& bus = cs.dc_buses[j];
        if (bus.is_master) {
            vdc(j) = bus.v_master;
            continue;
        }
        int c = cs.converter_at_dc(bus.id);
        bool internal = c >= 0 && cs.acdc_converters[c].ac_bus.has_value();
        if (bus.p_min == bus.p_max) {
            if (internal) return st;  // pinned internal terminal: leave as is
            unk.push_back(&vdc(j));
            eqs.push_back({Equation::DcPin, j, bus.p_min});
        } else if (internal) {
            unk.push_back(&vdc(j));
            eqs.push_back({Equation::ConvBalance, c, 0.0});
        }
        // external converters keep their recovered (dispatchable) voltage
    }
    if (unk.empty()) return st;

    const CMat Y = n_ac > 0 ? build_ac_admittance(cs) : CMat();
    const Mat G = n_dc > 0 ? build_dc_admittance(cs) : Mat();

    auto residual = [&](const Vec& x) {
        for (size_t i = 0; i < unk.size(); ++i) *unk[i] = x(i);
        CVec V(n_ac);
        for (int k = 0; k < n_ac; ++k) V(k) = std::polar(mag(k), ang(k));
        CVec S = n_ac > 0 ? CVec(V.cwiseProduct((Y * V).conjugate())) : CVec();
        Vec pdc = n_dc > 0 ? Vec(vdc.cwiseProduct(G * vdc) + dc_extra) : Vec();
        Vec r(eqs.size());
        for (size_t e = 0; e < eqs.size(); ++e) {
            const Equation& eq = eqs[e];
            switch (eq.kind) {
                case Equation::AcP:
                    r(e) = S(eq.idx).real() + cs.ac_buses[eq.idx].p_load - eq.value;
                    break;
                case Equation::AcQ:
                    r(e) = S(eq.idx).imag() + cs.ac_buses[eq.idx].q_load - eq.value;
                    break;
                case Equation::DcPin:
                    r(e) = pdc(eq.idx) - eq.value;
                    break;
                case Equation::ConvBalance: {
                    const AcDcConverter& cv = cs.acdc_converters[eq.idx];
                    int ak = cs.ac_index(*cv.ac_bus);
                    r(e) = cv.efficiency * (S(ak).real() + cs.ac_buses[ak].p_load) +
                           pdc(cs.dc_index(cv.dc_bus));
                    break;
                }
            }
        }
        return r;
    };

    Vec x(unk.size());
    for (size_t i = 0; i < unk.size(); ++i) x(i) = *unk[i];
    Vec r = residual(x);
    bool ok = r.lpNorm<Eigen::Infinity>() < 1e-11;
    for (int it = 0; it < 40 && !ok; ++it) {
        Mat J(eqs.size(), unk.size());
        for (size_t i = 0; i < unk.size(); ++i) {
            double h = 1e-7 * std::max(1.0, std::abs(x(i)));
            Vec xp = x, xm = x;
            xp(i) += h;
            xm(i) -= h;
            J.col(i) = (residual(xp) - residual(xm)) / (2.0 * h);
        }
        Vec dx = J.fullPivLu().solve(-r);
        double norm0 = r.lpNorm<Eigen::Infinity>();
        double step = 1.0;
        for (int bt = 0; bt < 6; ++bt, step *= 0.5) {
            Vec rt = residual(x + step * dx);
            if (rt.lpNorm<Eigen::Infinity>() < norm0) {
                x += step * dx;
                r = rt;
                break;
            }
        }
        ok = r.lpNorm<Eigen::Infinity>() < 1e-11;
    }
    if (r.lpNorm<Eigen::Infinity>() > 1e-9) return st;
    for (size_t i = 0; i < unk.size(); ++i) *unk[i] = x(i);

    CVec V;
    if (n_ac > 0) {
        V.resize(n_ac);
        for (int k = 0; k < n_ac; ++k) V(k) = std::polar(mag(k), ang(k));
    }
    RecoveredState out = state_from_voltages(cs, V, vdc, q);
    out.ac_rank = st.ac_rank;
    out.dc_rank = st.dc_rank;
    out.ac_defect = st.ac_defect;
    out.dc_defect = st.dc_defect;
    return out;
}

RecoveredState recover(const NetworkCase& cs, const ConicSolution& sol, double rank_threshold) {
    CVec ac_voltage;
    Vec dc_voltage;
    RankDiagnostics ac_rank, dc_rank;
    double ac_defect = 0.0, dc_defect = 0.0;

    if (cs.has_ac()) {
        ac_rank = diagnose_rank(sol.w_ac, rank_threshold);
        if (ac_rank.effective_rank == 0)
            throw RecoveryError("AC relaxation is not tight: spectral ratio " +
                                std::to_string(ac_rank.ratio) + " below threshold");
        CVec v = fold_ac_voltage(sol.w_ac, ac_defect);
        // Gauge: zero angle and nonnegative real part at the slack bus.
        Complex ref = v(cs.ac_slack_index());
        if (std::abs(ref) > 0) v *= std::conj(ref) / std::abs(ref);
        ac_voltage = v;
    }

    if (cs.has_dc()) {
        dc_rank = diagnose_rank(sol.w_dc, rank_threshold);
        if (dc_rank.effective_rank != 1)
            throw RecoveryError("DC relaxation is not tight: spectral ratio " +
                                std::to_string(dc_rank.ratio) + " below threshold");
        Eigen::SelfAdjointEigenSolver<Mat> es(sol.w_dc);
        const int n = static_cast<int>(sol.w_dc.rows());
        const double lmax = es.eigenvalues()(n - 1);
        Vec v = std::sqrt(std::max(lmax, 0.0)) * es.eigenvectors().col(n - 1);
        if (v(cs.dc_master_index()) < 0) v = -v;
        dc_voltage = v;
        dc_defect = (sol.w_dc - v * v.transpose()).norm() / std::max(sol.w_dc.norm(), 1.0);
    }

    Vec dcdc_q = Vec::Zero(cs.dcdc_converters.size());
    for (size_t d = 0; d < cs.dcdc_converters.size(); ++d) dcdc_q(d) = sol.Q(d);

    RecoveredState st = state_from_voltages(cs, ac_voltage, dc_voltage, dcdc_q);
    st.ac_rank = ac_rank;
    st.dc_rank = dc_rank;
    st.ac_defect = ac_defect;
    st.dc_defect = dc_defect;

    // Spectral extraction leaves the solver's feasibility floor in the state;
    // when the point is already near-feasible, keep the manifold projection
    // if it tightens the independent check. Far-from-feasible points are
    // returned untouched so the lift is reported faithfully.
    double res0 = verify(cs, st).max_residual;
    if (res0 < 1e-2) {
        RecoveredState refined = refine_state(cs, st);
        if (verify(cs, refined).max_residual < res0) return refined;
    }
    return st;
}

}  // namespace hyopf
