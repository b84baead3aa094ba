#include "hyopf/relaxation.hpp"

#include <cmath>

#include "hyopf/errors.hpp"

namespace hyopf {

namespace {

void ensure_ac_block(const NetworkCase& cs, Relaxation& rel) {
    if (rel.w_ac < 0 && cs.has_ac()) {
        int n = static_cast<int>(cs.ac_buses.size());
        rel.ac_drop = n + cs.ac_slack_index();
        rel.w_ac = rel.problem.add_block("W_AC", 2 * n - 1);
    }
}

void ensure_dc_block(const NetworkCase& cs, Relaxation& rel) {
    if (rel.w_dc < 0 && cs.has_dc())
        rel.w_dc = rel.problem.add_block("W_DC", static_cast<int>(cs.dc_buses.size()));
}

void ensure_dcdc_scalars(const NetworkCase& cs, Relaxation& rel) {
    if (!rel.dcdc_s.empty() || cs.dcdc_converters.empty()) return;
    ConicProblem& p = rel.problem;
    for (size_t d = 0; d < cs.dcdc_converters.size(); ++d) {
        const auto& conv = cs.dcdc_converters[d];
        std::string suffix = std::to_string(conv.bus_k) + "_" + std::to_string(conv.bus_m);
        rel.dcdc_s.push_back(p.add_scalar("S_" + suffix, true));
        rel.dcdc_q.push_back(p.add_scalar("Q_" + suffix, false));
        rel.dcdc_t.push_back(conv.gamma > 0 ? p.add_scalar("T_" + suffix, true) : -1);
        rel.dcdc_u.push_back(conv.beta > 0 ? p.add_scalar("U_" + suffix, true) : -1);
    }
}

}  // namespace

Mat Relaxation::reduce_ac(const Mat& full) const {
    const int nf = static_cast<int>(full.rows());
    Mat out(nf - 1, nf - 1);
    for (int r = 0, rr = 0; r < nf; ++r) {
        if (r == ac_drop) continue;
        for (int c = 0, cc = 0; c < nf; ++c) {
            if (c == ac_drop) continue;
            out(rr, cc++) = full(r, c);
        }
        ++rr;
    }
    return out;
}

LinExpr Relaxation::dc_injection(const NetworkCase& cs, const CoefficientSet& coeffs,
                                 int dc_bus_id) const {
    LinExpr e;
    int k = cs.dc_index(dc_bus_id);
    e.add_trace(w_dc, coeffs.dc_bus_p[k]);
    for (int d : cs.dcdc_at(dc_bus_id)) {
        e.add_scalar(dcdc_s[d], 1.0);
        e.add_scalar(dcdc_q[d], cs.dcdc_converters[d].bus_k == dc_bus_id ? 1.0 : -1.0);
    }
    return e;
}

LinExpr Relaxation::converter_p(const NetworkCase& cs, const CoefficientSet& coeffs,
                                int ac_bus_id) const {
    LinExpr e;
    int k = cs.ac_index(ac_bus_id);
    e.add_trace(w_ac, reduce_ac(coeffs.bus_p[k]));
    e.constant += cs.ac_buses[k].p_load;
    return e;
}

LinExpr Relaxation::converter_q(const NetworkCase& cs, const CoefficientSet& coeffs,
                                int ac_bus_id) const {
    LinExpr e;
    int k = cs.ac_index(ac_bus_id);
    e.add_trace(w_ac, reduce_ac(coeffs.bus_q[k]));
    e.constant += cs.ac_buses[k].q_load;
    return e;
}

void build_ac_block(const NetworkCase& cs, const CoefficientSet& coeffs, Relaxation& rel) {
    if (!cs.has_ac()) return;
    ensure_ac_block(cs, rel);
    ConicProblem& p = rel.problem;
    const int n = static_cast<int>(cs.ac_buses.size());

    rel.alpha.assign(cs.generators.size(), -1);
    for (size_t g = 0; g < cs.generators.size(); ++g)
        rel.alpha[g] = p.add_scalar("alpha_" + std::to_string(cs.generators[g].bus), false);

    for (int k = 0; k < n; ++k) {
        const AcBus& bus = cs.ac_buses[k];
        auto gens = cs.generators_at(bus.id);
        if (gens.size() > 1)
            throw ModelError("AC bus " + std::to_string(bus.id) +
                             ": multiple generators per bus are not supported");
        bool coupled = cs.converter_at_ac(bus.id) >= 0;

        if (!coupled) {
            // Injection bounds; degenerate to equalities at pure load buses.
            double p_lo = -bus.p_load, p_hi = -bus.p_load;
            double q_lo = -bus.q_load, q_hi = -bus.q_load;
            if (!gens.empty()) {
                const Generator& gen = cs.generators[gens[0]];
                p_lo += gen.p_min;
                p_hi += gen.p_max;
                q_lo += gen.q_min;
                q_hi += gen.q_max;
            }
            LinExpr pe, qe;
            pe.add_trace(rel.w_ac, rel.reduce_ac(coeffs.bus_p[k]));
            qe.add_trace(rel.w_ac, rel.reduce_ac(coeffs.bus_q[k]));
            p.linear.push_back({pe, p_lo, p_hi, {"ac-p-bound", bus.id}});
            p.linear.push_back({qe, q_lo, q_hi, {"ac-q-bound", bus.id}});
        }

        LinExpr ve;
        ve.add_trace(rel.w_ac, rel.reduce_ac(coeffs.bus_v[k]));
        p.linear.push_back({ve, bus.v_min * bus.v_min, bus.v_max * bus.v_max, {"ac-v-bound", bus.id}});
    }

    // Sending-end apparent power limit for each orientation of each line.
    for (size_t li = 0; li < cs.ac_lines.size(); ++li) {
        const AcLine& line = cs.ac_lines[li];
        for (int dir = 0; dir < 2; ++dir) {
            const Mat& yp = dir == 0 ? coeffs.line_p_fwd[li] : coeffs.line_p_rev[li];
            const Mat& yq = dir == 0 ? coeffs.line_q_fwd[li] : coeffs.line_q_rev[li];
            LmiConstraint lmi;
            lmi.dim = 3;
            lmi.entries.assign(6, LinExpr{});
            lmi.tag = {"ac-flow-lmi", static_cast<int>(li), dir};
            lmi.entry(0, 0).constant = line.s_max * line.s_max;
            lmi.entry(0, 1).add_trace(rel.w_ac, rel.reduce_ac(yp));
            lmi.entry(0, 2).add_trace(rel.w_ac, rel.reduce_ac(yq));
            lmi.entry(1, 1).constant = 1.0;
            lmi.entry(2, 2).constant = 1.0;
            p.lmis.push_back(std::move(lmi));
        }
    }

    // Generator cost epigraphs: alpha >= c2*P^2 + c1*P + c0 with
    // P = tr(Y_k W) + P_load.
    for (size_t g = 0; g < cs.generators.size(); ++g) {
        const Generator& gen = cs.generators[g];
        int k = cs.ac_index(gen.bus);
        const double p_load = cs.ac_buses[k].p_load;
        if (gen.c2 > 0) {
            const double rc2 = std::sqrt(gen.c2);
            LmiConstraint lmi;
            lmi.dim = 2;
            lmi.entries.assign(3, LinExpr{});
            lmi.tag = {"cost-epigraph", gen.bus};
            LinExpr& head = lmi.entry(0, 0);
            head.add_scalar(rel.alpha[g], 1.0);
            head.add_trace(rel.w_ac, rel.reduce_ac(Mat(-gen.c1 * coeffs.bus_p[k])));
            head.constant = -gen.c1 * p_load - gen.c0;
            LinExpr& off = lmi.entry(0, 1);
            off.add_trace(rel.w_ac, rel.reduce_ac(Mat(rc2 * coeffs.bus_p[k])));
            off.constant = rc2 * p_load;
            lmi.entry(1, 1).constant = 1.0;
            p.lmis.push_back(std::move(lmi));
        } else {
            LinExpr e;
            e.add_scalar(rel.alpha[g], 1.0);
            e.add_trace(rel.w_ac, rel.reduce_ac(Mat(-gen.c1 * coeffs.bus_p[k])));
            e.constant = -gen.c1 * p_load - gen.c0;
            p.linear.push_back({e, 0.0, kInf, {"cost-epigraph-lin", gen.bus}});
        }
        p.objective.add_scalar(rel.alpha[g], 1.0);
    }

    // Network loss term of the objective.
    if (!cs.ac_lines.empty()) {
        Mat loss = Mat::Zero(2 * n, 2 * n);
        for (size_t li = 0; li < cs.ac_lines.size(); ++li)
            loss += coeffs.line_p_fwd[li] + coeffs.line_p_rev[li];
        p.objective.add_trace(rel.w_ac, rel.reduce_ac(loss));
    }
}

void build_dc_block(const NetworkCase& cs, const CoefficientSet& coeffs, Relaxation& rel) {
    if (!cs.has_dc()) return;
    ensure_dc_block(cs, rel);
    ensure_dcdc_scalars(cs, rel);
    ConicProblem& p = rel.problem;
    const int n = static_cast<int>(cs.dc_buses.size());

    for (int k = 0; k < n; ++k) {
        const DcBus& bus = cs.dc_buses[k];
        LinExpr inj = rel.dc_injection(cs, coeffs, bus.id);
        p.linear.push_back({inj, bus.p_min, bus.p_max, {"dc-injection-bound", bus.id}});

        LinExpr ve;
        ve.add_trace(rel.w_dc, coeffs.dc_bus_v[k]);
        if (bus.is_master) {
            double w = bus.v_master * bus.v_master;
            p.linear.push_back({ve, w, w, {"dc-master-voltage", bus.id}});
        } else {
            p.linear.push_back({ve, bus.v_min * bus.v_min, bus.v_max * bus.v_max,
                                {"dc-voltage-bound", bus.id}});
        }
    }

    for (size_t li = 0; li < cs.dc_lines.size(); ++li) {
        const DcLine& line = cs.dc_lines[li];
        for (int dir = 0; dir < 2; ++dir) {
            LinExpr fe;
            fe.add_trace(rel.w_dc, dir == 0 ? coeffs.dc_line_fwd[li] : coeffs.dc_line_rev[li]);
            p.linear.push_back({fe, -line.p_max, line.p_max,
                                {"dc-flow-limit", static_cast<int>(li), dir}});
        }
    }

    for (size_t d = 0; d < cs.dcdc_converters.size(); ++d) {
        const DcDcConverter& conv = cs.dcdc_converters[d];
        // 2S >= gamma*q^2 + beta*|q| + delta via the t/u epigraphs.
        LinExpr loss;
        loss.add_scalar(rel.dcdc_s[d], 2.0);
        if (rel.dcdc_t[d] >= 0) loss.add_scalar(rel.dcdc_t[d], -conv.gamma);
        if (rel.dcdc_u[d] >= 0) loss.add_scalar(rel.dcdc_u[d], -conv.beta);
        p.linear.push_back({loss, conv.delta, kInf, {"dcdc-loss", static_cast<int>(d)}});

        if (rel.dcdc_t[d] >= 0) {
            LmiConstraint lmi;  // [[t, q], [q, 1]] >= 0, i.e. t >= q^2
            lmi.dim = 2;
            lmi.entries.assign(3, LinExpr{});
            lmi.tag = {"dcdc-loss-sq", static_cast<int>(d)};
            lmi.entry(0, 0).add_scalar(rel.dcdc_t[d], 1.0);
            lmi.entry(0, 1).add_scalar(rel.dcdc_q[d], 1.0);
            lmi.entry(1, 1).constant = 1.0;
            p.lmis.push_back(std::move(lmi));
        }
        if (rel.dcdc_u[d] >= 0) {
            for (double sign : {1.0, -1.0}) {
                LinExpr e;  // u -/+ q >= 0
                e.add_scalar(rel.dcdc_u[d], 1.0);
                e.add_scalar(rel.dcdc_q[d], sign);
                p.linear.push_back({e, 0.0, kInf, {"dcdc-loss-abs", static_cast<int>(d),
                                                   sign > 0 ? 0 : 1}});
            }
        }
        LinExpr qb;
        qb.add_scalar(rel.dcdc_q[d], 1.0);
        p.linear.push_back({qb, -conv.q_max, conv.q_max, {"dcdc-flow-bound", static_cast<int>(d)}});

        p.objective.add_scalar(rel.dcdc_s[d], 2.0);
    }

    if (!cs.dc_lines.empty()) {
        Mat loss = Mat::Zero(n, n);
        for (size_t li = 0; li < cs.dc_lines.size(); ++li)
            loss += coeffs.dc_line_fwd[li] + coeffs.dc_line_rev[li];
        p.objective.add_trace(rel.w_dc, loss);
    }
}

void build_coupling(const NetworkCase& cs, const CoefficientSet& coeffs, Relaxation& rel) {
    ConicProblem& p = rel.problem;
    for (size_t c = 0; c < cs.acdc_converters.size(); ++c) {
        const AcDcConverter& conv = cs.acdc_converters[c];
        cs.dc_index(conv.dc_bus);

        if (!conv.ac_bus) {
            // External AC terminal: only the capacity cap on the DC injection.
            LinExpr inj = rel.dc_injection(cs, coeffs, conv.dc_bus);
            p.linear.push_back({inj, -conv.s_conv, conv.s_conv,
                                {"converter-capacity-lin", static_cast<int>(c)}});
            continue;
        }

        LinExpr pc = rel.converter_p(cs, coeffs, *conv.ac_bus);
        LinExpr qc = rel.converter_q(cs, coeffs, *conv.ac_bus);

        // eta * P_ac + P_dc = 0
        LinExpr bal;
        bal.constant = conv.efficiency * pc.constant;
        for (auto& [b, t] : pc.traces) {
            bal.traces.emplace_back(b, t);
            for (auto& trip : bal.traces.back().second) trip.v *= conv.efficiency;
        }
        LinExpr inj = rel.dc_injection(cs, coeffs, conv.dc_bus);
        bal.constant += inj.constant;
        for (auto& tt : inj.traces) bal.traces.push_back(tt);
        for (auto& s : inj.scalars) bal.scalars.push_back(s);
        p.linear.push_back({bal, 0.0, 0.0, {"converter-balance", static_cast<int>(c)}});

        LmiConstraint lmi;  // [[s^2, P, Q], [P, 1, 0], [Q, 0, 1]] >= 0
        lmi.dim = 3;
        lmi.entries.assign(6, LinExpr{});
        lmi.tag = {"converter-capacity", static_cast<int>(c)};
        lmi.entry(0, 0).constant = conv.s_conv * conv.s_conv;
        lmi.entry(0, 1) = pc;
        lmi.entry(0, 2) = qc;
        lmi.entry(1, 1).constant = 1.0;
        lmi.entry(2, 2).constant = 1.0;
        p.lmis.push_back(std::move(lmi));
    }
}

Relaxation assemble(const NetworkCase& cs) {
    validate(cs);
    CoefficientSet coeffs = build_coefficients(cs);
    Relaxation rel;
    ensure_ac_block(cs, rel);
    ensure_dc_block(cs, rel);
    ensure_dcdc_scalars(cs, rel);
    build_ac_block(cs, coeffs, rel);
    build_dc_block(cs, coeffs, rel);
    build_coupling(cs, coeffs, rel);
    return rel;
}

}  // namespace hyopf
