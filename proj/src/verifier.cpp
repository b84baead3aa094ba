#include "hyopf/verifier.hpp"

#include <cmath>
#include <complex>

#include "hyopf/coefficients.hpp"
#include "hyopf/errors.hpp"

namespace hyopf {

namespace {

double band_violation(double v, double lo, double hi) {
    return std::max({0.0, lo - v, v - hi});
}

}  // namespace

VerifyReport verify(const NetworkCase& cs, const RecoveredState& st, double tol) {
    VerifyReport rep;
    rep.tol = tol;
    auto add = [&](std::string name, double residual) {
        rep.checks.push_back({std::move(name), std::abs(residual)});
    };

    CVec s_inj;  // complex AC injection per bus, from the admittance matrix
    if (cs.has_ac()) {
        const int n = static_cast<int>(cs.ac_buses.size());
        if (st.ac_voltage.size() != n) throw ValidationError("AC voltage vector has wrong length");
        CMat Y = build_ac_admittance(cs);
        s_inj = st.ac_voltage.array() * (Y * st.ac_voltage).conjugate().array();

        for (int k = 0; k < n; ++k) {
            const AcBus& bus = cs.ac_buses[k];
            auto gens = cs.generators_at(bus.id);
            int conv = cs.converter_at_ac(bus.id);
            Complex balance = s_inj(k) + Complex(bus.p_load, bus.q_load);
            if (!gens.empty()) balance -= Complex(st.gen_p(gens[0]), st.gen_q(gens[0]));
            if (conv >= 0) balance -= Complex(st.conv_p(conv), st.conv_q(conv));
            add("ac-balance " + std::to_string(bus.id), std::abs(balance));

            add("ac-voltage " + std::to_string(bus.id),
                band_violation(std::abs(st.ac_voltage(k)), bus.v_min, bus.v_max));
            if (bus.is_slack)
                add("ac-slack-angle " + std::to_string(bus.id), std::arg(st.ac_voltage(k)));
        }

        for (size_t g = 0; g < cs.generators.size(); ++g) {
            const Generator& gen = cs.generators[g];
            add("gen-p " + std::to_string(gen.bus),
                band_violation(st.gen_p(g), gen.p_min, gen.p_max));
            add("gen-q " + std::to_string(gen.bus),
                band_violation(st.gen_q(g), gen.q_min, gen.q_max));
        }

        for (size_t li = 0; li < cs.ac_lines.size(); ++li) {
            const AcLine& line = cs.ac_lines[li];
            int l = cs.ac_index(line.from);
            int m = cs.ac_index(line.to);
            auto flow = [&](int a, int b) {
                Complex i_ab = (st.ac_voltage(a) - st.ac_voltage(b)) * line.series_admittance +
                               st.ac_voltage(a) * line.shunt_admittance;
                return st.ac_voltage(a) * std::conj(i_ab);
            };
            std::string name = "ac-flow " + std::to_string(line.from) + "-" +
                               std::to_string(line.to) + "#" + std::to_string(li);
            add(name + " fwd", std::max(0.0, std::abs(flow(l, m)) - line.s_max));
            add(name + " rev", std::max(0.0, std::abs(flow(m, l)) - line.s_max));
        }
    }

    Vec p_dc;
    auto dc_injection_at = [&](int dc_bus_id) {
        int k = cs.dc_index(dc_bus_id);
        double p = p_dc(k);
        for (int d : cs.dcdc_at(dc_bus_id)) {
            p += st.dcdc_s(d);
            p += (cs.dcdc_converters[d].bus_k == dc_bus_id ? 1.0 : -1.0) * st.dcdc_q(d);
        }
        return p;
    };

    if (cs.has_dc()) {
        const int n = static_cast<int>(cs.dc_buses.size());
        if (st.dc_voltage.size() != n) throw ValidationError("DC voltage vector has wrong length");
        Mat G = build_dc_admittance(cs);
        p_dc = st.dc_voltage.array() * (G * st.dc_voltage).array();

        for (int k = 0; k < n; ++k) {
            const DcBus& bus = cs.dc_buses[k];
            add("dc-injection " + std::to_string(bus.id),
                band_violation(dc_injection_at(bus.id), bus.p_min, bus.p_max));
            if (bus.is_master)
                add("dc-master-voltage " + std::to_string(bus.id),
                    st.dc_voltage(k) - bus.v_master);
            else
                add("dc-voltage " + std::to_string(bus.id),
                    band_violation(st.dc_voltage(k), bus.v_min, bus.v_max));
        }

        for (size_t li = 0; li < cs.dc_lines.size(); ++li) {
            const DcLine& line = cs.dc_lines[li];
            int l = cs.dc_index(line.from);
            int m = cs.dc_index(line.to);
            double fwd = st.dc_voltage(l) * line.conductance * (st.dc_voltage(l) - st.dc_voltage(m));
            double rev = st.dc_voltage(m) * line.conductance * (st.dc_voltage(m) - st.dc_voltage(l));
            std::string name = "dc-flow " + std::to_string(line.from) + "-" +
                               std::to_string(line.to) + "#" + std::to_string(li);
            add(name, std::max({0.0, std::abs(fwd) - line.p_max, std::abs(rev) - line.p_max}));
        }

        for (size_t d = 0; d < cs.dcdc_converters.size(); ++d) {
            const DcDcConverter& c = cs.dcdc_converters[d];
            double q = st.dcdc_q(d);
            add("dcdc-transfer " + std::to_string(d), band_violation(q, -c.q_max, c.q_max));
            add("dcdc-loss " + std::to_string(d),
                2.0 * st.dcdc_s(d) - (c.gamma * q * q + c.beta * std::abs(q) + c.delta));
        }
    }

    for (size_t c = 0; c < cs.acdc_converters.size(); ++c) {
        const AcDcConverter& conv = cs.acdc_converters[c];
        double dc_p = dc_injection_at(conv.dc_bus);
        if (conv.ac_bus) {
            add("converter-balance " + std::to_string(c),
                conv.efficiency * st.conv_p(c) + dc_p);
            add("converter-capacity " + std::to_string(c),
                std::max(0.0, std::hypot(st.conv_p(c), st.conv_q(c)) - conv.s_conv));
        } else {
            add("converter-capacity " + std::to_string(c),
                std::max(0.0, std::abs(dc_p) - conv.s_conv));
        }
    }

    for (const auto& chk : rep.checks) {
        rep.max_residual = std::max(rep.max_residual, chk.residual);
        if (chk.residual > tol) rep.violations.push_back(chk.name);
    }
    rep.passed = rep.violations.empty();
    return rep;
}

double loss_epigraph_slack(const NetworkCase& cs, const ConicSolution& sol) {
    double worst = 0.0;
    for (size_t d = 0; d < cs.dcdc_converters.size(); ++d) {
        const DcDcConverter& c = cs.dcdc_converters[d];
        double q = sol.Q(d);
        double slack = 2.0 * sol.S(d) - (c.gamma * q * q + c.beta * std::abs(q) + c.delta);
        worst = std::max(worst, slack);
    }
    return worst;
}

}  // namespace hyopf
