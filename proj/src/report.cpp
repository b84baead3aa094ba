#include "hyopf/report.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "hyopf/coefficients.hpp"

namespace hyopf {

SolveReport make_report(const NetworkCase& cs, const ConicSolution& sol,
                        const RecoveredState& st, const VerifyReport& verification,
                        double solve_seconds) {
    SolveReport rep;
    rep.case_name = cs.name;
    rep.n_ac_buses = static_cast<int>(cs.ac_buses.size());
    rep.n_dc_buses = static_cast<int>(cs.dc_buses.size());
    rep.status = sol.status;
    rep.iterations = sol.iterations;
    rep.duality_gap = sol.duality_gap;
    rep.ac_rank = st.ac_rank;
    rep.dc_rank = st.dc_rank;
    rep.objective = st.objective;
    rep.verification = verification;
    rep.solve_seconds = solve_seconds;
    rep.ac_voltage = st.ac_voltage;
    rep.dc_voltage = st.dc_voltage;
    rep.dcdc_q = st.dcdc_q;
    const double base = cs.base_mva;

    for (size_t g = 0; g < cs.generators.size(); ++g) {
        const Generator& gen = cs.generators[g];
        double cost = gen.c2 * st.gen_p(g) * st.gen_p(g) + gen.c1 * st.gen_p(g) + gen.c0;
        rep.generators.push_back({gen.bus, st.gen_p(g) * base, st.gen_q(g) * base, cost});
        rep.total_cost += cost;
    }

    for (const AcLine& line : cs.ac_lines) {
        int l = cs.ac_index(line.from);
        int m = cs.ac_index(line.to);
        auto flow = [&](int a, int b) {
            Complex i_ab = (st.ac_voltage(a) - st.ac_voltage(b)) * line.series_admittance +
                           st.ac_voltage(a) * line.shunt_admittance;
            return st.ac_voltage(a) * std::conj(i_ab);
        };
        Complex s_from = flow(l, m);
        Complex s_to = flow(m, l);
        rep.ac_loss_mw += (s_from.real() + s_to.real()) * base;
        SolveReport::AcFlowRow row;
        row.from = line.from;
        row.to = line.to;
        row.s_from_mva = std::abs(s_from) * base;
        row.s_to_mva = std::abs(s_to) * base;
        row.limit_mva = line.s_max * base;
        row.near_limit = std::max(row.s_from_mva, row.s_to_mva) >= 0.99 * row.limit_mva;
        rep.ac_flows.push_back(row);
    }

    for (const DcLine& line : cs.dc_lines) {
        int l = cs.dc_index(line.from);
        int m = cs.dc_index(line.to);
        double fwd = st.dc_voltage(l) * line.conductance * (st.dc_voltage(l) - st.dc_voltage(m));
        double rev = st.dc_voltage(m) * line.conductance * (st.dc_voltage(m) - st.dc_voltage(l));
        rep.dc_loss_mw += (fwd + rev) * base;
        SolveReport::DcFlowRow row;
        row.from = line.from;
        row.to = line.to;
        row.p_mw = fwd * base;
        row.limit_mw = line.p_max * base;
        row.near_limit = std::max(std::abs(fwd), std::abs(rev)) * base >= 0.99 * row.limit_mw;
        rep.dc_flows.push_back(row);
    }

    for (size_t d = 0; d < cs.dcdc_converters.size(); ++d)
        rep.dcdc_loss_mw += 2.0 * st.dcdc_s(d) * base;

    for (size_t c = 0; c < cs.acdc_converters.size(); ++c) {
        const AcDcConverter& conv = cs.acdc_converters[c];
        SolveReport::ConverterRow row;
        row.dc_bus = conv.dc_bus;
        row.has_ac = conv.ac_bus.has_value();
        row.ac_bus = conv.ac_bus.value_or(0);
        row.p_ac_mw = st.conv_p(c) * base;
        row.q_ac_mvar = st.conv_q(c) * base;
        row.p_dc_mw = st.conv_dc_p(c) * base;
        row.s_conv_mva = conv.s_conv * base;
        rep.converters.push_back(row);
    }

    if (cs.has_dc()) {
        Mat G = build_dc_admittance(cs);
        Vec p = st.dc_voltage.array() * (G * st.dc_voltage).array();
        for (size_t k = 0; k < cs.dc_buses.size(); ++k) {
            double inj = p(k);
            for (int d : cs.dcdc_at(cs.dc_buses[k].id)) {
                inj += st.dcdc_s(d);
                inj += (cs.dcdc_converters[d].bus_k == cs.dc_buses[k].id ? 1.0 : -1.0) *
                       st.dcdc_q(d);
            }
            rep.dc_buses.push_back({cs.dc_buses[k].id, st.dc_voltage(k), inj * base});
        }
    }

    return rep;
}

std::string render_text(const SolveReport& rep) {
    std::ostringstream os;
    char buf[256];
    auto line = [&](const char* fmt, auto... args) {
        std::snprintf(buf, sizeof buf, fmt, args...);
        os << buf << "\n";
    };

    line("case: %s  (%d AC buses, %d DC buses)", rep.case_name.c_str(), rep.n_ac_buses,
         rep.n_dc_buses);
    line("status: %s  iterations: %d  gap: %.3e  time: %.2fs", to_string(rep.status).c_str(),
         rep.iterations, rep.duality_gap, rep.solve_seconds);
    if (rep.ac_rank.eigenvalues.size() > 0)
        line("W_AC rank: %d  spectral ratio: %.3e", rep.ac_rank.effective_rank, rep.ac_rank.ratio);
    if (rep.dc_rank.eigenvalues.size() > 0)
        line("W_DC rank: %d  spectral ratio: %.3e", rep.dc_rank.effective_rank, rep.dc_rank.ratio);
    line("objective: %.6f", rep.objective);
    line("generation cost: %.2f $/h", rep.total_cost);
    line("losses: AC %.4f MW, DC %.4f MW, DC/DC conversion %.4f MW", rep.ac_loss_mw,
         rep.dc_loss_mw, rep.dcdc_loss_mw);

    if (!rep.generators.empty()) {
        os << "\ngenerators\n  bus        P (MW)    Q (MVAr)    cost ($/h)\n";
        for (const auto& g : rep.generators)
            line("  %-5d %11.3f %11.3f %13.2f", g.bus, g.p_mw, g.q_mvar, g.cost);
    }
    if (!rep.ac_flows.empty()) {
        os << "\nAC line flows\n  line          from (MVA)   to (MVA)   limit (MVA)\n";
        for (const auto& f : rep.ac_flows)
            line("  %4d-%-6d %11.3f %10.3f %12.1f%s", f.from, f.to, f.s_from_mva, f.s_to_mva,
                 f.limit_mva, f.near_limit ? "  << near limit" : "");
    }
    if (!rep.dc_buses.empty()) {
        os << "\nDC buses\n  bus     V (p.u.)   injection (MW)\n";
        for (const auto& b : rep.dc_buses)
            line("  %-5d %9.5f %15.3f", b.bus, b.voltage, b.injection_mw);
    }
    if (!rep.dc_flows.empty()) {
        os << "\nDC line flows\n  line            P (MW)   limit (MW)\n";
        for (const auto& f : rep.dc_flows)
            line("  %4d-%-6d %10.3f %11.1f%s", f.from, f.to, f.p_mw, f.limit_mw,
                 f.near_limit ? "  << near limit" : "");
    }
    if (!rep.converters.empty()) {
        os << "\nAC/DC converters\n  ac    dc      P_ac (MW)   Q_ac (MVAr)   P_dc (MW)   cap (MVA)\n";
        for (const auto& c : rep.converters) {
            if (c.has_ac)
                line("  %-5d %-5d %11.3f %12.3f %11.3f %11.1f", c.ac_bus, c.dc_bus, c.p_ac_mw,
                     c.q_ac_mvar, c.p_dc_mw, c.s_conv_mva);
            else
                line("  ext   %-5d %11s %12s %11.3f %11.1f", c.dc_bus, "-", "-", c.p_dc_mw,
                     c.s_conv_mva);
        }
    }

    os << "\nverification: " << (rep.verification.passed ? "pass" : "FAIL")
       << "  (max residual " << rep.verification.max_residual << ", tol "
       << rep.verification.tol << ")\n";
    for (const auto& v : rep.verification.violations) os << "  violated: " << v << "\n";
    return os.str();
}

std::string render_json(const SolveReport& rep) {
    nlohmann::json j;
    j["case"] = rep.case_name;
    j["n_ac_buses"] = rep.n_ac_buses;
    j["n_dc_buses"] = rep.n_dc_buses;
    j["status"] = to_string(rep.status);
    j["iterations"] = rep.iterations;
    j["duality_gap"] = rep.duality_gap;
    j["solve_seconds"] = rep.solve_seconds;
    j["objective"] = rep.objective;
    j["generation_cost"] = rep.total_cost;
    j["ac_loss_mw"] = rep.ac_loss_mw;
    j["dc_loss_mw"] = rep.dc_loss_mw;
    j["dcdc_loss_mw"] = rep.dcdc_loss_mw;
    auto rank = [](const RankDiagnostics& d) {
        nlohmann::json r;
        r["effective_rank"] = d.effective_rank;
        r["ratio"] = d.ratio;
        r["eigenvalues"] = std::vector<double>(d.eigenvalues.data(),
                                               d.eigenvalues.data() + d.eigenvalues.size());
        return r;
    };
    if (rep.ac_rank.eigenvalues.size() > 0) j["ac_rank"] = rank(rep.ac_rank);
    if (rep.dc_rank.eigenvalues.size() > 0) j["dc_rank"] = rank(rep.dc_rank);

    j["generators"] = nlohmann::json::array();
    for (const auto& g : rep.generators)
        j["generators"].push_back({{"bus", g.bus}, {"p_mw", g.p_mw}, {"q_mvar", g.q_mvar},
                                   {"cost", g.cost}});
    j["ac_flows"] = nlohmann::json::array();
    for (const auto& f : rep.ac_flows)
        j["ac_flows"].push_back({{"from", f.from}, {"to", f.to}, {"s_from_mva", f.s_from_mva},
                                 {"s_to_mva", f.s_to_mva}, {"limit_mva", f.limit_mva},
                                 {"near_limit", f.near_limit}});
    j["dc_flows"] = nlohmann::json::array();
    for (const auto& f : rep.dc_flows)
        j["dc_flows"].push_back({{"from", f.from}, {"to", f.to}, {"p_mw", f.p_mw},
                                 {"limit_mw", f.limit_mw}, {"near_limit", f.near_limit}});
    j["dc_buses"] = nlohmann::json::array();
    for (const auto& b : rep.dc_buses)
        j["dc_buses"].push_back({{"bus", b.bus}, {"voltage", b.voltage},
                                 {"injection_mw", b.injection_mw}});
    j["converters"] = nlohmann::json::array();
    for (const auto& c : rep.converters) {
        nlohmann::json cj = {{"dc_bus", c.dc_bus}, {"p_dc_mw", c.p_dc_mw},
                             {"s_conv_mva", c.s_conv_mva}};
        if (c.has_ac) {
            cj["ac_bus"] = c.ac_bus;
            cj["p_ac_mw"] = c.p_ac_mw;
            cj["q_ac_mvar"] = c.q_ac_mvar;
        }
        j["converters"].push_back(cj);
    }

    nlohmann::json state;
    std::vector<double> re(rep.ac_voltage.size()), im(rep.ac_voltage.size());
    for (int i = 0; i < rep.ac_voltage.size(); ++i) {
        re[i] = rep.ac_voltage(i).real();
        im[i] = rep.ac_voltage(i).imag();
    }
    state["ac_voltage_re"] = re;
    state["ac_voltage_im"] = im;
    state["dc_voltage"] = std::vector<double>(rep.dc_voltage.data(),
                                              rep.dc_voltage.data() + rep.dc_voltage.size());
    state["dcdc_q"] =
        std::vector<double>(rep.dcdc_q.data(), rep.dcdc_q.data() + rep.dcdc_q.size());
    j["state"] = state;

    nlohmann::json ver;
    ver["passed"] = rep.verification.passed;
    ver["max_residual"] = rep.verification.max_residual;
    ver["tol"] = rep.verification.tol;
    ver["violations"] = rep.verification.violations;
    j["verification"] = ver;
    return j.dump(2) + "\n";
}

}  // namespace hyopf
