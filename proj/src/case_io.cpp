#include "hyopf/case_io.hpp"

#include <cmath>
#include <json.hpp>

#include "hyopf/errors.hpp"

namespace hyopf {

using nlohmann::json;

namespace {

double num(const json& j, const char* ctx, const char* key, std::optional<double> fallback = {}) {
    if (!j.contains(key)) {
        if (fallback) return *fallback;
        throw ParseError(std::string(ctx) + ": missing field '" + key + "'");
    }
    const json& v = j.at(key);
    if (!v.is_number()) throw ParseError(std::string(ctx) + ": field '" + key + "' is not a number");
    return v.get<double>();
}

int integer(const json& j, const char* ctx, const char* key) {
    double d = num(j, ctx, key);
    int i = static_cast<int>(std::lround(d));
    if (std::abs(d - i) > 1e-9) throw ParseError(std::string(ctx) + ": field '" + key + "' is not an integer");
    return i;
}

bool flag(const json& j, const char* key, bool fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<bool>();
}

Complex cplx(const json& j, const char* ctx, const char* key) {
    const json& v = j.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ParseError(std::string(ctx) + ": field '" + key + "' must be [re, im]");
    return {v[0].get<double>(), v[1].get<double>()};
}

const json& array_field(const json& j, const char* key) {
    static const json empty = json::array();
    if (!j.contains(key)) return empty;
    if (!j.at(key).is_array()) throw ParseError(std::string("top-level '") + key + "' must be an array");
    return j.at(key);
}

json parse_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ParseError("malformed JSON");
    if (!j.is_object()) throw ParseError("case file must be a JSON object");
    return j;
}

}  // namespace

NetworkCase parse_case(const std::string& text) {
    json j = parse_json(text);
    NetworkCase cs;
    cs.base_mva = num(j, "case", "base_mva");
    if (!(cs.base_mva > 0)) throw ParseError("base_mva must be positive");
    if (j.contains("name")) cs.name = j.at("name").get<std::string>();
    const double inv = 1.0 / cs.base_mva;

    for (const auto& b : array_field(j, "ac_buses")) {
        AcBus bus;
        bus.id = integer(b, "ac_bus", "id");
        bus.v_min = num(b, "ac_bus", "v_min", 0.9);
        bus.v_max = num(b, "ac_bus", "v_max", 1.1);
        bus.p_load = num(b, "ac_bus", "p_load", 0.0) * inv;
        bus.q_load = num(b, "ac_bus", "q_load", 0.0) * inv;
        bus.is_slack = flag(b, "is_slack", false);
        cs.ac_buses.push_back(bus);
    }
    for (const auto& g : array_field(j, "generators")) {
        Generator gen;
        gen.bus = integer(g, "generator", "bus");
        gen.p_min = num(g, "generator", "p_min") * inv;
        gen.p_max = num(g, "generator", "p_max") * inv;
        gen.q_min = num(g, "generator", "q_min") * inv;
        gen.q_max = num(g, "generator", "q_max") * inv;
        gen.c2 = num(g, "generator", "c2", 0.0) * cs.base_mva * cs.base_mva;
        gen.c1 = num(g, "generator", "c1", 0.0) * cs.base_mva;
        gen.c0 = num(g, "generator", "c0", 0.0);
        cs.generators.push_back(gen);
    }
    for (const auto& l : array_field(j, "ac_lines")) {
        AcLine line;
        line.from = integer(l, "ac_line", "from");
        line.to = integer(l, "ac_line", "to");
        if (l.contains("series_admittance")) {
            line.series_admittance = cplx(l, "ac_line", "series_admittance");
            if (l.contains("shunt_admittance"))
                line.shunt_admittance = cplx(l, "ac_line", "shunt_admittance");
        } else {
            // impedance convenience form: r, x series; b total line charging
            double r = num(l, "ac_line", "r");
            double x = num(l, "ac_line", "x");
            double b = num(l, "ac_line", "b", 0.0);
            Complex z{r, x};
            if (std::abs(z) == 0.0)
                throw ParseError("ac_line " + std::to_string(line.from) + "-" +
                                 std::to_string(line.to) + ": zero series impedance");
            line.series_admittance = 1.0 / z;
            line.shunt_admittance = Complex{0.0, b / 2.0};
        }
        line.s_max = num(l, "ac_line", "s_max") * inv;
        cs.ac_lines.push_back(line);
    }
    for (const auto& b : array_field(j, "dc_buses")) {
        DcBus bus;
        bus.id = integer(b, "dc_bus", "id");
        bus.v_min = num(b, "dc_bus", "v_min", 0.9);
        bus.v_max = num(b, "dc_bus", "v_max", 1.1);
        bus.p_min = num(b, "dc_bus", "p_min") * inv;
        bus.p_max = num(b, "dc_bus", "p_max") * inv;
        bus.is_master = flag(b, "is_master", false);
        if (bus.is_master) bus.v_master = num(b, "dc_bus", "v_master");
        cs.dc_buses.push_back(bus);
    }
    for (const auto& l : array_field(j, "dc_lines")) {
        DcLine line;
        line.from = integer(l, "dc_line", "from");
        line.to = integer(l, "dc_line", "to");
        line.conductance = num(l, "dc_line", "conductance");
        line.p_max = num(l, "dc_line", "p_max") * inv;
        cs.dc_lines.push_back(line);
    }
    for (const auto& c : array_field(j, "acdc_converters")) {
        AcDcConverter conv;
        if (c.contains("ac_bus") && !c.at("ac_bus").is_null())
            conv.ac_bus = integer(c, "acdc_converter", "ac_bus");
        conv.dc_bus = integer(c, "acdc_converter", "dc_bus");
        conv.efficiency = num(c, "acdc_converter", "efficiency", 1.0);
        conv.s_conv = num(c, "acdc_converter", "s_conv") * inv;
        cs.acdc_converters.push_back(conv);
    }
    for (const auto& d : array_field(j, "dcdc_converters")) {
        DcDcConverter conv;
        conv.bus_k = integer(d, "dcdc_converter", "bus_k");
        conv.bus_m = integer(d, "dcdc_converter", "bus_m");
        conv.delta = num(d, "dcdc_converter", "delta", 0.0);
        conv.beta = num(d, "dcdc_converter", "beta", 0.0);
        conv.gamma = num(d, "dcdc_converter", "gamma", 0.0);
        conv.q_max = num(d, "dcdc_converter", "q_max") * inv;
        cs.dcdc_converters.push_back(conv);
    }
    for (const auto& w : array_field(j, "wind")) {
        WindInjection wi;
        wi.dc_bus = integer(w, "wind", "dc_bus");
        wi.p_wind = num(w, "wind", "p_wind") * inv;
        cs.wind.push_back(wi);
    }

    validate(cs);
    NetworkCase out = normalize_wind(cs);
    validate(out);
    return out;
}

std::string serialize_case(const NetworkCase& cs) {
    json j;
    const double base = cs.base_mva;
    j["base_mva"] = base;
    if (!cs.name.empty()) j["name"] = cs.name;
    j["ac_buses"] = json::array();
    for (const auto& b : cs.ac_buses)
        j["ac_buses"].push_back({{"id", b.id},
                                 {"v_min", b.v_min},
                                 {"v_max", b.v_max},
                                 {"p_load", b.p_load * base},
                                 {"q_load", b.q_load * base},
                                 {"is_slack", b.is_slack}});
    j["generators"] = json::array();
    for (const auto& g : cs.generators)
        j["generators"].push_back({{"bus", g.bus},
                                   {"p_min", g.p_min * base},
                                   {"p_max", g.p_max * base},
                                   {"q_min", g.q_min * base},
                                   {"q_max", g.q_max * base},
                                   {"c2", g.c2 / (base * base)},
                                   {"c1", g.c1 / base},
                                   {"c0", g.c0}});
    j["ac_lines"] = json::array();
    for (const auto& l : cs.ac_lines)
        j["ac_lines"].push_back(
            {{"from", l.from},
             {"to", l.to},
             {"series_admittance", {l.series_admittance.real(), l.series_admittance.imag()}},
             {"shunt_admittance", {l.shunt_admittance.real(), l.shunt_admittance.imag()}},
             {"s_max", l.s_max * base}});
    j["dc_buses"] = json::array();
    for (const auto& b : cs.dc_buses) {
        json e = {{"id", b.id},          {"v_min", b.v_min},
                  {"v_max", b.v_max},    {"p_min", b.p_min * base},
                  {"p_max", b.p_max * base}, {"is_master", b.is_master}};
        if (b.is_master) e["v_master"] = b.v_master;
        j["dc_buses"].push_back(e);
    }
    j["dc_lines"] = json::array();
    for (const auto& l : cs.dc_lines)
        j["dc_lines"].push_back({{"from", l.from},
                                 {"to", l.to},
                                 {"conductance", l.conductance},
                                 {"p_max", l.p_max * base}});
    j["acdc_converters"] = json::array();
    for (const auto& c : cs.acdc_converters) {
        json e = {{"dc_bus", c.dc_bus}, {"efficiency", c.efficiency}, {"s_conv", c.s_conv * base}};
        e["ac_bus"] = c.ac_bus ? json(*c.ac_bus) : json(nullptr);
        j["acdc_converters"].push_back(e);
    }
    j["dcdc_converters"] = json::array();
    for (const auto& d : cs.dcdc_converters)
        j["dcdc_converters"].push_back({{"bus_k", d.bus_k},
                                        {"bus_m", d.bus_m},
                                        {"delta", d.delta},
                                        {"beta", d.beta},
                                        {"gamma", d.gamma},
                                        {"q_max", d.q_max * base}});
    j["wind"] = json::array();
    for (const auto& w : cs.wind)
        j["wind"].push_back({{"dc_bus", w.dc_bus}, {"p_wind", w.p_wind * base}});
    return j.dump(2) + "\n";
}

NetworkCase import_matpower(const std::string& text) {
    json j = parse_json(text);
    NetworkCase cs;
    cs.base_mva = num(j, "matpower case", "baseMVA");
    const double inv = 1.0 / cs.base_mva;

    auto row = [](const json& r, size_t min_cols, const char* what) {
        if (!r.is_array() || r.size() < min_cols)
            throw ParseError(std::string(what) + " row needs at least " +
                             std::to_string(min_cols) + " columns");
    };

    for (const auto& r : array_field(j, "bus")) {
        row(r, 13, "bus");
        AcBus b;
        b.id = static_cast<int>(std::lround(r[0].get<double>()));
        int type = static_cast<int>(std::lround(r[1].get<double>()));
        b.p_load = r[2].get<double>() * inv;
        b.q_load = r[3].get<double>() * inv;
        if (r[4].get<double>() != 0.0 || r[5].get<double>() != 0.0)
            throw ParseError("bus " + std::to_string(b.id) + ": bus shunts are not supported");
        b.v_max = r[11].get<double>();
        b.v_min = r[12].get<double>();
        b.is_slack = type == 3;
        cs.ac_buses.push_back(b);
    }
    const json& gencost = array_field(j, "gencost");
    size_t gi = 0;
    for (const auto& r : array_field(j, "gen")) {
        row(r, 10, "gen");
        Generator g;
        g.bus = static_cast<int>(std::lround(r[0].get<double>()));
        g.q_max = r[3].get<double>() * inv;
        g.q_min = r[4].get<double>() * inv;
        g.p_max = r[8].get<double>() * inv;
        g.p_min = r[9].get<double>() * inv;
        if (gi < gencost.size()) {
            const json& c = gencost[gi];
            row(c, 4, "gencost");
            int model = static_cast<int>(std::lround(c[0].get<double>()));
            int ncost = static_cast<int>(std::lround(c[3].get<double>()));
            if (model != 2) throw ParseError("only polynomial gencost (model 2) is supported");
            row(c, 4 + ncost, "gencost");
            double c2 = 0, c1 = 0, c0 = 0;
            if (ncost == 3) {
                c2 = c[4].get<double>();
                c1 = c[5].get<double>();
                c0 = c[6].get<double>();
            } else if (ncost == 2) {
                c1 = c[4].get<double>();
                c0 = c[5].get<double>();
            } else {
                throw ParseError("gencost polynomial degree above 2 is not supported");
            }
            g.c2 = c2 * cs.base_mva * cs.base_mva;
            g.c1 = c1 * cs.base_mva;
            g.c0 = c0;
        }
        ++gi;
        cs.generators.push_back(g);
    }
    for (const auto& r : array_field(j, "branch")) {
        row(r, 11, "branch");
        AcLine l;
        l.from = static_cast<int>(std::lround(r[0].get<double>()));
        l.to = static_cast<int>(std::lround(r[1].get<double>()));
        double res = r[2].get<double>();
        double x = r[3].get<double>();
        double b = r[4].get<double>();
        double rate = r[5].get<double>();
        double tap = r[8].get<double>();
        double shift = r[9].get<double>();
        double status = r[10].get<double>();
        if (status == 0.0) continue;
        if ((tap != 0.0 && tap != 1.0) || shift != 0.0)
            throw ParseError("branch " + std::to_string(l.from) + "-" + std::to_string(l.to) +
                             ": off-nominal taps / phase shifts are not supported");
        Complex z{res, x};
        if (std::abs(z) == 0.0)
            throw ParseError("branch " + std::to_string(l.from) + "-" + std::to_string(l.to) +
                             ": zero impedance");
        l.series_admittance = 1.0 / z;
        l.shunt_admittance = Complex{0.0, b / 2.0};
        l.s_max = (rate > 0 ? rate : 99999.0) * inv;
        cs.ac_lines.push_back(l);
    }

    validate(cs);
    return cs;
}

}  // namespace hyopf
